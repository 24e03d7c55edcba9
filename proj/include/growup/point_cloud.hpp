#pragma once

#include <Eigen/Dense>

#include <vector>

namespace growup {

struct PointCloud {
  std::vector<Eigen::VectorXd> points;
  std::vector<int> cluster;
  int clusters = 0;
  bool empty_marker = false;  // set when the limit set is empty by construction

  bool empty() const { return points.empty(); }
};

// Greedy thinning at radius eps / 2 followed by single-linkage clustering at
// radius eps.
PointCloud cluster_points(const std::vector<Eigen::VectorXd>& raw, double eps);

PointCloud empty_cloud();

double hausdorff(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b);

// sup over a of the distance to b.
double one_sided_distance(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b);

}  // namespace growup
