#include "growup/point_cloud.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace growup {

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

PointCloud cluster_points(const std::vector<Eigen::VectorXd>& raw, double eps) {
  PointCloud out;
  const double thin = 0.5 * eps;
  for (const auto& x : raw) {
    bool covered = false;
    for (const auto& k : out.points) {
      if ((k - x).norm() <= thin) {
        covered = true;
        break;
      }
    }
    if (!covered) out.points.push_back(x);
  }
  const int n = static_cast<int>(out.points.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((out.points[i] - out.points[j]).norm() <= eps) {
        int a = find_root(parent, i), b = find_root(parent, j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  out.cluster.assign(n, -1);
  std::vector<int> label(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find_root(parent, i);
    if (label[r] < 0) label[r] = out.clusters++;
    out.cluster[i] = label[r];
  }
  return out;
}

PointCloud empty_cloud() {
  PointCloud c;
  c.empty_marker = true;
  return c;
}

double one_sided_distance(const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b) {
  if (a.empty()) return 0.0;
  if (b.empty()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& x : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : b) best = std::min(best, (x - y).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

double hausdorff(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) {
  return std::max(one_sided_distance(a, b), one_sided_distance(b, a));
}

}  // namespace growup
