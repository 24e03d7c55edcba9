#pragma once

#include "growup/absorbing.hpp"
#include "growup/graph.hpp"
#include "growup/graph_transform.hpp"
#include "growup/point_cloud.hpp"
#include "growup/semiflow.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace growup {

struct PullbackOptions {
  std::vector<double> ladder = {1.0, 2.0, 4.0, 8.0, 16.0};  // depths t - s
  double max_depth = 64.0;  // the ladder doubles past its end up to this depth
  double tol = 1e-6;        // Cauchy tolerance between consecutive depths
  double unit_step = 1.0;   // composed transforms no longer than this
  FiberOptions fiber;
  int workers = 0;
};

struct PullbackSection {
  GraphFn graph;
  double t = 0.0;
  std::vector<double> depths;
  std::vector<double> cauchy_diffs;  // sup distance to the previous depth
  bool converged = false;
  double depth_used = 0.0;
};

// Image S(t, t - depth) of the graph `start` by composed graph transforms.
GraphFn pullback_image(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& start,
                       double t, double depth, const PullbackOptions& opts);

// J(t) fiber estimate on the grid: the graph q = 0 (a slice of the strip Q)
// pulled back over increasing depths until consecutive sections agree.
PullbackSection pullback_section(const SplitSystem& sys, const NonlinearityModel& f, double t,
                                 const GridSpec& grid, const PullbackOptions& opts = {});

// Section nodes whose forward orbit stays in H_{r_level} over [t, t + forward_horizon].
PointCloud bounded_core_section(const AbsorbingSetup& setup, const NonlinearityModel& f, double t,
                                double r_level, double forward_horizon,
                                const PullbackSection& section, double merge_eps,
                                double dt = 0.005);

struct SetFamily {
  enum class Kind { Points, Slab };
  enum class Universe { Tilde, Hat };
  Kind kind = Kind::Points;
  Universe universe = Universe::Hat;
  std::function<std::vector<State>(double)> sampler;  // Points: B(tau)
  GridSpec window;                                     // Slab: p-box of B(tau)
  std::vector<VecM> q_levels;                          // Slab: q values of B(tau)
  double r_level = 0.0;  // H_R used by the universe preconditions
};

struct PullbackOmega {
  PointCloud cloud;
  std::vector<double> depths;
  std::vector<std::size_t> in_h_counts;  // per depth, images inside H_R(t)
};

// Clustered union of S(t, tau) B(tau) over the deeper half of the ladder.
PullbackOmega pullback_omega(const AbsorbingSetup& setup, const NonlinearityModel& f, double t,
                             const SetFamily& family, double merge_eps,
                             const PullbackOptions& opts = {}, double dt = 0.005);

// |S(t, s)u - S(t, tau) S(tau, s)u|.
double process_law_defect(const SplitSystem& sys, const NonlinearityModel& f, const State& u,
                          double s, double tau, double t, double dt = 0.005);

// Sup distance on the lattice between the image of the J(s) section under
// S(t, s) (as a graph, by fiber solves) and the J(t) section.
double section_invariance_defect(const SplitSystem& sys, const NonlinearityModel& f,
                                 const GraphFn& section_s, double s, const GraphFn& section_t,
                                 double t, const PullbackOptions& opts = {});

// Pushes cloud points (full states) by the process from t0 to t1.
PointCloud push_process(const SplitSystem& sys, const NonlinearityModel& f, const PointCloud& cloud,
                        double t0, double t1, double merge_eps, double dt = 0.005);

// Max over cloud points of |q - section(p)|.
double distance_to_section(const SplitSystem& sys, const PointCloud& cloud, const GraphFn& section);

}  // namespace growup
