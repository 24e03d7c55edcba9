#pragma once

#include "growup/graph.hpp"
#include "growup/semiflow.hpp"

#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace growup {

struct ConeParameters {
  double kappa = 1.0;
  bool gt_admissible = false;     // L_f < kappa/(1+kappa)^2 (g1+g2) and M = 1
  bool limit_admissible = false;  // L_f (1 + 1/kappa) < g2 and M = 1

  static ConeParameters evaluate(const DichotomyConstants& d, double l_f, double kappa);
  double predicted_rate(const DichotomyConstants& d, double l_f) const;
};

struct FiberOptions {
  double dt = 0.005;
  int max_iter = 40;
  double tol = 1e-8;
  bool multistart = true;
  double search_radius = 0.0;  // 0: derived from the linear preimage
};

struct FiberResult {
  VecP p_pre;
  VecM q;
  double residual = 0.0;
  int iterations = 0;
  int multiplicity = 1;
};

// Finds p1 with P S(t0 + t, t0)(p1 + sigma(p1)) = p_target.
FiberResult fiber_solve(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& sigma,
                        double t0, double t, const VecP& p_target, const FiberOptions& opts = {});

struct TransformOptions {
  FiberOptions fiber;
  double t_start = 0.0;
  int workers = 0;
  std::optional<ConeParameters> cone;
};

struct TransformResult {
  GraphFn graph;
  bool admissibility_warning = false;
  double kappa_hat = 0.0;
  int max_multiplicity = 1;
};

TransformResult transform(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& sigma,
                          double t, const TransformOptions& opts = {});

struct LimitOptions {
  TransformOptions transform;
  int max_rounds = 200;
};

struct GraphLimit {
  GraphFn graph;
  double rate = std::numeric_limits<double>::infinity();
  int rounds = 0;
  std::vector<double> sup_diffs;
  std::vector<double> kappa_hats;
  bool admissibility_warning = false;
};

// Geometric rate fitted to successive differences spaced t_step apart.
double fit_geometric_rate(const std::vector<double>& diffs, double t_step, double floor = 1e-12);

GraphLimit iterate_to_limit(const SplitSystem& sys, const NonlinearityModel& f,
                            const GraphFn& sigma0, double t_step, double tol,
                            const LimitOptions& opts = {});

using StatePair = std::pair<State, State>;

// Pairs with p in the ball of radius p_radius, ||q|| <= strip_height and
// ||q1 - q2|| <= kappa ||p1 - p2||.
std::vector<StatePair> sample_cone_pairs(const SplitSystem& sys, double strip_height,
                                         double p_radius, double kappa, std::size_t count,
                                         unsigned long long seed);

std::size_t check_cone_invariance(const SplitSystem& sys, const NonlinearityModel& f,
                                  const std::vector<StatePair>& pairs, double t, double kappa,
                                  double dt = 0.005, int workers = 0);

struct RateFit {
  double rate = 0.0;
  std::size_t points = 0;
  std::vector<double> times;
  std::vector<double> sup_distance;
};

// Decay rate of the vertical distance ||sigma(p(t)) - q(t)|| over a sample batch.
RateFit attraction_rate(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& sigma,
                        const std::vector<State>& samples, double horizon, double dt = 0.005,
                        double probe_dt = 0.1, double floor = 1e-12, int workers = 0);

}  // namespace growup
