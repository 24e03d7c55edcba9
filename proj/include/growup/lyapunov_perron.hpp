#pragma once

#include "growup/graph.hpp"
#include "growup/graph_transform.hpp"
#include "growup/semiflow.hpp"

#include <optional>
#include <string>
#include <vector>

namespace growup {

struct LPConstraints {
  double first_a = 0.0;   // kappa-weighted bound on L_f (non-strict)
  double first_b = 0.0;   // strict bound on L_f
  double second_lhs = 0.0;
  double third_lhs = 0.0;
  bool first = false;
  bool second = false;
  bool third = false;

  bool all() const { return first && second && third; }
};

LPConstraints lp_constraints(const DichotomyConstants& d, double l_f, double kappa);

// gamma2 - M L - M^2 L^2 (1+kappa)(1+M) / (g1 + g2 - M L (1+kappa)).
double lp_predicted_rate(const DichotomyConstants& d, double l_f, double kappa);

// Tail bound e^{-g2 t_inf} 2 M C_f / g2 <= 0.1 tol.
double default_t_inf(const DichotomyConstants& d, double c_f, double tol);

struct AnchorResult {
  State anchor;
  double residual = 0.0;
  std::string method;
};

AnchorResult find_anchor(const SplitSystem& sys, const NonlinearityModel& f);

struct LPConfig {
  double kappa = 1.0;
  double t_inf = 0.0;  // 0: from the tail bound
  double dt = 0.005;
  GridSpec grid;       // original coordinates
  std::optional<State> anchor;
  double tol = 1e-4;
  int max_iter = 200;
  int workers = 0;
};

struct LPMapStats {
  double max_backward_ratio = 0.0;  // path norm over the growth envelope
  double kappa_hat = 0.0;
  double sup_norm = 0.0;
  double pin_offset = 0.0;
};

// One application of the Lyapunov-Perron map to a graph in translated
// coordinates (the lattice already shifted by -anchor.p).
GraphFn lp_map(const SplitSystem& sys, const NonlinearityModel& g, const DichotomyConstants& d,
               double l_f, const LPConfig& cfg, double t_inf, const GraphFn& sigma,
               LPMapStats* stats = nullptr);

struct LPLogRow {
  int iteration = 0;
  double sup_diff = 0.0;
  double lb_diff = 0.0;
  double ratio = 0.0;  // in the weighted metric
  double kappa_hat = 0.0;
  double sup_norm = 0.0;
};

struct LPResult {
  GraphFn graph;       // original coordinates, anchor added back
  GraphFn sigma_star;  // translated coordinates
  State anchor;
  double t_inf = 0.0;
  double contraction = 0.0;  // max weighted-metric ratio
  double sup_ratio = 0.0;    // max sup-metric ratio
  double first_step_norm = 0.0;
  int iterations = 0;
  bool membership_ok = true;
  double max_backward_ratio = 0.0;
  LPConstraints constraints;
  std::vector<LPLogRow> log;
};

LPResult lp_fixed_point(const SplitSystem& sys, const NonlinearityModel& f,
                        const DichotomyConstants& d, double l_f, const LPConfig& cfg);

struct PrefactorCheck {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // offset / (M (||u0|| + 3 M C_f / g2))
};

PrefactorCheck lp_prefactor_check(const LPResult& res, const DichotomyConstants& d, double c_f,
                                  const std::vector<State>& samples);

RateFit lp_attraction_rate(const SplitSystem& sys, const NonlinearityModel& f, const LPResult& res,
                           const std::vector<State>& samples, double horizon, double dt = 0.005,
                           double probe_dt = 0.1, int workers = 0);

}  // namespace growup
