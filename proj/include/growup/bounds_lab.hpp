#pragma once

#include "growup/graph_transform.hpp"
#include "growup/semiflow.hpp"

#include <string>
#include <vector>

namespace growup {

// gamma1 gamma2 / (gamma1 + gamma2) if gamma1 >= gamma2, else (gamma1 + gamma2) / 4.
double gt_bound(double gamma1, double gamma2);

// max over kappa of min{kappa g2 / (1+kappa), kappa (g1+g2) / (1+kappa)^2}.
double gt_variational(double gamma1, double gamma2);

enum class LPVariant { Full, FirstSecond };
std::string to_string(LPVariant v);
LPVariant parse_lp_variant(const std::string& name);

struct ThresholdReport {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double m_const = 1.0;
  double gt_value = 0.0;
  double lp_value = 0.0;
  double lp_kappa_star = 0.0;
  LPVariant variant = LPVariant::Full;
  bool infeasible = false;
};

// Largest L_f satisfying the variant's constraints at a fixed kappa.
double lp_max_lipschitz(double gamma1, double gamma2, double m, double kappa, LPVariant variant);

ThresholdReport lp_bound(double gamma1, double gamma2, double m, LPVariant variant = LPVariant::Full);

struct SimplifiedBound {
  double kappa0 = 0.0;
  double ours = 0.0;        // lower bound for (g1 + g2) / L_f
  double comparator = 0.0;  // max{M^2 + 2M + sqrt(8 M^3), 3M^2 + 2M}
};

SimplifiedBound lp_bound_simplified(double m);

// (g1 + g2) / L_f for M = 1 with the exact second constraint.
double lp_bound_sharp_m1();

// Sharp value for M = 1 from the energy method; recorded, not computed.
inline constexpr double kSharpBoundM1 = 2.0;

// f(u) outside the cylinder ||Pu|| < r_cut, radially damped inside.
NonlinearityModel cutoff(const NonlinearityModel& f, double r_cut);

// 2 C_f / L_f.
double default_cutoff_radius(double c_f, double l_f);

// Pairs with ||p|| <= p_radius and ||q|| <= q_height.
std::vector<StatePair> sample_strip_pairs(const SplitSystem& sys, double p_radius, double q_height,
                                          std::size_t count, unsigned long long seed);

double max_lipschitz_ratio(const NonlinearityModel& f, const std::vector<StatePair>& pairs);

struct DecayPrediction {
  bool slow = false;
  double beta = 0.0;
  bool equality = false;  // gamma2 == gamma1 alpha: any beta below gamma2 / gamma0
  // Slow envelopes: thickness ~ H(M3 ||p||^{exponent}).
  double exponent = 0.0;
  std::string descriptor;
};

DecayPrediction decay_exponent(double gamma0, double gamma1, double gamma2,
                               const DecayEnvelope& envelope);

struct FiberSamples {
  double r = 0.0;
  VecP p;
  std::vector<VecM> q_values;
};

struct RingOptions {
  double ring_radius = 0.0;  // R
  double q_height = 0.0;     // D2
  int q_levels = 5;          // per E- axis
  int directions = 8;        // on the unit circle of E+ (n_plus = 2) or +-e_i
  FiberOptions fiber;
  double t_tol = 1e-9;
  int max_secant = 60;
  int workers = 0;
};

// Fibers of the evolved ring {||Pv|| = R, ||(I-P)v|| <= D2} over points
// p = r d. For each start level q0 the time t and start p0 with ||p0|| = R
// and P S(t)(p0 + q0) = p are found by a safeguarded secant in t around a
// fiber solve for p0.
std::vector<FiberSamples> sample_ring_fibers(const SplitSystem& sys, const NonlinearityModel& f,
                                             const std::vector<double>& shells,
                                             const RingOptions& opts);

struct ShellThickness {
  double r = 0.0;
  double diameter = 0.0;
  std::size_t fibers = 0;
};

struct ThicknessFit {
  std::vector<ShellThickness> shells;
  std::vector<double> skipped;  // shells with fewer than two samples
  double slope = 0.0;
  double intercept = 0.0;
};

ThicknessFit measure_thickness(const std::vector<FiberSamples>& fibers);

struct ThresholdRow {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double lp_full = 0.0;
  double lp_first_second = 0.0;
  double gt = 0.0;
};

// gamma1, gamma2 in {0.1, 1, 10}.
std::vector<ThresholdRow> threshold_table(int workers = 0);

struct RemarkRow {
  double m = 1.0;
  double comparator = 0.0;
  double ours = 0.0;
  double gt = 0.0;     // only for M = 1
  double sharp = 0.0;  // only for M = 1
};

std::vector<RemarkRow> remark_table();

}  // namespace growup
