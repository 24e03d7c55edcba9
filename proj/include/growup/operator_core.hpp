#pragma once

#include "growup/types.hpp"

#include <string>
#include <vector>

namespace growup {

enum class NormChoice { Euclidean, Max, Sum };

NormChoice parse_norm_choice(const std::string& name);
std::string to_string(NormChoice n);

// Equivalence constants c1 ||p|| <= |p| <= c2 ||p|| between the chosen norm
// ||.|| on E+ and the Euclidean norm |.|.
struct NormConstants {
  double c1 = 1.0;
  double c2 = 1.0;
};

NormConstants norm_constants(NormChoice norm, int dim);

// Linear part split into an expanding block (real matrix, spectrum in
// Re > 0) and a diagonal contracting block (complex rates, Re < 0).
class SplitSystem {
 public:
  static SplitSystem make(const MatP& a_plus, const VecM& minus_rates,
                          NormChoice norm = NormChoice::Euclidean);

  // Skips the hyperbolicity checks; used for neutral worked examples.
  static SplitSystem make_unchecked(const MatP& a_plus, const VecM& minus_rates,
                                    NormChoice norm = NormChoice::Euclidean);

  const MatP& a_plus() const { return a_plus_; }
  const VecM& minus_rates() const { return minus_rates_; }
  int n_plus() const { return static_cast<int>(a_plus_.rows()); }
  int n_minus() const { return static_cast<int>(minus_rates_.size()); }
  NormChoice norm() const { return norm_; }
  const NormConstants& norm_constants() const { return norm_constants_; }
  bool hyperbolic() const { return hyperbolic_; }
  bool has_complex_rates() const;

  const Eigen::VectorXcd& plus_eigenvalues() const { return plus_eigs_; }
  double max_abs_real_part() const;

  double plus_norm(const VecP& p) const;
  State zero_state() const { return State::zero(n_plus(), n_minus()); }

 private:
  SplitSystem() = default;
  static SplitSystem build(const MatP& a_plus, const VecM& minus_rates, NormChoice norm,
                           bool check);

  MatP a_plus_;
  VecM minus_rates_;
  NormChoice norm_ = NormChoice::Euclidean;
  NormConstants norm_constants_;
  Eigen::VectorXcd plus_eigs_;
  bool hyperbolic_ = false;
};

// e^{a_plus t}; any real t.
MatP propagator_plus(const SplitSystem& sys, double t);

// Diagonal entries of e^{minus t}; t >= 0 only.
VecM propagator_minus(const SplitSystem& sys, double t);

struct DichotomyConstants {
  double m = 1.0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

// Default sample grid: [0, 10 / smallest rate] in 200 steps.
std::vector<double> default_dichotomy_grid(const SplitSystem& sys);

DichotomyConstants estimate_dichotomy(const SplitSystem& sys, const std::vector<double>& grid);
DichotomyConstants estimate_dichotomy(const SplitSystem& sys);

struct LyapunovCertificate {
  MatP n;
  double residual = 0.0;
  double n_norm = 0.0;   // spectral norm of N
  double d1 = 0.0;       // d1^2 ||p||^2 <= p^T N p
  double d2 = 0.0;       // p^T N p <= d2^2 ||p||^2
  double condition = 0.0;
  double r0 = 0.0;       // filled by with_forcing_bound
  double r1 = 0.0;

  double form(const VecP& p) const { return p.dot(n * p); }
};

// Solves a_plus^T N + N a_plus = I.
LyapunovCertificate solve_lyapunov(const SplitSystem& sys);

// r0 = 2 c2^2 C_f ||N|| / c1^2 + margin, r1 = (d2 / d1) r0.
LyapunovCertificate with_forcing_bound(LyapunovCertificate cert, const SplitSystem& sys,
                                       double c_f, double margin = 1.0);

}  // namespace growup
