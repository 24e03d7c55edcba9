#include "gen.hpp"

#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

using namespace growup;

namespace {

// Kronecker oracle: (I (x) A^T + A^T (x) I) vec(N) = vec(I).
Eigen::MatrixXd lyapunov_oracle(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd k = Eigen::kroneckerProduct(id, a.transpose()) + Eigen::kroneckerProduct(a.transpose(), id);
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(id.data(), n * n);
  Eigen::VectorXd x = k.fullPivLu().solve(rhs);
  return Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
}

// Truncated Taylor series; only used for moderate ||A t||.
Eigen::MatrixXd exp_taylor(const Eigen::MatrixXd& a, double t) {
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 80; ++k) {
    term = term * a * (t / k);
    sum += term;
  }
  return sum;
}

SplitSystem system_of(const Eigen::MatrixXd& a, std::initializer_list<double> rates) {
  VecM r(static_cast<int>(rates.size()));
  int i = 0;
  for (double x : rates) r(i++) = x;
  return SplitSystem::make(MatP(a), r);
}

}  // namespace

TEST_CASE("Lyapunov solution matches the Kronecker oracle on random expanding matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 6;
    Eigen::MatrixXd a = gen::expanding_matrix(rng, n);
    LyapunovCertificate c = solve_lyapunov(system_of(a, {-1.0}));
    Eigen::MatrixXd oracle = lyapunov_oracle(a);
    CHECK((Eigen::MatrixXd(c.n) - oracle).norm() <= 1e-9 * std::max(1.0, oracle.norm()));
    CHECK(c.residual <= 1e-10);
    // N is symmetric positive definite with d1, d2 bracketing the form.
    CHECK((Eigen::MatrixXd(c.n) - Eigen::MatrixXd(c.n).transpose()).norm() <= 1e-10 * oracle.norm());
    for (int k = 0; k < 20; ++k) {
      VecP p = gen::vec_p(rng, n);
      double pn = p.squaredNorm();
      CHECK(c.form(p) >= c.d1 * c.d1 * pn * (1.0 - 1e-9));
      CHECK(c.form(p) <= c.d2 * c.d2 * pn * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("scalar Lyapunov solution is 1 / (2a)") {
  MatP a(1, 1);
  a << 2.5;
  LyapunovCertificate c = solve_lyapunov(SplitSystem::make(a, VecM::Constant(1, cplx(-1.0))));
  CHECK(c.n(0, 0) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("forcing bound radii follow r0 = 2 c2^2 C_f ||N|| / c1^2 + margin, r1 = (d2 / d1) r0") {
  MatP a(2, 2);
  a << 2.0, 0.5, 0.0, 1.0;
  for (NormChoice norm : {NormChoice::Euclidean, NormChoice::Max, NormChoice::Sum}) {
    SplitSystem sys = SplitSystem::make(a, VecM::Constant(1, cplx(-1.0)), norm);
    LyapunovCertificate c = with_forcing_bound(solve_lyapunov(sys), sys, 0.7, 1.0);
    const NormConstants& nc = sys.norm_constants();
    CHECK(c.r0 == doctest::Approx(2.0 * nc.c2 * nc.c2 * 0.7 * c.n_norm / (nc.c1 * nc.c1) + 1.0));
    CHECK(c.r1 == doctest::Approx(c.d2 / c.d1 * c.r0));
  }
}

TEST_CASE("norm equivalence constants bracket the chosen norm") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n)
    for (NormChoice norm : {NormChoice::Euclidean, NormChoice::Max, NormChoice::Sum}) {
      NormConstants nc = norm_constants(norm, n);
      SplitSystem sys = SplitSystem::make(MatP(Eigen::MatrixXd::Identity(n, n)), VecM::Constant(1, cplx(-1.0)), norm);
      for (int k = 0; k < 50; ++k) {
        VecP p = gen::vec_p(rng, n, 3.0);
        CHECK(p.norm() >= nc.c1 * sys.plus_norm(p) * (1.0 - 1e-12));
        CHECK(p.norm() <= nc.c2 * sys.plus_norm(p) * (1.0 + 1e-12));
      }
    }
  CHECK(parse_norm_choice(to_string(NormChoice::Max)) == NormChoice::Max);
  CHECK_THROWS_AS(parse_norm_choice("l7"), ConfigError);
}

TEST_CASE("propagators match series and scalar exponentials") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    Eigen::MatrixXd a = gen::expanding_matrix(rng, n, 0.2, 1.5);
    SplitSystem sys = system_of(a, {-0.5, -2.0});
    for (double t : {-0.7, 0.3, 1.1}) {
      Eigen::MatrixXd ref = exp_taylor(a, t);
      CHECK((Eigen::MatrixXd(propagator_plus(sys, t)) - ref).norm() <= 1e-10 * ref.norm());
    }
    VecM em = propagator_minus(sys, 1.3);
    CHECK(std::abs(em(0) - std::exp(-0.65)) <= 1e-15);
    CHECK(std::abs(em(1) - std::exp(-2.6)) <= 1e-15);
    // Group law.
    Eigen::MatrixXd prod = propagator_plus(sys, 0.8) * propagator_plus(sys, -0.8);
    CHECK((prod - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-12);
  }
}

TEST_CASE("complex contracting rates propagate as e^{lambda t}") {
  MatP a(1, 1);
  a << 1.0;
  VecM r(2);
  r << cplx(-1.0, 2.0), cplx(-1.0, -2.0);
  SplitSystem sys = SplitSystem::make(a, r);
  CHECK(sys.has_complex_rates());
  VecM e = propagator_minus(sys, 0.5);
  CHECK(std::abs(e(0) - std::exp(cplx(-0.5, 1.0))) <= 1e-15);
}

TEST_CASE("dichotomy constants of normal systems") {
  MatP a(2, 2);
  a << 2.0, 0.0, 0.0, 1.0;
  VecM r(2);
  r << -3.0, -4.0;
  DichotomyConstants d = estimate_dichotomy(SplitSystem::make(a, r));
  CHECK(d.m == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(d.gamma0 == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(d.gamma1 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(d.gamma2 == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("dichotomy bounds hold on the sample grid for non-normal blocks") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3;
    SplitSystem sys = system_of(gen::expanding_matrix(rng, n), {-1.0});
    DichotomyConstants d = estimate_dichotomy(sys);
    CHECK(d.m >= 1.0);
    for (double t : default_dichotomy_grid(sys)) {
      double back = Eigen::MatrixXd(propagator_plus(sys, -t)).operatorNorm();
      CHECK(back <= d.m * std::exp(-d.gamma1 * t) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("hyperbolicity is enforced by make and skipped by make_unchecked") {
  MatP a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  VecM r = VecM::Constant(1, cplx(-1.0));
  CHECK_THROWS_AS(SplitSystem::make(a, r), HyperbolicityError);
  CHECK_FALSE(SplitSystem::make_unchecked(a, r).hyperbolic());
  MatP b(1, 1);
  b << 1.0;
  CHECK_THROWS_AS(SplitSystem::make(b, VecM::Constant(1, cplx(0.5))), HyperbolicityError);
}
