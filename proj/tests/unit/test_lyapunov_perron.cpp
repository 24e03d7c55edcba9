#include "gen.hpp"

#include "growup/lyapunov_perron.hpp"
#include "growup/presets.hpp"

#include <doctest.h>

using namespace growup;

TEST_CASE("constraints hold for small L_f and fail for large L_f") {
  DichotomyConstants d{1.0, 2.0, 1.0, 1.0};
  CHECK(lp_constraints(d, 0.0, 1.0).all());
  CHECK(lp_constraints(d, 0.2, 1.0).all());
  CHECK_FALSE(lp_constraints(d, 0.6, 1.0).all());
  // Monotone in L_f: once violated, violated for all larger values.
  bool seen_fail = false;
  for (double l = 0.0; l < 1.0; l += 0.01) {
    bool ok = lp_constraints(d, l, 0.7).all();
    if (seen_fail) CHECK_FALSE(ok);
    seen_fail = seen_fail || !ok;
  }
}

TEST_CASE("predicted LP rate reduces to gamma2 without forcing") {
  DichotomyConstants d{1.0, 3.0, 1.5, 0.8};
  CHECK(lp_predicted_rate(d, 0.0, 1.0) == doctest::Approx(0.8));
  CHECK(lp_predicted_rate(d, 0.1, 1.0) < 0.8);
}

TEST_CASE("default truncation horizon satisfies the tail bound") {
  for (double g2 : {0.3, 1.0, 4.0})
    for (double tol : {1e-3, 1e-6}) {
      DichotomyConstants d{1.0, 2.0, 1.0, g2};
      const double t = default_t_inf(d, 0.5, tol);
      CHECK(t >= 1.0);
      CHECK(std::exp(-g2 * t) * 2.0 * 0.5 / g2 <= 0.1 * tol * (1.0 + 1e-9));
    }
}

TEST_CASE("anchor is an equilibrium") {
  for (unsigned long long seed = 1; seed <= 5; ++seed) {
    Preset pr = preset_small_lipschitz(seed, 1.0, 1.0, 0.3, 0.5);
    AnchorResult a = find_anchor(pr.sys, pr.f);
    State rhs = pr.f(0.0, a.anchor);
    rhs.p += pr.sys.a_plus() * a.anchor.p;
    for (int j = 0; j < pr.sys.n_minus(); ++j) rhs.q(j) += pr.sys.minus_rates()(j) * a.anchor.q(j);
    CHECK(rhs.norm() <= 1e-9);
    CHECK(a.residual <= 1e-9);
  }
  CHECK_THROWS_AS(find_anchor(preset_sin_forced().sys, preset_sin_forced().f), ConfigError);
}

TEST_CASE("LP limit of a linear system is the zero graph") {
  MatP a(2, 2);
  a << 1.0, 0.3, 0.0, 2.0;
  VecM r(2);
  r << -1.0, cplx(-1.5, 1.0);
  SplitSystem sys = SplitSystem::make(a, r);
  LPConfig cfg;
  cfg.grid = GridSpec::cube(2, 2.0, 5);
  cfg.tol = 1e-10;
  LPResult res = lp_fixed_point(sys, zero_nonlinearity(), estimate_dichotomy(sys), 0.0, cfg);
  CHECK(res.graph.sup_norm() <= 1e-8);
}

TEST_CASE("LP fixed point is invariant and contracts at the predicted ratio") {
  Preset pr = preset_small_lipschitz(3, 1.0, 1.0, 0.2, 0.5);
  DichotomyConstants d = estimate_dichotomy(pr.sys);
  LPConfig cfg;
  cfg.grid = GridSpec::cube(1, 4.0, 9);
  cfg.tol = 1e-6;
  LPResult res = lp_fixed_point(pr.sys, pr.f, d, 0.2, cfg);
  CHECK(res.membership_ok);
  CHECK(res.contraction < 1.0);
  CHECK(res.contraction <= 1.25 * res.constraints.second_lhs);
  // One more application of the map in translated coordinates moves nothing.
  NonlinearityModel g = translated(pr.f, res.anchor);
  LPConfig shifted = cfg;
  shifted.grid.lo -= res.anchor.p;
  shifted.grid.hi -= res.anchor.p;
  GraphFn again = lp_map(pr.sys, g, d, 0.2, shifted, res.t_inf, res.sigma_star);
  CHECK(sup_distance(again, res.sigma_star) <= 1e-5);
}

TEST_CASE("LP rejects parameters outside its constraints") {
  Preset pr = preset_small_lipschitz(1, 1.0, 1.0, 0.9, 0.5);
  LPConfig cfg;
  cfg.grid = GridSpec::cube(1, 2.0, 5);
  CHECK_THROWS_AS(lp_fixed_point(pr.sys, pr.f, estimate_dichotomy(pr.sys), 0.9, cfg), ConfigError);
}

TEST_CASE("LP attraction meets its prefactor and rate bounds") {
  Preset pr = preset_small_lipschitz(5, 1.0, 1.0, 0.2, 0.5);
  DichotomyConstants d = estimate_dichotomy(pr.sys);
  LPConfig cfg;
  cfg.grid = GridSpec::cube(1, 4.0, 17);
  LPResult res = lp_fixed_point(pr.sys, pr.f, d, 0.2, cfg);
  std::mt19937_64 rng(1);
  std::vector<State> samples;
  for (int k = 0; k < 10; ++k) samples.push_back(gen::state(rng, 1, pr.sys.n_minus(), 2.0));
  CHECK(lp_prefactor_check(res, d, pr.f.c_f, samples).violations == 0);
  RateFit rf = lp_attraction_rate(pr.sys, pr.f, res, samples, 2.0);
  CHECK(rf.rate >= 0.85 * lp_predicted_rate(d, 0.2, cfg.kappa));
}
