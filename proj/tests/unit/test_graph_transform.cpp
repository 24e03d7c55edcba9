#include "gen.hpp"

#include "growup/bounds_lab.hpp"
#include "growup/graph_transform.hpp"
#include "growup/presets.hpp"

#include <doctest.h>

using namespace growup;

TEST_CASE("multilinear interpolation reproduces affine graphs") {
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 3; ++n) {
    GridSpec grid = GridSpec::cube(n, 2.0, 5);
    VecP w = gen::vec_p(rng, n);
    const double c = 0.3;
    GraphFn g(grid, 1);
    for (std::size_t i = 0; i < g.size(); ++i) g.value(i)(0) = c + w.dot(g.node(i));
    for (int k = 0; k < 50; ++k) {
      VecP p = gen::vec_p(rng, n, 2.0);
      CHECK(std::abs(g(p)(0) - (c + w.dot(p))) <= 1e-12);
    }
    CHECK(g.kappa_hat() == doctest::Approx(w.norm()).epsilon(1e-9));
    CHECK(g.sup_norm() <= std::abs(c) + 2.0 * w.lpNorm<1>() + 1e-12);
  }
}

TEST_CASE("graphs clamp outside the box and shift with their lattice") {
  GridSpec grid = GridSpec::cube(1, 1.0, 3);
  GraphFn g(grid, 1);
  for (std::size_t i = 0; i < g.size(); ++i) g.value(i)(0) = g.node(i)(0);
  VecP far(1);
  far << 7.0;
  CHECK(g(far)(0).real() == doctest::Approx(1.0));
  VecP off(1);
  off << 0.5;
  GraphFn s = g.shifted(off);
  VecP p(1);
  p << 1.0;
  CHECK(s(p)(0).real() == doctest::Approx(0.5));
  CHECK(sup_distance(g, g) == 0.0);
}

TEST_CASE("graph transform of a constant graph under a linear flow") {
  // Fibers of q = c move to q = e^{-g2 t} c.
  MatP a(1, 1);
  a << 1.0;
  VecM r(2);
  r << -1.0, -2.5;
  SplitSystem sys = SplitSystem::make(a, r);
  VecM c(2);
  c << 0.7, -0.4;
  GridSpec grid = GridSpec::cube(1, 3.0, 7);
  TransformResult tr = transform(sys, zero_nonlinearity(), GraphFn::constant(grid, c), 0.8);
  for (std::size_t i = 0; i < tr.graph.size(); ++i) {
    CHECK(std::abs(tr.graph.value(i)(0) - std::exp(-0.8) * c(0)) <= 1e-9);
    CHECK(std::abs(tr.graph.value(i)(1) - std::exp(-2.0) * c(1)) <= 1e-9);
  }
}

TEST_CASE("fiber solve lands on the target") {
  std::mt19937_64 rng(2);
  for (unsigned long long seed = 1; seed <= 3; ++seed) {
    Preset pr = preset_small_lipschitz(seed, 1.0, 1.0, 0.2, 0.5);
    GridSpec grid = GridSpec::cube(1, 4.0, 9);
    GraphFn sigma(grid, pr.sys.n_minus());
    Integrator integ(pr.sys, 0.005);
    for (int k = 0; k < 5; ++k) {
      VecP target = gen::vec_p(rng, 1, 3.0);
      FiberResult fr = fiber_solve(pr.sys, pr.f, sigma, 0.0, 1.0, target);
      State start(fr.p_pre, sigma(fr.p_pre));
      State end = integ.flow(pr.f, start, 0.0, 1.0);
      CHECK((end.p - target).norm() <= 1e-7);
      CHECK((end.q - fr.q).norm() <= 1e-7);
    }
  }
}

TEST_CASE("geometric rate fit recovers exact rates") {
  for (double rate : {0.3, 1.0, 2.2}) {
    std::vector<double> diffs;
    for (int k = 0; k < 10; ++k) diffs.push_back(std::exp(-rate * 0.5 * k));
    CHECK(fit_geometric_rate(diffs, 0.5) == doctest::Approx(rate).epsilon(1e-9));
  }
}

TEST_CASE("cone admissibility follows its defining inequalities") {
  DichotomyConstants d{1.0, 2.0, 1.0, 1.0};
  for (double l : {0.05, 0.2, 0.3, 0.6}) {
    for (double kappa : {0.5, 1.0, 2.0}) {
      ConeParameters c = ConeParameters::evaluate(d, l, kappa);
      CHECK(c.gt_admissible == (l < kappa / ((1 + kappa) * (1 + kappa)) * 2.0));
      CHECK(c.limit_admissible == (l * (1 + 1 / kappa) < 1.0));
    }
  }
}

TEST_CASE("cone invariance over seeded systems") {
  for (unsigned long long seed = 1; seed <= 3; ++seed) {
    Preset pr = preset_small_lipschitz(seed, 1.0, 1.0, 0.2, 0.5);
    auto pairs = sample_cone_pairs(pr.sys, 2.0, 4.0, 1.0, 300, seed);
    for (const auto& [u, v] : pairs) CHECK((u.q - v.q).norm() <= (u.p - v.p).norm() * (1.0 + 1e-12));
    CHECK(check_cone_invariance(pr.sys, pr.f, pairs, 1.0, 1.0) == 0);
  }
}

TEST_CASE("limit graph is invariant, in the cone and attracting") {
  Preset pr = preset_small_lipschitz(2, 1.0, 1.0, 0.2, 0.5);
  DichotomyConstants d = estimate_dichotomy(pr.sys);
  GridSpec grid = GridSpec::cube(1, 4.0, 17);
  GraphLimit gl = iterate_to_limit(pr.sys, pr.f, GraphFn(grid, pr.sys.n_minus()), 1.0, 1e-7);
  CHECK(gl.graph.kappa_hat() <= 1.0);
  TransformResult again = transform(pr.sys, pr.f, gl.graph, 1.0);
  // Interior nodes only: the clamp at the box edge perturbs the boundary.
  double worst = 0.0;
  for (std::size_t i = 0; i < gl.graph.size(); ++i)
    if (std::abs(gl.graph.node(i)(0)) <= 2.0)
      worst = std::max(worst, (again.graph.value(i) - gl.graph.value(i)).norm());
  CHECK(worst <= 1e-5);
  std::mt19937_64 rng(4);
  std::vector<State> samples;
  for (int k = 0; k < 10; ++k) samples.push_back(gen::state(rng, 1, pr.sys.n_minus(), 2.0));
  RateFit rf = attraction_rate(pr.sys, pr.f, gl.graph, samples, 2.0);
  ConeParameters cp = ConeParameters::evaluate(d, pr.f.lipschitz.constant, 1.0);
  CHECK(rf.rate >= 0.85 * cp.predicted_rate(d, pr.f.lipschitz.constant));
}

TEST_CASE("iterate_to_limit refuses inadmissible cones") {
  Preset pr = preset_small_lipschitz(1, 1.0, 1.0, 0.9, 0.5);
  LimitOptions lo;
  lo.transform.cone = ConeParameters::evaluate(estimate_dichotomy(pr.sys), 0.9, 1.0);
  CHECK_THROWS_AS(iterate_to_limit(pr.sys, pr.f, GraphFn(GridSpec::cube(1, 2.0, 5), pr.sys.n_minus()), 1.0,
                                   1e-6, lo),
                  ConfigError);
}
