#include "gen.hpp"

#include "growup/pullback.hpp"
#include "growup/presets.hpp"

#include <doctest.h>

using namespace growup;

namespace {

double q_star(double t) { return 0.5 * (std::sin(t) - std::cos(t)); }

}  // namespace

TEST_CASE("process law S(t, s) = S(t, tau) S(tau, s)") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (Preset pr : {preset_oscillating_b(), preset_sin_forced()}) {
    for (int k = 0; k < 10; ++k) {
      State x = gen::state(rng, pr.sys.n_plus(), pr.sys.n_minus(), 2.0);
      const double s = std::round(u(rng) * 100.0) / 100.0;
      CHECK(process_law_defect(pr.sys, pr.f, x, s, s + 0.5, s + 1.5, 0.005) <= 1e-9);
    }
  }
  CHECK_THROWS_AS(process_law_defect(preset_sin_forced().sys, preset_sin_forced().f, gen::planar(0, 0), 1.0, 0.0, 2.0),
                  ConfigError);
}

TEST_CASE("sin-forced sections recover the bounded solution") {
  Preset pr = preset_sin_forced();
  for (int k = 0; k < 6; ++k) {
    const double t = -2.0 + 1.3 * k;
    PullbackSection sec = pullback_section(pr.sys, pr.f, t, GridSpec::cube(1, 2.0, 5));
    CHECK(sec.converged);
    for (const auto& v : sec.graph.values()) CHECK(std::abs(v(0).real() - q_star(t)) <= 1e-4);
  }
}

TEST_CASE("Cauchy differences along the ladder decrease") {
  Preset pr = preset_oscillating_b();
  PullbackSection sec = pullback_section(pr.sys, pr.f, 0.3, GridSpec::cube(1, 3.0, 7));
  REQUIRE(sec.cauchy_diffs.size() >= 2);
  for (std::size_t k = 1; k < sec.cauchy_diffs.size(); ++k) CHECK(sec.cauchy_diffs[k] <= sec.cauchy_diffs[k - 1]);
  CHECK(sec.converged);
  CHECK(sec.graph.sup_norm() > 1e-3);
}

TEST_CASE("ladder beyond max_depth is a configuration error") {
  Preset pr = preset_sin_forced();
  PullbackOptions po;
  po.ladder = {100.0};
  CHECK_THROWS_AS(pullback_section(pr.sys, pr.f, 0.0, GridSpec::cube(1, 1.0, 3), po), ConfigError);
  po.ladder = {};
  CHECK_THROWS_AS(pullback_section(pr.sys, pr.f, 0.0, GridSpec::cube(1, 1.0, 3), po), ConfigError);
}

TEST_CASE("sections are invariant under the process") {
  Preset pr = preset_oscillating_b();
  GridSpec grid = GridSpec::cube(1, 3.0, 7);
  PullbackOptions po;
  po.tol = 1e-8;
  for (double s : {-1.0, 0.4}) {
    PullbackSection a = pullback_section(pr.sys, pr.f, s, grid, po);
    PullbackSection b = pullback_section(pr.sys, pr.f, s + 1.0, grid, po);
    CHECK(section_invariance_defect(pr.sys, pr.f, a.graph, s, b.graph, s + 1.0, po) <= 1e-6);
  }
}

TEST_CASE("autonomous systems give time-independent sections equal to the GT limit") {
  Preset pr = preset_small_lipschitz(2, 1.0, 1.0, 0.2, 0.5);
  GridSpec grid = GridSpec::cube(1, 4.0, 9);
  GraphLimit gl = iterate_to_limit(pr.sys, pr.f, GraphFn(grid, pr.sys.n_minus()), 1.0, 1e-7);
  for (double t : {0.0, 3.7}) {
    PullbackSection sec = pullback_section(pr.sys, pr.f, t, grid);
    CHECK(sup_distance(sec.graph, gl.graph) <= 1e-5);
  }
}

TEST_CASE("pullback omega universes") {
  Preset pr = preset_sin_forced();
  AbsorbingSetup setup = build_family(pr.sys, pr.f.c_f);
  SetFamily fam;
  fam.r_level = setup.family.r0;
  fam.sampler = [](double) { return std::vector<State>{gen::planar(0.0, -1.0), gen::planar(0.0, 1.0)}; };
  PullbackOptions po;
  po.ladder = {8.0, 16.0, 24.0};
  PullbackOmega om = pullback_omega(setup, pr.f, 0.0, fam, 1e-3, po);
  CHECK(hausdorff(om.cloud.points, {Eigen::Vector2d(0.0, q_star(0.0))}) <= 1e-3);
  // Images with p outside H_R violate the hat universe.
  fam.sampler = [&](double) { return std::vector<State>{gen::planar(setup.family.r1, 0.0)}; };
  CHECK_THROWS_AS(pullback_omega(setup, pr.f, 0.0, fam, 1e-3, po), ConfigError);
  fam.universe = SetFamily::Universe::Tilde;
  CHECK_THROWS_AS(pullback_omega(setup, pr.f, 0.0, fam, 1e-3, po), ConfigError);
}
