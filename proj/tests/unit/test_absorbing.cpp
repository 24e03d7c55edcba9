#include "gen.hpp"

#include "growup/absorbing.hpp"
#include "growup/presets.hpp"

#include <doctest.h>

using namespace growup;

namespace {

std::vector<Eigen::VectorXd> random_cloud(std::mt19937_64& rng, int n, int dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = u(rng);
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("strip levels are D1 = M C_f / gamma2 + 1 and D2 = M D1") {
  for (unsigned long long seed = 1; seed <= 3; ++seed) {
    Preset pr = preset_small_lipschitz(seed, 1.0, 1.0, 0.2, 0.5);
    AbsorbingSetup s = build_family(pr.sys, pr.f.c_f);
    CHECK(s.strip.d1_level == doctest::Approx(s.dich.m * 0.5 / s.dich.gamma2 + 1.0));
    CHECK(s.strip.d2_level == doctest::Approx(s.dich.m * s.strip.d1_level));
    CHECK(s.family.r1 >= s.family.r0);
  }
}

TEST_CASE("the strip absorbs every orbit by the envelope time bound") {
  std::mt19937_64 rng(2);
  Preset pr = preset_small_lipschitz(4, 1.0, 1.0, 0.2, 0.5);
  AbsorbingSetup s = build_family(pr.sys, pr.f.c_f);
  for (int k = 0; k < 20; ++k) {
    State u = gen::state(rng, 1, pr.sys.n_minus(), 8.0);
    const double t = absorption_time_bound(s, u.q.norm());
    State v = Integrator(pr.sys, 0.005).flow(pr.f, u, 0.0, std::max(t, 0.01));
    CHECK(s.strip.in_inner(v));
  }
}

TEST_CASE("the quadratic form increases outside H_r0") {
  std::mt19937_64 rng(3);
  for (unsigned long long seed = 1; seed <= 3; ++seed) {
    Preset pr = preset_small_lipschitz(seed, 1.0, 1.0, 0.2, 0.5);
    AbsorbingSetup s = build_family(pr.sys, pr.f.c_f);
    std::vector<State> starts;
    for (int k = 0; k < 10; ++k) {
      State u = gen::state(rng, 1, pr.sys.n_minus(), s.strip.d1_level / 2.0);
      u.p(0) = (k % 2 ? 1.0 : -1.0) * (s.family.r1 + 1.0);
      starts.push_back(u);
    }
    MonotonicityWitness w = expanding_witness(s, pr.f, starts, 3.0);
    CHECK(w.checks > 0);
    CHECK(w.violations == 0);
  }
}

TEST_CASE("classification of ex1 balls") {
  Preset pr = preset_ex1();
  AbsorbingSetup s = build_family(pr.sys, 0.0);
  ClassifyOptions co;
  SetClassification far = classify(s, pr.f, ball_samples(gen::planar(5.0, 0.0), 0.5, 0.25), 10.0, s.family.r0, co);
  CHECK(far.verdict == Verdict::Escaping);
  SetClassification axis = classify(s, pr.f, segment_samples(gen::planar(0.0, -1.0), gen::planar(0.0, 1.0), 11),
                                    10.0, s.family.r0, co);
  CHECK(axis.verdict == Verdict::Captured);
  SetClassification mixed = classify(s, pr.f, segment_samples(gen::planar(-0.5, 0.0), gen::planar(0.5, 0.0), 11),
                                     10.0, s.family.r0, co);
  CHECK(mixed.verdict == Verdict::Straddling);
}

TEST_CASE("omega-limit of a vertical ex1 segment is the origin") {
  Preset pr = preset_ex1();
  SampledSet seg = segment_samples(gen::planar(0.0, -2.0), gen::planar(0.0, 2.0), 41);
  PointCloud om = omega_limit(pr.sys, pr.f, seg, 25.0, {20.0, 25.0}, 1e-3);
  CHECK(om.clusters == 1);
  CHECK(hausdorff(om.points, {Eigen::Vector2d(0.0, 0.0)}) <= 1e-3);
}

TEST_CASE("Hausdorff distance is a symmetric metric on clouds") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = random_cloud(rng, 20, 3), b = random_cloud(rng, 15, 3), c = random_cloud(rng, 10, 3);
    CHECK(hausdorff(a, a) == 0.0);
    CHECK(hausdorff(a, b) == doctest::Approx(hausdorff(b, a)));
    CHECK(hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12);
    CHECK(one_sided_distance(a, b) <= hausdorff(a, b));
  }
}

TEST_CASE("clustering stays within eps of the raw cloud") {
  std::mt19937_64 rng(10);
  for (double eps : {0.05, 0.2, 0.5}) {
    auto raw = random_cloud(rng, 200, 2);
    PointCloud c = cluster_points(raw, eps);
    CHECK(c.points.size() <= raw.size());
    CHECK(hausdorff(c.points, raw) <= eps);
    CHECK(c.cluster.size() == c.points.size());
    CHECK(c.clusters >= 1);
  }
  PointCloud two = cluster_points({Eigen::Vector2d(0, 0), Eigen::Vector2d(0.01, 0), Eigen::Vector2d(5, 5)}, 0.1);
  CHECK(two.clusters == 2);
}

TEST_CASE("push_forward on ex1 moves points along the flow") {
  Preset pr = preset_ex1();
  PointCloud c = cluster_points({Eigen::Vector2d(1.0, 1.0)}, 1e-3);
  PointCloud moved = push_forward(pr.sys, pr.f, c, 1.0, 1e-3);
  REQUIRE(moved.points.size() == 1);
  CHECK(moved.points[0](0) == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  CHECK(moved.points[0](1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
}
