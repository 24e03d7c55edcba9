// One line per criterion: "[PASS] N name: detail" or "[FAIL] N name: detail".
// --only N runs a single criterion; the exit status is 0 iff all selected pass.

#include "growup/bounds_lab.hpp"
#include "growup/experiment.hpp"
#include "growup/infinity.hpp"
#include "growup/lyapunov_perron.hpp"
#include "growup/presets.hpp"
#include "growup/pullback.hpp"

#include <array>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace growup;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& x) {
    os_ << x;
    return *this;
  }
  std::string str() const { return os_.str(); }
  operator std::string() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double trunc3(double x) { return std::floor(x * 1000.0 + 1e-9) / 1000.0; }

const std::array<double, 3> kGammas{0.1, 1.0, 10.0};

// Seeded nonlinear systems with M = 1 and L_f at half the smaller threshold.
struct SeededSystem {
  Preset preset;
  DichotomyConstants dich;
  double l_f = 0.0;
};

std::vector<SeededSystem> seeded_systems() {
  const std::array<std::pair<double, double>, 5> ag{{{1.0, 1.0}, {1.5, 0.8}, {0.7, 1.2}, {2.0, 2.0}, {1.0, 0.6}}};
  std::vector<SeededSystem> out;
  for (unsigned long long seed = 1; seed <= 5; ++seed) {
    auto [a, g2] = ag[seed - 1];
    Preset probe = preset_small_lipschitz(seed, a, g2, 0.1, 0.5);
    DichotomyConstants d = estimate_dichotomy(probe.sys);
    const double l = 0.5 * std::min(gt_bound(d.gamma1, d.gamma2), lp_bound(d.gamma1, d.gamma2, 1.0).lp_value);
    out.push_back({preset_small_lipschitz(seed, a, g2, l, 0.5), d, l});
  }
  return out;
}

std::vector<State> sample_states(const SplitSystem& sys, unsigned long long seed, int count, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<State> out;
  for (int k = 0; k < count; ++k) {
    State s = sys.zero_state();
    for (int i = 0; i < sys.n_plus(); ++i) s.p(i) = u(rng);
    for (int j = 0; j < sys.n_minus(); ++j) s.q(j) = u(rng);
    out.push_back(s);
  }
  return out;
}

Outcome crit_gt_table() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::array<double, 9> expected{0.050, 0.090, 0.099, 0.275, 0.500, 0.909, 2.525, 2.750, 5.000};
  bool ok = true;
  Detail d;
  int idx = 0;
  for (double g2 : kGammas)
    for (double g1 : kGammas) {
      const double v = gt_bound(g1, g2);
      ok = ok && std::abs(trunc3(v) - expected[idx]) < 1e-12;
      d << fmt(trunc3(v)) << (idx < 8 ? " " : "");
      ++idx;
    }
  const double secs = seconds_since(t0);
  d << "; " << secs << " s";
  return {ok && secs < 1.0, d.str()};
}

Outcome crit_lp_table() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::array<double, 9> expected{0.044, 0.084, 0.098, 0.242, 0.441, 0.845, 2.228, 2.427, 4.413};
  Detail d;
  bool any = false;
  for (LPVariant v : {LPVariant::Full, LPVariant::FirstSecond}) {
    int idx = 0, hits = 0;
    double worst = 0.0;
    for (double g2 : kGammas)
      for (double g1 : kGammas) {
        const double rel = std::abs(lp_bound(g1, g2, 1.0, v).lp_value - expected[idx]) / expected[idx];
        worst = std::max(worst, rel);
        hits += rel <= 0.005;
        ++idx;
      }
    any = any || hits == 9;
    d << to_string(v) << " " << hits << "/9 within 0.5% (worst " << 100.0 * worst << "%); ";
  }
  const double secs = seconds_since(t0);
  d << secs << " s";
  return {any && secs < 30.0, d.str()};
}

Outcome crit_remark_table() {
  const std::array<double, 3> ms{1.0, 2.0, 4.0}, ours{4.829, 14.247, 45.613}, comp{5.829, 16.0, 56.0};
  bool ok = true;
  Detail d;
  for (int i = 0; i < 3; ++i) {
    SimplifiedBound b = lp_bound_simplified(ms[i]);
    ok = ok && std::abs(b.ours - ours[i]) <= 1e-2 && std::abs(b.comparator - comp[i]) <= 1e-2;
    d << "M=" << ms[i] << ": " << b.ours << " / " << b.comparator << "; ";
  }
  const double ratio = lp_bound_simplified(100.0).ours / (2.0 * 100.0 * 100.0);
  const double sharp = lp_bound_sharp_m1();
  ok = ok && std::abs(ratio - 1.0) <= 0.05 && std::abs(sharp - 4.5) <= 1e-2;
  d << "M=100 ratio to 2M^2 " << ratio << "; sharp M=1 " << sharp;
  return {ok, d.str()};
}

Outcome crit_lyapunov() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> re(0.05, 4.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 6;
    Eigen::MatrixXd q(n, n), t = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = normal(rng);
    q += n * Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      t(i, i) = re(rng);
      for (int j = i + 1; j < n; ++j) t(i, j) = normal(rng);
    }
    // Complex pairs as 2x2 rotation-scaling blocks.
    for (int i = 0; i + 1 < n; i += 3) {
      t(i + 1, i) = -std::abs(normal(rng)) - 0.1;
      t(i + 1, i + 1) = t(i, i);
      t(i, i + 1) = -t(i + 1, i);
    }
    SplitSystem sys = SplitSystem::make(MatP(q * t * q.inverse()), VecM::Constant(1, cplx(-1.0)));
    worst = std::max(worst, solve_lyapunov(sys).residual);
  }
  return {worst <= 1e-10, Detail() << "worst residual " << worst << " over 100 matrices, dims 1-6"};
}

Outcome crit_linear_exactness() {
  Detail d;
  // Closed form: A = V diag(1, 2) V^{-1}, contracting rates -1 and -0.5 +- 2i.
  Eigen::Matrix2d v;
  v << 1.0, 1.0, 0.0, 1.0;
  Eigen::Matrix2d lam = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  MatP a(v * lam * v.inverse());
  VecM r(3);
  r << cplx(-1.0), cplx(-0.5, 2.0), cplx(-0.5, -2.0);
  SplitSystem sys = SplitSystem::make(a, r);
  State u0 = sys.zero_state();
  u0.p << 0.3, -0.7;
  u0.q << cplx(1.0), cplx(0.5, 0.2), cplx(0.5, -0.2);
  Trajectory tr = integrate(sys, zero_nonlinearity(), u0, 0.0, 5.0, 0.01);
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double t = tr.times[k];
    Eigen::Vector2d e(std::exp(t), std::exp(2.0 * t));
    Eigen::Vector2d p = v * e.asDiagonal() * v.inverse() * Eigen::Vector2d(u0.p);
    worst = std::max(worst, (Eigen::Vector2d(tr.states[k].p) - p).norm() / p.norm());
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(tr.states[k].q(j) - std::exp(r(j) * t) * u0.q(j)));
  }
  d << "flow error " << worst;
  const GridSpec grid = GridSpec::cube(2, 3.0, 7);
  GraphLimit gl = iterate_to_limit(sys, zero_nonlinearity(), GraphFn::constant(grid, VecM::Constant(3, cplx(0.5))),
                                   1.0, 1e-10);
  LPConfig lc;
  lc.grid = grid;
  lc.tol = 1e-10;
  LPResult lr = lp_fixed_point(sys, zero_nonlinearity(), estimate_dichotomy(sys), 0.0, lc);
  d << "; GT sup " << gl.graph.sup_norm() << "; LP sup " << lr.graph.sup_norm();
  return {worst <= 1e-10 && gl.graph.sup_norm() <= 1e-8 && lr.graph.sup_norm() <= 1e-8, d.str()};
}

Outcome crit_examples_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  RunContext ctx;
  ctx.out = std::filesystem::temp_directory_path() / "growup_acceptance_examples";
  ctx.reproducible = true;
  CheckLog log = run_examples(ctx);
  const double secs = seconds_since(t0);
  Detail d;
  d << log.checks().size() - log.failures() << "/" << log.checks().size() << " facts; " << secs << " s";
  for (const auto& c : log.checks())
    if (!c.passed) d << "; failed: " << c.name << " (" << c.detail << ")";
  return {log.ok() && secs < 120.0, d.str()};
}

Outcome crit_cross_method() {
  Detail d;
  bool ok = true;
  const double tol_gt = 1e-6, tol_lp = 1e-4;
  for (const auto& s : seeded_systems()) {
    const GridSpec grid = GridSpec::cube(1, 4.0, 17);
    GraphLimit gl = iterate_to_limit(s.preset.sys, s.preset.f, GraphFn(grid, s.preset.sys.n_minus()), 1.0, tol_gt);
    LPConfig lc;
    lc.grid = grid;
    lc.tol = tol_lp;
    LPResult lr = lp_fixed_point(s.preset.sys, s.preset.f, s.dich, s.l_f, lc);
    const double dist = sup_distance(gl.graph, lr.graph);
    ok = ok && s.dich.m <= 1.0 + 1e-6 && dist <= std::max(10.0 * tol_gt, 10.0 * tol_lp);
    d << dist << " ";
  }
  return {ok, d.str()};
}

Outcome crit_cone_invariance() {
  Detail d;
  bool ok = true;
  unsigned long long seed = 100;
  for (const auto& s : seeded_systems()) {
    auto pairs = sample_cone_pairs(s.preset.sys, 2.0, 4.0, 1.0, 10000, ++seed);
    const std::size_t bad = check_cone_invariance(s.preset.sys, s.preset.f, pairs, 1.0, 1.0);
    ok = ok && bad == 0;
    d << bad << " ";
  }
  d << "violations over 10^4 pairs each";
  return {ok, d.str()};
}

Outcome crit_attraction_rates() {
  Detail d;
  bool ok = true;
  unsigned long long seed = 200;
  for (const auto& s : seeded_systems()) {
    const auto& pr = s.preset;
    const GridSpec grid = GridSpec::cube(1, 4.0, 17);
    GraphLimit gl = iterate_to_limit(pr.sys, pr.f, GraphFn(grid, pr.sys.n_minus()), 1.0, 1e-7);
    std::vector<State> samples = sample_states(pr.sys, ++seed, 20, 2.0);
    RateFit gt = attraction_rate(pr.sys, pr.f, gl.graph, samples, 2.0);
    const double gt_pred = ConeParameters::evaluate(s.dich, s.l_f, 1.0).predicted_rate(s.dich, s.l_f);
    LPConfig lc;
    lc.grid = grid;
    LPResult lr = lp_fixed_point(pr.sys, pr.f, s.dich, s.l_f, lc);
    RateFit lp = lp_attraction_rate(pr.sys, pr.f, lr, samples, 2.0);
    const double lp_pred = lp_predicted_rate(s.dich, s.l_f, lc.kappa);
    ok = ok && gt.rate >= 0.85 * gt_pred && lp.rate >= 0.85 * lp_pred;
    d << "GT " << gt.rate << "/" << gt_pred << ", LP " << lp.rate << "/" << lp_pred << "; ";
  }
  return {ok, d.str()};
}

Outcome crit_thickness() {
  Detail d;
  bool ok = true;
  const std::array<std::array<double, 3>, 2> cases{{{2.0, 1.0, 3.0}, {2.0, 1.0, 0.5}}};
  for (const auto& g : cases) {
    Preset pr = preset_power_decay(g[0], g[1], g[2], 1.0, 1.0, 1.0);
    DichotomyConstants dich = estimate_dichotomy(pr.sys);
    AbsorbingSetup setup = build_family(pr.sys, pr.f.c_f);
    RingOptions ro;
    ro.ring_radius = setup.family.r1;
    ro.q_height = setup.strip.d2_level;
    ro.fiber.dt = 0.01;
    ThicknessFit fit = measure_thickness(sample_ring_fibers(pr.sys, pr.f, {1e2, 1e3, 1e4, 1e5, 1e6}, ro));
    const double beta = decay_exponent(dich.gamma0, dich.gamma1, dich.gamma2, *pr.f.decay).beta;
    const bool pass = std::abs(fit.slope + beta) <= 0.15 * beta;
    ok = ok && pass;
    d << "(" << g[0] << "," << g[1] << "," << g[2] << "): slope " << fit.slope << " vs " << -beta
      << (pass ? " ok" : " off") << "; ";
  }
  return {ok, d.str()};
}

Outcome crit_cutoff_lemma() {
  Detail d;
  bool ok = true;
  unsigned long long seed = 300;
  for (const auto& s : seeded_systems()) {
    const double r_cut = default_cutoff_radius(s.preset.f.c_f, s.l_f);
    NonlinearityModel fc = cutoff(s.preset.f, r_cut);
    AbsorbingSetup setup = build_family(s.preset.sys, s.preset.f.c_f);
    auto pairs = sample_strip_pairs(s.preset.sys, 2.0 * r_cut, setup.strip.d2_level, 10000, ++seed);
    const double ratio = max_lipschitz_ratio(fc, pairs);
    ok = ok && ratio <= 5.0 * s.l_f;
    d << ratio / s.l_f << " ";
  }
  d << "(ratio / L_f)";
  return {ok, d.str()};
}

Outcome crit_infinity() {
  Detail d;
  Preset pr = preset_infinity_demo(0.5, 1);
  DichotomyConstants dich = estimate_dichotomy(pr.sys);
  AbsorbingSetup setup = build_family(pr.sys, pr.f.c_f);
  State c = pr.sys.zero_state();
  c.p << 3.0, 2.5;
  PointCloud cloud = omega_infty(setup, pr.f, ball_samples(c, 0.5, 0.25), 8.0, 1e-3);
  const double dist =
      one_sided_distance(cloud.points, {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-1.0, 0.0)});
  Trajectory slow = integrate(pr.sys, pr.f, slowest_start(pr.sys, pr.f, 5.0), 0.0, 8.0, 0.001);
  SpherePath sp = sphere_flow(pr.sys, pr.f, slow, dich);
  const double rate = fit_decay_exponent(sp.times, sp.g_norms, 4.0);
  CoverageWitness w = sphere_coverage(pr.sys, pr.f, setup.family.r1, {0.5, 1.0, 2.0}, 1e-2);
  d << "omega distance " << dist << "; g exponent " << rate << " vs gamma1 " << dich.gamma1 << "; coverage "
    << (w.ok ? "ok" : "failed");
  const bool ok = !cloud.empty() && dist <= 1e-3 && std::abs(rate - dich.gamma1) <= 0.1 * dich.gamma1 && w.ok;
  return {ok, d.str()};
}

Outcome crit_pullback() {
  Detail d;
  const double tol = 1e-6;
  PullbackOptions po;
  po.tol = tol;
  double worst_auto = 0.0;
  for (unsigned long long seed : {1ull, 2ull, 3ull}) {
    Preset pr = preset_small_lipschitz(seed, 1.0, 1.0, 0.2, 0.5);
    const GridSpec grid = GridSpec::cube(1, 4.0, 9);
    GraphLimit gl = iterate_to_limit(pr.sys, pr.f, GraphFn(grid, pr.sys.n_minus()), 1.0, tol);
    for (double t : {0.0, 2.5}) {
      PullbackSection sec = pullback_section(pr.sys, pr.f, t, grid, po);
      worst_auto = std::max(worst_auto, sup_distance(sec.graph, gl.graph));
    }
  }
  Preset sf = preset_sin_forced();
  double worst_sin = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double t = -3.0 + 0.77 * k;
    PullbackSection sec = pullback_section(sf.sys, sf.f, t, GridSpec::cube(1, 2.0, 5), po);
    for (const auto& v : sec.graph.values())
      worst_sin = std::max(worst_sin, std::abs(v(0).real() - 0.5 * (std::sin(t) - std::cos(t))));
  }
  d << "autonomous " << worst_auto << " (limit " << 10.0 * tol << "); sin-forced " << worst_sin;
  return {worst_auto <= 10.0 * tol && worst_sin <= 1e-4, d.str()};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome crit_determinism() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "growup_acceptance_determinism";
  fs::remove_all(base);
  const std::array<fs::path, 2> dirs{base / "a", base / "b"};
  const std::array<int, 2> workers{1, 3};
  for (int i = 0; i < 2; ++i) {
    const std::string cmd = std::string("\"") + GROWUP_CLI + "\" selftest --reproducible --seed 7 --workers " +
                            std::to_string(workers[i]) + " --out \"" + dirs[i].string() + "\" > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) return {false, Detail() << "selftest exited with status " << rc};
  }
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = dirs[1] / fs::relative(e.path(), dirs[0]);
    if (!fs::exists(other) || read_file(e.path()) != read_file(other)) ++differing;
  }
  std::size_t files_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(dirs[1])) files_b += e.is_regular_file();
  return {files > 0 && differing == 0 && files == files_b,
          Detail() << files << " artifacts, " << differing << " differ (workers 1 vs 3)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "GT threshold table", crit_gt_table},
      {2, "LP threshold table", crit_lp_table},
      {3, "remark table", crit_remark_table},
      {4, "Lyapunov certificate", crit_lyapunov},
      {5, "linear exactness", crit_linear_exactness},
      {6, "examples suite", crit_examples_suite},
      {7, "cross-method oracle", crit_cross_method},
      {8, "cone invariance", crit_cone_invariance},
      {9, "attraction rates", crit_attraction_rates},
      {10, "thickness decay", crit_thickness},
      {11, "cutoff lemma", crit_cutoff_lemma},
      {12, "infinity dynamics", crit_infinity},
      {13, "pullback consistency", crit_pullback},
      {14, "determinism", crit_determinism},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 2;
    }
  }
  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.passed;
    std::cout << (o.passed ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << o.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
