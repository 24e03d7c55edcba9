#include "growup/experiment.hpp"

#include "growup/absorbing.hpp"
#include "growup/bounds_lab.hpp"
#include "growup/graph_transform.hpp"
#include "growup/infinity.hpp"
#include "growup/lyapunov_perron.hpp"
#include "growup/parallel.hpp"
#include "growup/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

namespace growup {

// ---------------------------------------------------------------- checks

void CheckLog::add(const std::string& name, bool passed, const std::string& detail) {
  checks_.push_back({name, passed, detail});
  log_info(std::string(passed ? "[pass] " : "[FAIL] ") + name + (detail.empty() ? "" : ": " + detail));
}

std::size_t CheckLog::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks_.begin(), checks_.end(), [](const Check& c) { return !c.passed; }));
}

json CheckLog::to_json() const {
  json arr = json::array();
  for (const auto& c : checks_) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return arr;
}

void CheckLog::append(const CheckLog& other) {
  checks_.insert(checks_.end(), other.checks_.begin(), other.checks_.end());
}

int finish_run(const std::string& command, const CheckLog& log, const RunContext& ctx) {
  json report = {{"command", command},
                 {"seed", ctx.seed},
                 {"checks", log.to_json()},
                 {"failed", log.failures()},
                 {"passed", log.checks().size() - log.failures()}};
  write_json(ctx.out / "report.json", report);
  if (!log.ok()) {
    json failures = json::array();
    for (const auto& c : log.checks())
      if (!c.passed) failures.push_back({{"name", c.name}, {"detail", c.detail}});
    std::cerr << json({{"command", command}, {"failures", failures}}).dump() << '\n';
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------- config

namespace {

double num(const json& sec, const char* key, double def) {
  if (!sec.contains(key)) return def;
  if (!sec.at(key).is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return sec.at(key).get<double>();
}

int inum(const json& sec, const char* key, int def) {
  if (!sec.contains(key)) return def;
  if (!sec.at(key).is_number_integer()) throw ConfigError(std::string("config: '") + key + "' must be an integer");
  return sec.at(key).get<int>();
}

std::string str(const json& sec, const char* key, const std::string& def) {
  if (!sec.contains(key)) return def;
  if (!sec.at(key).is_string()) throw ConfigError(std::string("config: '") + key + "' must be a string");
  return sec.at(key).get<std::string>();
}

std::vector<double> nums(const json& sec, const char* key, std::vector<double> def) {
  if (!sec.contains(key)) return def;
  const json& a = sec.at(key);
  if (!a.is_array()) throw ConfigError(std::string("config: '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : a) {
    if (!x.is_number()) throw ConfigError(std::string("config: '") + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::string fmt_short(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  require_keys(j, {"preset", "system", "nonlinearity", "seed", "workers", "simulate", "classify",
                   "attractor", "lp", "bounds", "thickness", "infinity", "pullback"},
               "config");
  ExperimentConfig c;
  c.preset = str(j, "preset", c.preset);
  if (j.contains("system")) {
    const json& s = j.at("system");
    if (s.is_string()) {
      std::filesystem::path p = s.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      c.system = parse_system(read_json_file(p));
    } else {
      c.system = parse_system(s);
    }
  }
  if (j.contains("nonlinearity")) {
    const json& n = j.at("nonlinearity");
    require_keys(n, {"l_f", "c_f"}, "nonlinearity");
    c.l_f = num(n, "l_f", c.l_f);
    c.c_f = num(n, "c_f", c.c_f);
  }
  if (j.contains("seed")) c.seed = j.at("seed").get<unsigned long long>();
  if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  auto section = [&](const char* key, json& dst, std::initializer_list<const char*> allowed) {
    if (!j.contains(key)) return;
    require_keys(j.at(key), allowed, key);
    dst = j.at(key);
  };
  section("simulate", c.simulate, {"u0", "t0", "t1", "dt", "richardson", "envelope", "store_every"});
  section("classify", c.classify, {"center", "radius", "step", "horizon", "r_level", "dt", "probe_dt"});
  section("attractor", c.attractor, {"radius", "count", "t_step", "tol", "kappa", "max_rounds", "dt"});
  section("lp", c.lp, {"radius", "count", "kappa", "tol", "dt", "t_inf", "max_iter"});
  section("bounds", c.bounds, {"workers"});
  section("thickness", c.thickness,
          {"g0", "g1", "g2", "alpha", "d", "k", "shells", "directions", "q_levels", "dt"});
  section("infinity", c.infinity,
          {"c", "seed", "center", "radius", "step", "horizon", "merge_eps", "dt", "coverage_times",
           "resolution", "rho"});
  section("pullback", c.pullback,
          {"t", "ladder", "example", "radius", "count", "tol", "merge_eps", "max_depth", "seed"});
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path), path.parent_path());
}

Preset ExperimentConfig::build() const {
  if (!system) return preset_by_name(preset);
  if (preset == "zero") return {"zero", *system, zero_nonlinearity()};
  static const std::string sr = "saturated_random(";
  if (preset.rfind(sr, 0) == 0 && preset.back() == ')') {
    unsigned long long s = std::stoull(preset.substr(sr.size(), preset.size() - sr.size() - 1));
    return {preset, *system, saturated_random(*system, s, l_f, c_f)};
  }
  throw ConfigError("config: an explicit system needs preset 'zero' or 'saturated_random(<seed>)'");
}

// ---------------------------------------------------------------- subcommands

CheckLog run_simulate(const ExperimentConfig& cfg, const RunContext& ctx) {
  Preset pr = cfg.build();
  const json& s = cfg.simulate;
  const int np = pr.sys.n_plus(), nm = pr.sys.n_minus();
  State u0 = State::zero(np, nm);
  u0.p.setOnes();
  if (s.contains("u0")) u0 = parse_state(s.at("u0"), np, nm);
  const double t0 = num(s, "t0", 0.0), t1 = num(s, "t1", 5.0), dt = num(s, "dt", 0.005);
  IntegrateOptions opts;
  opts.richardson = s.value("richardson", false);
  opts.store_every = static_cast<std::size_t>(inum(s, "store_every", 1));
  const bool envelope = s.value("envelope", true) && std::isfinite(pr.f.c_f) && pr.sys.hyperbolic();
  if (envelope) opts.envelope = EnvelopeCheck{estimate_dichotomy(pr.sys), pr.f.c_f};
  CheckLog log;
  log.guarded("integrate", [&] {
    Trajectory tr = integrate(pr.sys, pr.f, u0, t0, t1, dt, opts);
    write_trajectory_csv(ctx.out / "trajectory.csv", tr, pr.sys.has_complex_rates(), ctx.reproducible);
    log.add("integrate", true, std::to_string(tr.size()) + " samples" + (envelope ? ", envelopes checked" : ""));
    if (opts.richardson)
      log.add("richardson", !tr.richardson_flag, "half-step gap " + fmt_short(tr.richardson_gap));
  });
  return log;
}

CheckLog run_classify(const ExperimentConfig& cfg, const RunContext& ctx) {
  Preset pr = cfg.build();
  const json& s = cfg.classify;
  AbsorbingSetup setup = build_family(pr.sys, pr.f.c_f);
  State center = pr.sys.zero_state();
  if (s.contains("center")) center = parse_state(s.at("center"), pr.sys.n_plus(), pr.sys.n_minus());
  const double radius = num(s, "radius", 0.5), step = num(s, "step", 0.25);
  const double horizon = num(s, "horizon", 10.0);
  double r_level = num(s, "r_level", 0.0);
  if (r_level <= 0.0) r_level = setup.family.r0;
  ClassifyOptions co;
  co.dt = num(s, "dt", 0.005);
  co.probe_dt = num(s, "probe_dt", 0.1);
  co.workers = ctx.workers;
  CheckLog log;
  log.guarded("classify", [&] {
    SampledSet set = ball_samples(center, radius, step);
    SetClassification c = classify(setup, pr.f, set, horizon, r_level, co);
    write_json(ctx.out / "classification.json",
               {{"verdict", to_string(c.verdict)},
                {"witness_time", c.witness_time},
                {"r_level", c.r_level},
                {"samples", c.samples},
                {"in_h", c.in_h},
                {"out_h", c.out_h},
                {"r0", setup.family.r0},
                {"r1", setup.family.r1},
                {"d1_level", setup.strip.d1_level},
                {"d2_level", setup.strip.d2_level}});
    log.add("classify", true, to_string(c.verdict) + " from t = " + fmt_short(c.witness_time));
  });
  return log;
}

namespace {

void write_graph(const std::filesystem::path& dir, const std::string& stem, const GraphFn& g,
                 bool complex_q, bool reproducible) {
  write_graph_csv(dir / (stem + ".csv"), g, complex_q, reproducible);
  write_json(dir / (stem + ".json"), graph_to_json(g));
}

}  // namespace

CheckLog run_attractor_gt(const ExperimentConfig& cfg, const RunContext& ctx) {
  Preset pr = cfg.build();
  const json& s = cfg.attractor;
  GridSpec grid = GridSpec::cube(pr.sys.n_plus(), num(s, "radius", 4.0), inum(s, "count", 17));
  DichotomyConstants dich = estimate_dichotomy(pr.sys);
  const double kappa = num(s, "kappa", 1.0);
  LimitOptions lo;
  lo.transform.cone = ConeParameters::evaluate(dich, pr.f.lipschitz.constant, kappa);
  lo.transform.workers = ctx.workers;
  lo.transform.fiber.dt = num(s, "dt", 0.005);
  lo.max_rounds = inum(s, "max_rounds", 200);
  CheckLog log;
  log.guarded("graph transform limit", [&] {
    GraphLimit gl = iterate_to_limit(pr.sys, pr.f, GraphFn(grid, pr.sys.n_minus()),
                                     num(s, "t_step", 1.0), num(s, "tol", 1e-6), lo);
    write_graph(ctx.out, "gt_graph", gl.graph, pr.sys.has_complex_rates(), ctx.reproducible);
    CsvTable t({"round", "sup_diff", "kappa_hat"});
    for (std::size_t k = 0; k < gl.sup_diffs.size(); ++k)
      t.row({static_cast<double>(k + 1), gl.sup_diffs[k], gl.kappa_hats[k]});
    t.save(ctx.out / "gt_log.csv", ctx.reproducible);
    log.add("graph transform limit", true,
            std::to_string(gl.rounds) + " rounds, rate " + fmt_short(gl.rate));
    const double kh = gl.kappa_hats.empty() ? 0.0 : gl.kappa_hats.back();
    log.add("limit graph in the cone", kh <= kappa * (1.0 + 1e-6), "kappa_hat " + fmt_short(kh));
    log.add("cone condition admissible", !gl.admissibility_warning,
            "L_f " + fmt_short(pr.f.lipschitz.constant) + ", kappa " + fmt_short(kappa));
  });
  return log;
}

CheckLog run_attractor_lp(const ExperimentConfig& cfg, const RunContext& ctx) {
  Preset pr = cfg.build();
  const json& s = cfg.lp;
  DichotomyConstants dich = estimate_dichotomy(pr.sys);
  LPConfig lc;
  lc.kappa = num(s, "kappa", 1.0);
  lc.tol = num(s, "tol", 1e-4);
  lc.dt = num(s, "dt", 0.005);
  lc.t_inf = num(s, "t_inf", 0.0);
  lc.max_iter = inum(s, "max_iter", 200);
  lc.workers = ctx.workers;
  lc.grid = GridSpec::cube(pr.sys.n_plus(), num(s, "radius", 4.0), inum(s, "count", 17));
  CheckLog log;
  log.guarded("Lyapunov-Perron fixed point", [&] {
    LPResult r = lp_fixed_point(pr.sys, pr.f, dich, pr.f.lipschitz.constant, lc);
    write_graph(ctx.out, "lp_graph", r.graph, pr.sys.has_complex_rates(), ctx.reproducible);
    CsvTable t({"iteration", "sup_diff", "lb_diff", "ratio", "kappa_hat", "sup_norm"});
    for (const auto& row : r.log)
      t.row({static_cast<double>(row.iteration), row.sup_diff, row.lb_diff, row.ratio, row.kappa_hat,
             row.sup_norm});
    t.save(ctx.out / "lp_log.csv", ctx.reproducible);
    log.add("Lyapunov-Perron fixed point", true,
            std::to_string(r.iterations) + " iterations, ratio " + fmt_short(r.contraction));
    log.add("iterates stay in LB(kappa)", r.membership_ok);
    log.add("contraction ratio within 25% of the second constraint",
            r.contraction <= 1.25 * r.constraints.second_lhs,
            fmt_short(r.contraction) + " vs " + fmt_short(r.constraints.second_lhs));
  });
  return log;
}

CheckLog run_bounds_table(const ExperimentConfig& cfg, const RunContext& ctx) {
  const int workers = inum(cfg.bounds, "workers", ctx.workers);
  CheckLog log;
  std::vector<ThresholdRow> rows = threshold_table(workers);
  CsvTable t({"gamma1", "gamma2", "lp_full", "lp_first_second", "gt"});
  bool ordered = true, variational = true;
  for (const auto& r : rows) {
    t.row({r.gamma1, r.gamma2, r.lp_full, r.lp_first_second, r.gt});
    ordered = ordered && r.lp_full <= r.gt;
    variational = variational && std::abs(gt_variational(r.gamma1, r.gamma2) - r.gt) <= 1e-6;
  }
  t.save(ctx.out / "threshold_table.csv", ctx.reproducible);
  std::cout << t.str(true) << '\n';
  CsvTable rt({"m", "comparator", "ours", "gt", "sharp"});
  for (const auto& r : remark_table()) {
    // GT and sharp values exist only for M = 1.
    const bool m1 = r.m == 1.0;
    rt.row(std::vector<std::string>{fmt(r.m), fmt(r.comparator), fmt(r.ours), m1 ? fmt(r.gt) : "",
                                    m1 ? fmt(r.sharp) : ""});
  }
  rt.save(ctx.out / "remark_table.csv", ctx.reproducible);
  std::cout << rt.str(true) << '\n';
  const double sharp = lp_bound_sharp_m1();
  write_json(ctx.out / "bounds_summary.json",
             {{"lp_sharp_m1", sharp}, {"large_m_ratio_100", lp_bound_simplified(100.0).ours / 2e4}});
  std::cout << "lp_sharp_m1," << fmt(sharp) << '\n';
  log.add("LP threshold below GT threshold at M = 1", ordered);
  log.add("GT closed form equals its variational form", variational);
  log.add("sharp M = 1 ratio between GT and simplified LP", sharp > 4.0 && sharp < lp_bound_simplified(1.0).ours,
          fmt_short(sharp));
  return log;
}

CheckLog run_thickness(const ExperimentConfig& cfg, const RunContext& ctx) {
  const json& s = cfg.thickness;
  Preset pr = preset_power_decay(num(s, "g0", 2.0), num(s, "g1", 1.0), num(s, "g2", 3.0),
                                 num(s, "alpha", 1.0), num(s, "d", 1.0), num(s, "k", 1.0));
  DichotomyConstants dich = estimate_dichotomy(pr.sys);
  AbsorbingSetup setup = build_family(pr.sys, pr.f.c_f);
  RingOptions ro;
  ro.ring_radius = setup.family.r1;
  ro.q_height = setup.strip.d2_level;
  ro.directions = inum(s, "directions", 8);
  ro.q_levels = inum(s, "q_levels", 5);
  ro.fiber.dt = num(s, "dt", 0.01);
  ro.workers = ctx.workers;
  std::vector<double> shells = nums(s, "shells", {1e2, 1e3, 1e4, 1e5, 1e6});
  CheckLog log;
  log.guarded("thickness decay", [&] {
    ThicknessFit fit = measure_thickness(sample_ring_fibers(pr.sys, pr.f, shells, ro));
    DecayPrediction pred = decay_exponent(dich.gamma0, dich.gamma1, dich.gamma2, *pr.f.decay);
    CsvTable t({"r", "diameter", "fibers"});
    for (const auto& sh : fit.shells) t.row({sh.r, sh.diameter, static_cast<double>(sh.fibers)});
    t.save(ctx.out / "thickness.csv", ctx.reproducible);
    write_json(ctx.out / "thickness.json", {{"slope", fit.slope},
                                            {"predicted_beta", pred.beta},
                                            {"equality_case", pred.equality},
                                            {"ring_radius", ro.ring_radius},
                                            {"q_height", ro.q_height}});
    const double rel = std::abs(fit.slope + pred.beta) / pred.beta;
    log.add("thickness slope within 15% of -beta", rel <= 0.15,
            "slope " + fmt_short(fit.slope) + ", -beta " + fmt_short(-pred.beta));
  });
  return log;
}

CheckLog run_infinity(const ExperimentConfig& cfg, const RunContext& ctx) {
  const json& s = cfg.infinity;
  const double c = num(s, "c", 0.5);
  Preset pr = preset_infinity_demo(c, static_cast<unsigned long long>(inum(s, "seed", 1)));
  DichotomyConstants dich = estimate_dichotomy(pr.sys);
  AbsorbingSetup setup = build_family(pr.sys, pr.f.c_f);
  State center = pr.sys.zero_state();
  center.p << 3.0, 3.0;
  if (s.contains("center")) center = parse_state(s.at("center"), pr.sys.n_plus(), pr.sys.n_minus());
  const double horizon = num(s, "horizon", 8.0), merge_eps = num(s, "merge_eps", 1e-3);
  const double dt = num(s, "dt", 0.001);
  CheckLog log;

  log.guarded("sphere flow", [&] {
    IntegrateOptions io;
    Trajectory generic = integrate(pr.sys, pr.f, center, 0.0, horizon, dt, io);
    SpherePath path = sphere_flow(pr.sys, pr.f, generic, dich);
    CsvTable t({"time", "x_1", "x_2", "direct_1", "direct_2", "g_norm"});
    for (std::size_t k = 0; k < path.times.size(); k += 10)
      t.row({path.times[k], path.integrated[k](0), path.integrated[k](1), path.direct[k](0),
             path.direct[k](1), path.g_norms[k]});
    t.save(ctx.out / "sphere_path.csv", ctx.reproducible);
    log.add("sphere flow routes agree", path.max_discrepancy <= 1e-6, fmt_short(path.max_discrepancy));
    log.add("g envelope holds", path.envelope_violations == 0,
            std::to_string(path.envelope_violations) + " violations");

    Trajectory slow = integrate(pr.sys, pr.f, slowest_start(pr.sys, pr.f, num(s, "rho", 5.0)), 0.0,
                                horizon, dt, io);
    SpherePath sp = sphere_flow(pr.sys, pr.f, slow, dich);
    double rate = fit_decay_exponent(sp.times, sp.g_norms, 0.5 * horizon);
    log.add("g envelope exponent within 10% of gamma1", std::abs(rate - dich.gamma1) <= 0.1 * dich.gamma1,
            "exponent " + fmt_short(rate) + ", gamma1 " + fmt_short(dich.gamma1));
  });

  log.guarded("omega at infinity", [&] {
    SampledSet set = ball_samples(center, num(s, "radius", 0.5), num(s, "step", 0.25));
    OmegaInfinityOptions oo;
    oo.workers = ctx.workers;
    PointCloud cloud = omega_infty(setup, pr.f, set, horizon, merge_eps, oo);
    write_cloud_csv(ctx.out / "omega_infty.csv", cloud, {"x_1", "x_2"}, ctx.reproducible);
    std::vector<Eigen::VectorXd> poles = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-1.0, 0.0)};
    double d = one_sided_distance(cloud.points, poles);
    log.add("omega_infty inside {+-e1}", !cloud.empty() && d <= 1e-3, "distance " + fmt_short(d));
    double inv = limit_flow_invariance(pr.sys.a_plus(), cloud, 1.0);
    log.add("omega_infty invariant under the limit flow", inv <= 2.0 * merge_eps, fmt_short(inv));
  });

  log.guarded("sphere coverage", [&] {
    CoverageWitness w = sphere_coverage(pr.sys, pr.f, setup.family.r1,
                                        nums(s, "coverage_times", {0.5, 1.0, 2.0}),
                                        num(s, "resolution", 1e-2), 0.005, 200000, ctx.workers);
    json j = {{"probe_times", w.probe_times}, {"worst_gap", w.worst_gap}, {"samples", w.samples},
              {"resolution", w.resolution}, {"ok", w.ok}};
    write_json(ctx.out / "coverage.json", j);
    double worst = w.worst_gap.empty() ? 0.0 : *std::max_element(w.worst_gap.begin(), w.worst_gap.end());
    log.add("sphere coverage witness", w.ok, "worst gap " + fmt_short(worst));
  });

  JordanReport jr = jordan_prediction(pr.sys.a_plus());
  json groups = json::array();
  for (const auto& g : jr.groups)
    groups.push_back({{"real_part", g.real_part}, {"algebraic", g.algebraic}, {"geometric", g.geometric},
                      {"block_sizes", g.block_sizes}, {"complex", g.complex}, {"invariant_set", g.invariant_set}});
  write_json(ctx.out / "jordan.json", {{"groups", groups}, {"connections", jr.connections},
                                       {"condition", jr.condition}, {"ill_conditioned", jr.ill_conditioned}});
  log.add("Jordan structure predicts two fixed-point pairs", jr.groups.size() == 2 && jr.connections.size() == 1);
  return log;
}

namespace {

double q_star(double t) { return 0.5 * (std::sin(t) - std::cos(t)); }

}  // namespace

CheckLog run_pullback(const ExperimentConfig& cfg, const RunContext& ctx,
                      const PullbackOverrides& overrides) {
  const json& s = cfg.pullback;
  const double t = overrides.t.value_or(num(s, "t", 0.0));
  const std::string example = overrides.example.value_or(str(s, "example", "sin-forced"));
  PullbackOptions po;
  po.ladder = overrides.ladder.value_or(nums(s, "ladder", po.ladder));
  po.tol = num(s, "tol", 1e-6);
  po.max_depth = num(s, "max_depth", 64.0);
  po.workers = ctx.workers;
  const double merge_eps = num(s, "merge_eps", 1e-3);
  CheckLog log;
  auto export_section = [&](const PullbackSection& sec, bool cq) {
    write_graph(ctx.out, "pullback_section", sec.graph, cq, ctx.reproducible);
    CsvTable t2({"depth", "cauchy_diff"});
    for (std::size_t k = 0; k < sec.cauchy_diffs.size(); ++k) t2.row({sec.depths[k + 1], sec.cauchy_diffs[k]});
    t2.save(ctx.out / "pullback_ladder.csv", ctx.reproducible);
  };

  if (example == "sin-forced") {
    Preset pr = preset_sin_forced();
    GridSpec grid = GridSpec::cube(1, num(s, "radius", 2.0), inum(s, "count", 5));
    log.guarded("sin-forced section", [&] {
      PullbackSection sec = pullback_section(pr.sys, pr.f, t, grid, po);
      export_section(sec, false);
      double err = 0.0;
      for (const auto& v : sec.graph.values()) err = std::max(err, std::abs(v(0) - q_star(t)));
      log.add("sin-forced section equals (sin t - cos t)/2", err <= 1e-4, "error " + fmt_short(err));
      log.add("ladder Cauchy convergence", sec.converged, "depth " + fmt_short(sec.depth_used));
      AbsorbingSetup setup = build_family(pr.sys, pr.f.c_f);
      SetFamily fam;
      fam.kind = SetFamily::Kind::Points;
      fam.universe = SetFamily::Universe::Hat;
      fam.r_level = setup.family.r0;
      fam.sampler = [](double) {
        std::vector<State> b;
        for (double q : {-1.0, 0.0, 1.0}) {
          State u = State::zero(1, 1);
          u.q(0) = q;
          b.push_back(u);
        }
        return b;
      };
      // The q contraction is e^{-depth}; start the ladder deep enough for merge_eps.
      PullbackOptions oo = po;
      oo.ladder = {8.0, 12.0, 16.0, 24.0, 32.0};
      PullbackOmega om = pullback_omega(setup, pr.f, t, fam, merge_eps, oo);
      write_cloud_csv(ctx.out / "pullback_omega.csv", om.cloud, {"p_1", "q_1"}, ctx.reproducible);
      std::vector<Eigen::VectorXd> target = {Eigen::Vector2d(0.0, q_star(t))};
      double d = hausdorff(om.cloud.points, target);
      log.add("pullback omega is the bounded solution point", d <= merge_eps, fmt_short(d));
    });
  } else if (example == "autonomous-consistency") {
    Preset pr = preset_small_lipschitz(static_cast<unsigned long long>(inum(s, "seed", 1)), 1.0, 1.0, 0.2, 0.5);
    GridSpec grid = GridSpec::cube(1, num(s, "radius", 4.0), inum(s, "count", 17));
    log.guarded("autonomous consistency", [&] {
      LimitOptions lo;
      lo.transform.workers = ctx.workers;
      GraphLimit gl = iterate_to_limit(pr.sys, pr.f, GraphFn(grid, pr.sys.n_minus()), 1.0, po.tol, lo);
      PullbackSection sec = pullback_section(pr.sys, pr.f, t, grid, po);
      export_section(sec, false);
      double d = sup_distance(gl.graph, sec.graph);
      log.add("process section matches the autonomous attractor", d <= 10.0 * po.tol, fmt_short(d));
    });
  } else if (example == "oscillating-b") {
    Preset pr = preset_oscillating_b();
    GridSpec grid = GridSpec::cube(1, num(s, "radius", 4.0), inum(s, "count", 9));
    log.guarded("oscillating-b section", [&] {
      PullbackSection sec = pullback_section(pr.sys, pr.f, t, grid, po);
      export_section(sec, false);
      log.add("ladder Cauchy convergence", sec.converged, "depth " + fmt_short(sec.depth_used));
      PullbackSection prev = pullback_section(pr.sys, pr.f, t - 1.0, grid, po);
      double d = section_invariance_defect(pr.sys, pr.f, prev.graph, t - 1.0, sec.graph, t, po);
      log.add("section invariance S(t, t-1) J(t-1) = J(t)", d <= 10.0 * po.tol, fmt_short(d));
    });
  } else {
    throw ConfigError("pullback: unknown example '" + example + "'");
  }
  return log;
}

// ---------------------------------------------------------------- examples

namespace {

// Time-reversed system: u' = -A u - f(u).
Preset reversed(const Preset& pr) {
  SplitSystem sys = SplitSystem::make_unchecked(MatP(-pr.sys.a_plus()), VecM(-pr.sys.minus_rates()));
  NonlinearityModel g = pr.f;
  Field inner = pr.f.eval;
  g.eval = [inner](double t, const State& u) {
    State v = inner(-t, u);
    v *= -1.0;
    return v;
  };
  return {pr.name + "_reversed", sys, g};
}

State planar(double x, double y) {
  State u = State::zero(1, 1);
  u.p(0) = x;
  u.q(0) = y;
  return u;
}

double max_abs_along(const Trajectory& tr, bool q_part) {
  double m = 0.0;
  for (const auto& u : tr.states) m = std::max(m, q_part ? u.q.norm() : u.p.norm());
  return m;
}

void example1(CheckLog& log, const RunContext& ctx) {
  Preset pr = preset_ex1();
  GridSpec grid = GridSpec::cube(1, 4.0, 9);
  log.guarded("ex1 attractor graph", [&] {
    LimitOptions lo;
    lo.transform.workers = ctx.workers;
    GraphFn start = GraphFn::constant(grid, VecM::Constant(1, cplx(0.5)));
    GraphLimit gl = iterate_to_limit(pr.sys, pr.f, start, 1.0, 1e-8, lo);
    write_graph_csv(ctx.out / "ex1_graph.csv", gl.graph, false, ctx.reproducible);
    log.add("ex1: J is the E+ axis (graph = 0)", gl.graph.sup_norm() <= 1e-6,
            "sup " + fmt_short(gl.graph.sup_norm()));
    AbsorbingSetup setup = build_family(pr.sys, 0.0);
    PullbackSection sec;
    sec.graph = gl.graph;
    const double eps = 1e-3;
    PointCloud core = bounded_core_section(setup, pr.f, 0.0, setup.family.r0, 10.0, sec, eps);
    std::vector<Eigen::VectorXd> origin = {Eigen::Vector2d(0.0, 0.0)};
    double d = core.empty() ? 1e300 : hausdorff(core.points, origin);
    log.add("ex1: J_b is the origin", d <= eps, "Hausdorff " + fmt_short(d));
  });
  log.guarded("ex1 omega of the vertical segment", [&] {
    AbsorbingSetup setup = build_family(pr.sys, 0.0);
    SampledSet seg = segment_samples(planar(0.0, -1.0), planar(0.0, 1.0), 21);
    OmegaOptions oo;
    oo.setup = setup;
    oo.r_level = setup.family.r0;
    PointCloud om = omega_limit(pr.sys, pr.f, seg, 30.0, {25.0, 30.0}, 1e-3, oo);
    std::vector<Eigen::VectorXd> origin = {Eigen::Vector2d(0.0, 0.0)};
    double d = hausdorff(om.points, origin);
    log.add("ex1: omega({0} x [-1, 1]) = origin", d <= 1e-3, fmt_short(d));
  });
}

void example2(CheckLog& log, const RunContext& ctx) {
  Preset pr = preset_ex2();
  log.guarded("ex2 omega of the lifted circle", [&] {
    const int n = 256;
    const double eps = 0.05;
    SampledSet circle;
    for (int k = 0; k < n; ++k) {
      State u = State::zero(2, 1);
      double th = 2.0 * M_PI * k / n;
      u.p << std::cos(th), std::sin(th);
      u.q(0) = 1.0;
      circle.samples.push_back(u);
    }
    circle.radius = 1.0;
    OmegaOptions oo;
    oo.workers = ctx.workers;
    PointCloud om = omega_limit(pr.sys, pr.f, circle, 20.0123, {20.0, 20.0123}, eps, oo);
    std::vector<Eigen::VectorXd> ref;
    for (int k = 0; k < 4096; ++k) {
      double th = 2.0 * M_PI * k / 4096;
      ref.push_back(Eigen::Vector3d(std::cos(th), std::sin(th), 0.0));
    }
    write_cloud_csv(ctx.out / "ex2_omega.csv", om, {"p_1", "p_2", "q_1"}, ctx.reproducible);
    double d = hausdorff(om.points, ref);
    log.add("ex2: omega(circle at z = 1) = circle at z = 0", d <= eps, "Hausdorff " + fmt_short(d));
  });
}

void counterexample_nonattracting(CheckLog& log, const RunContext& ctx) {
  Preset pr = preset_cex_nonattracting();
  log.guarded("counterexample: J is not attracting", [&] {
    Trajectory tr = integrate(pr.sys, pr.f, planar(1.0, 0.9), 0.0, 15.0, 0.005);
    write_trajectory_csv(ctx.out / "cex_witness.csv", tr, false, ctx.reproducible);
    double min_q = 1e300;
    for (const auto& u : tr.states) min_q = std::min(min_q, u.q.norm());
    const double p_end = tr.back().p.norm();
    log.add("cex: witness grows in E+", p_end > 1e6, "|p(15)| = " + fmt_short(p_end));
    log.add("cex: vertical distance to J stays >= 0.2", min_q >= 0.2, "min |q| = " + fmt_short(min_q));
    // Off-axis points have unbounded past, so J lies in the axis q = 0.
    Preset rev = reversed(pr);
    bool unbounded = true;
    for (double y : {-0.5, 0.5}) {
      Trajectory back = integrate(rev.sys, rev.f, planar(1.0, y), 0.0, 10.0, 0.005);
      unbounded = unbounded && max_abs_along(back, true) > 1.0;
    }
    log.add("cex: off-axis points leave the strip backward", unbounded);
  });
}

void counterexample_nonclosed(CheckLog& log, const RunContext& ctx) {
  Preset pr = preset_jb_nonclosed();
  Preset rev = reversed(pr);
  log.guarded("counterexample: J = R x [-1, 1]", [&] {
    bool bounded = true;
    for (double x : {0.5, 2.0, -3.0})
      for (double y : {0.0, 0.25, -0.9, 1.0}) {
        Trajectory back = integrate(rev.sys, rev.f, planar(x, y), 0.0, 10.0, 0.005);
        bounded = bounded && max_abs_along(back, false) <= std::abs(x) + 1e-6 &&
                  max_abs_along(back, true) <= std::abs(y) + 1e-6;
      }
    log.add("jb: points of R x [-1, 1] have bounded past", bounded);
    bool escape = true;
    for (double y : {1.5, -1.5}) {
      Trajectory back = integrate(rev.sys, rev.f, planar(0.5, y), 0.0, 5.0, 0.005);
      escape = escape && max_abs_along(back, true) > 10.0;
    }
    log.add("jb: points with |y| > 1 have unbounded past", escape);
  });
  log.guarded("counterexample: J_b is not closed", [&] {
    bool bounded = true;
    std::ostringstream os;
    for (int k : {2, 4, 8, 16}) {
      Trajectory fw = integrate(pr.sys, pr.f, planar(1.0, 1.0 / k), 0.0, 20.0, 0.005);
      double m = max_abs_along(fw, false);
      bounded = bounded && m <= k + 1e-3;
      os << "k=" << k << ": max|x| " << fmt_short(m) << "; ";
    }
    Trajectory limit = integrate(pr.sys, pr.f, planar(1.0, 0.0), 0.0, 20.0, 0.005);
    const double x_end = limit.back().p.norm();
    os << "(1, 0): |x(20)| " << fmt_short(x_end);
    log.add("jb: (1, 1/k) in J_b but the limit (1, 0) escapes", bounded && x_end > 1e6, os.str());
  });
  (void)ctx;
}

}  // namespace

CheckLog run_examples(const RunContext& ctx) {
  CheckLog log;
  example1(log, ctx);
  example2(log, ctx);
  counterexample_nonattracting(log, ctx);
  counterexample_nonclosed(log, ctx);
  return log;
}

// ---------------------------------------------------------------- selftest

namespace {

MatP random_expanding(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.2, 2.0);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = normal(rng);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    t(i, i) = unit(rng);
    for (int j = i + 1; j < n; ++j) t(i, j) = 0.5 * normal(rng);
  }
  Eigen::MatrixXd qq = q + n * Eigen::MatrixXd::Identity(n, n);
  return MatP(qq * t * qq.inverse());
}

void selftest_operator(CheckLog& log, std::mt19937_64& rng) {
  double worst = 0.0;
  for (int k = 0; k < 30; ++k) {
    int n = 1 + k % 5;
    SplitSystem sys = SplitSystem::make(random_expanding(rng, n), VecM::Constant(1, cplx(-1.0)));
    LyapunovCertificate c = solve_lyapunov(sys);
    worst = std::max(worst, c.residual);
  }
  log.add("Lyapunov residual <= 1e-10", worst <= 1e-10, fmt_short(worst));

  MatP a(2, 2);
  a << 1.0, 1.0, -1.0, 1.0;
  SplitSystem rot = SplitSystem::make(a, VecM::Constant(1, cplx(-1.0)));
  MatP e = propagator_plus(rot, 1.0) * propagator_plus(rot, -1.0);
  log.add("propagator group law", (Eigen::MatrixXd(e) - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-12);
}

void selftest_semiflow(CheckLog& log) {
  Preset ex1 = preset_ex1();
  Trajectory tr = integrate(ex1.sys, ex1.f, planar(2.0, 1.0), 0.0, 5.0, 0.01);
  double err = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    double t = tr.times[k];
    err = std::max(err, std::abs(tr.states[k].p(0) - 2.0 * std::exp(t)) / std::exp(t));
    err = std::max(err, std::abs(tr.states[k].q(0).real() - std::exp(-t)));
  }
  log.add("linear flow exact", err <= 1e-10, fmt_short(err));

  Preset sl = preset_small_lipschitz(3, 1.0, 1.0, 0.2, 0.5);
  State u0 = sl.sys.zero_state();
  u0.p(0) = 0.7;
  u0.q(0) = 1.5;
  Integrator integ(sl.sys, 0.01);
  State once = integ.flow(sl.f, u0, 0.0, 2.0);
  State twice = integ.flow(sl.f, integ.flow(sl.f, u0, 0.0, 1.0), 1.0, 1.0);
  log.add("semigroup property", (once - twice).norm() <= 1e-8, fmt_short((once - twice).norm()));

  IntegrateOptions io;
  io.envelope = EnvelopeCheck{estimate_dichotomy(sl.sys), sl.f.c_f};
  bool ok = true;
  try {
    integrate(sl.sys, sl.f, u0, 0.0, 6.0, 0.005, io);
  } catch (const CertificateFailure&) {
    ok = false;
  }
  log.add("a-priori envelopes along a trajectory", ok);

  Preset sf = preset_sin_forced();
  Trajectory st = integrate_process(sf.sys, sf.f, State::zero(1, 1), 0.0, 20.0, 0.005);
  double qe = std::abs(st.back().q(0).real() - q_star(20.0));
  log.add("sin-forced trajectory approaches q*(t)", qe <= 1e-6, fmt_short(qe));

  CertificateReport cr = certify_nonlinearity(sl.sys, sl.f, 2000, 11, 5.0, 3.0);
  log.add("nonlinearity certificate", cr.ok());
}

void selftest_attractor(CheckLog& log, const RunContext& ctx) {
  Preset pr = preset_small_lipschitz(1, 1.0, 1.0, 0.2, 0.5);
  DichotomyConstants d = estimate_dichotomy(pr.sys);
  GridSpec grid = GridSpec::cube(1, 4.0, 17);
  const double tol_gt = 1e-6, tol_lp = 1e-4;
  LimitOptions lo;
  lo.transform.workers = ctx.workers;
  GraphLimit gl = iterate_to_limit(pr.sys, pr.f, GraphFn(grid, pr.sys.n_minus()), 1.0, tol_gt, lo);
  write_graph_csv(ctx.out / "gt_graph.csv", gl.graph, false, ctx.reproducible);
  LPConfig lc;
  lc.grid = grid;
  lc.tol = tol_lp;
  lc.workers = ctx.workers;
  LPResult lr = lp_fixed_point(pr.sys, pr.f, d, pr.f.lipschitz.constant, lc);
  write_graph_csv(ctx.out / "lp_graph.csv", lr.graph, false, ctx.reproducible);
  CsvTable t({"iteration", "sup_diff", "ratio"});
  for (const auto& r : lr.log) t.row({static_cast<double>(r.iteration), r.sup_diff, r.ratio});
  t.save(ctx.out / "lp_log.csv", ctx.reproducible);
  double dist = sup_distance(gl.graph, lr.graph);
  log.add("graph transform and Lyapunov-Perron agree", dist <= 10.0 * std::max(tol_gt, tol_lp), fmt_short(dist));
  log.add("LP iterates stay in LB(kappa)", lr.membership_ok);

  auto pairs = sample_cone_pairs(pr.sys, 2.0, 4.0, 1.0, 500, 7);
  std::size_t bad = check_cone_invariance(pr.sys, pr.f, pairs, 1.0, 1.0, 0.005, ctx.workers);
  log.add("cone invariance", bad == 0, std::to_string(bad) + " violations");

  std::vector<State> samples;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    State s = pr.sys.zero_state();
    s.p(0) = 2.0 * u(rng);
    for (int j = 0; j < pr.sys.n_minus(); ++j) s.q(j) = 2.0 * u(rng);
    samples.push_back(s);
  }
  RateFit rf = attraction_rate(pr.sys, pr.f, gl.graph, samples, 2.0, 0.005, 0.1, 1e-9, ctx.workers);
  ConeParameters cp = ConeParameters::evaluate(d, pr.f.lipschitz.constant, 1.0);
  double pred = cp.predicted_rate(d, pr.f.lipschitz.constant);
  log.add("graph transform attraction rate", rf.rate >= 0.85 * pred,
          fmt_short(rf.rate) + " vs " + fmt_short(pred));
  PrefactorCheck pc = lp_prefactor_check(lr, d, pr.f.c_f, samples);
  log.add("LP attraction prefactor", pc.violations == 0, fmt_short(pc.worst_ratio));
}

void selftest_bounds(CheckLog& log, const RunContext& ctx) {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      double g1 = std::pow(10.0, -1.0 + 2.0 * i / 19.0), g2 = std::pow(10.0, -1.0 + 2.0 * j / 19.0);
      worst = std::max(worst, std::abs(gt_bound(g1, g2) - gt_variational(g1, g2)));
    }
  log.add("GT closed form equals variational form", worst <= 1e-6, fmt_short(worst));
  double cov = 0.0;
  for (double c : {0.1, 3.0, 10.0}) {
    double a = lp_bound(c * 1.0, c * 2.0, 1.5).lp_value, b = lp_bound(1.0, 2.0, 1.5).lp_value;
    cov = std::max(cov, std::abs(a - c * b) / (c * b));
  }
  log.add("LP bound scale covariance", cov <= 1e-6, fmt_short(cov));
  std::vector<ThresholdRow> rows = threshold_table(ctx.workers);
  CsvTable t({"gamma1", "gamma2", "lp_full", "lp_first_second", "gt"});
  bool ordered = true;
  for (const auto& r : rows) {
    t.row({r.gamma1, r.gamma2, r.lp_full, r.lp_first_second, r.gt});
    if (r.gamma1 == r.gamma2) ordered = ordered && r.lp_full < r.gt;
  }
  t.save(ctx.out / "threshold_table.csv", ctx.reproducible);
  log.add("LP below GT on the diagonal", ordered);

  Preset pr = preset_small_lipschitz(2, 1.0, 1.0, 0.2, 0.5);
  const double r_cut = default_cutoff_radius(pr.f.c_f, pr.f.lipschitz.constant);
  NonlinearityModel fc = cutoff(pr.f, r_cut);
  bool same = true;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    State s = pr.sys.zero_state();
    s.p(0) = (k % 2 ? 1.0 : -1.0) * (r_cut + 5.0 * std::abs(u(rng)));
    for (int j = 0; j < pr.sys.n_minus(); ++j) s.q(j) = u(rng);
    State a = fc(0.0, s), b = pr.f(0.0, s);
    same = same && a.p == b.p && a.q == b.q;
  }
  log.add("cutoff is the identity outside the cylinder", same);
  double ratio = max_lipschitz_ratio(fc, sample_strip_pairs(pr.sys, 3.0 * r_cut, 2.0, 2000, 13));
  log.add("cutoff Lipschitz ratio <= 5 L_f", ratio <= 5.0 * pr.f.lipschitz.constant, fmt_short(ratio));
}

void selftest_infinity(CheckLog& log) {
  MatP a(2, 2);
  a << 2.0, 0.0, 0.0, 1.0;
  double drift = 0.0, worst = 0.0;
  VecP y(2);
  y << std::cos(0.3), std::sin(0.3);
  for (int k = 0; k < 1000; ++k) {
    y = limit_flow_step(a, y, 1e-3, &drift);
    worst = std::max(worst, drift);
  }
  log.add("limit flow norm drift <= 1e-6 per step", worst <= 1e-6, fmt_short(worst));
  VecP e2(2);
  e2 << 0.0, 1.0;
  log.add("eigen-direction is a fixed point", (limit_flow(a, e2, 1.0) - e2).norm() <= 1e-12);
  JordanReport jr = jordan_prediction(a);
  log.add("Jordan prediction for diag(2, 1)", jr.groups.size() == 2 && jr.connections.size() == 1);
  MatP j(2, 2);
  j << 1.0, 1.0, 0.0, 1.0;
  JordanReport jb = jordan_prediction(j);
  log.add("Jordan block of size 2 detected",
          jb.groups.size() == 1 && jb.groups[0].block_sizes == std::vector<int>{2});
}

void selftest_pullback(CheckLog& log, const RunContext& ctx) {
  Preset pr = preset_oscillating_b();
  State u = pr.sys.zero_state();
  u.p(0) = 0.5;
  u.q(0) = 1.0;
  u.q(1) = -0.5;
  double d = process_law_defect(pr.sys, pr.f, u, -2.0, -1.0, 0.0, 0.005);
  log.add("process two-parameter law", d <= 1e-8, fmt_short(d));
  Preset sf = preset_sin_forced();
  PullbackOptions po;
  po.workers = ctx.workers;
  double worst = 0.0;
  CsvTable t({"t", "section", "exact"});
  for (int k = 0; k < 4; ++k) {
    double tk = 0.7 * k;
    PullbackSection sec = pullback_section(sf.sys, sf.f, tk, GridSpec::cube(1, 1.0, 3), po);
    double v = sec.graph.value(1)(0).real();
    t.row({tk, v, q_star(tk)});
    worst = std::max(worst, std::abs(v - q_star(tk)));
  }
  t.save(ctx.out / "sin_forced_section.csv", ctx.reproducible);
  log.add("sin-forced pullback section", worst <= 1e-4, fmt_short(worst));
}

}  // namespace

CheckLog run_selftest(const RunContext& ctx) {
  CheckLog log;
  std::mt19937_64 rng(ctx.seed);
  log.guarded("operator core", [&] { selftest_operator(log, rng); });
  log.guarded("semiflow", [&] { selftest_semiflow(log); });
  log.guarded("attractor", [&] { selftest_attractor(log, ctx); });
  log.guarded("bounds", [&] { selftest_bounds(log, ctx); });
  log.guarded("infinity", [&] { selftest_infinity(log); });
  log.guarded("pullback", [&] { selftest_pullback(log, ctx); });
  log.guarded("examples", [&] { log.append(run_examples(ctx)); });
  return log;
}

}  // namespace growup
