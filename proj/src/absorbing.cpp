#include "growup/absorbing.hpp"

#include "growup/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace growup {

double AbsorbingSetup::diameter_h0() const {
  double pr = sys.norm_constants().c2 * family.r0;
  return 2.0 * std::sqrt(pr * pr + strip.d2_level * strip.d2_level);
}

AbsorbingSetup build_family(const SplitSystem& sys, const DichotomyConstants& dich, double c_f,
                            const LyapunovCertificate& cert, double margin) {
  if (!std::isfinite(c_f) || c_f < 0.0)
    throw ConfigError("build_family: the forcing bound must be finite");
  AbsorbingSetup s{sys, dich, c_f, {}, {}};
  s.strip.d1_level = dich.m * c_f / dich.gamma2 + 1.0;
  s.strip.d2_level = dich.m * s.strip.d1_level;
  s.family.cert = with_forcing_bound(cert, sys, c_f, margin);
  s.family.r0 = s.family.cert.r0;
  s.family.r1 = s.family.cert.r1;
  return s;
}

AbsorbingSetup build_family(const SplitSystem& sys, double c_f) {
  return build_family(sys, estimate_dichotomy(sys), c_f, solve_lyapunov(sys));
}

double absorption_time_bound(const AbsorbingSetup& setup, double q0_norm) {
  double x = setup.dich.m * q0_norm;
  return x > 1.0 ? std::log(x) / setup.dich.gamma2 : 0.0;
}

MonotonicityWitness expanding_witness(const AbsorbingSetup& setup, const NonlinearityModel& f,
                                      const std::vector<State>& starts, double horizon,
                                      double dt) {
  MonotonicityWitness w;
  const double lvl = setup.family.level(setup.family.r0);
  for (const State& u0 : starts) {
    Trajectory tr = integrate(setup.sys, f, u0, 0.0, horizon, dt);
    ++w.trajectories;
    for (std::size_t k = 1; k < tr.size(); ++k) {
      const State& a = tr.states[k - 1];
      if (setup.form(a) <= lvl || !setup.strip.in_q(a)) continue;
      ++w.checks;
      if (!(setup.form(tr.states[k]) > setup.form(a))) ++w.violations;
    }
  }
  return w;
}

SampledSet ball_samples(const State& center, double radius, double step) {
  if (!(radius >= 0.0) || !(step > 0.0)) throw ConfigError("ball_samples: bad radius or step");
  const bool cq = std::any_of(center.q.data(), center.q.data() + center.q.size(),
                              [](const cplx& z) { return z.imag() != 0.0; });
  Eigen::VectorXd c = to_real(center, cq);
  const int d = static_cast<int>(c.size());
  const int per = static_cast<int>(std::floor(radius / step + 1e-9));
  const int side = 2 * per + 1;
  SampledSet out;
  out.radius = radius;
  out.samples.push_back(center);
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(side);
  for (std::size_t k = 0; k < total; ++k) {
    Eigen::VectorXd off(d);
    std::size_t rem = k;
    for (int a = 0; a < d; ++a) {
      off(a) = step * (static_cast<int>(rem % side) - per);
      rem /= side;
    }
    if (off.norm() > radius * (1.0 + 1e-12) || off.norm() == 0.0) continue;
    out.samples.push_back(from_real(c + off, center.n_plus(), center.n_minus(), cq));
  }
  return out;
}

SampledSet segment_samples(const State& a, const State& b, std::size_t count) {
  if (count < 2) throw ConfigError("segment_samples: need at least two points");
  SampledSet out;
  for (std::size_t k = 0; k < count; ++k) {
    double s = static_cast<double>(k) / static_cast<double>(count - 1);
    out.samples.push_back((1.0 - s) * a + s * b);
  }
  State mid = 0.5 * (a + b);
  for (const auto& u : out.samples) out.radius = std::max(out.radius, (u - mid).norm());
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Escaping: return "Escaping";
    case Verdict::Straddling: return "Straddling";
    case Verdict::Captured: return "Captured";
  }
  return "Escaping";
}

namespace {
enum Membership : char { kOutsideQ = 0, kInH = 1, kOutH = 2 };
}

SetClassification classify(const AbsorbingSetup& setup, const NonlinearityModel& f,
                           const SampledSet& set, double horizon, double r_level,
                           const ClassifyOptions& opts) {
  if (set.samples.empty()) throw ConfigError("classify: empty sample set");
  if (!(horizon > 0.0)) throw ConfigError("classify: horizon must be positive");
  const std::size_t probes = static_cast<std::size_t>(std::ceil(horizon / opts.probe_dt - 1e-9));
  const double pdt = horizon / static_cast<double>(probes);
  Integrator integ(setup.sys, opts.dt);
  const double lvl = setup.family.level(r_level);
  const double lvl0 = setup.family.level(setup.family.r0);
  const std::size_t n = set.samples.size();
  std::vector<std::vector<char>> mem(n, std::vector<char>(probes + 1));
  std::vector<char> drifting(n, 0);

  auto code = [&](const State& u) -> char {
    if (!setup.strip.in_q(u, opts.margin)) return kOutsideQ;
    return setup.form(u) <= lvl + opts.margin ? kInH : kOutH;
  };
  parallel_for(n, opts.workers, [&](std::size_t i) {
    State u = set.samples[i];
    mem[i][0] = code(u);
    for (std::size_t k = 1; k <= probes; ++k) {
      u = integ.flow(f, u, pdt * (k - 1), pdt);
      mem[i][k] = code(u);
    }
    drifting[i] = mem[i][probes] == kInH && setup.form(u) > lvl0 + opts.margin;
  });

  SetClassification c;
  c.r_level = r_level;
  c.samples = n;
  for (std::size_t k = 0; k <= probes; ++k) {
    std::size_t in = 0, out = 0;
    for (std::size_t i = 0; i < n; ++i) {
      in += mem[i][k] == kInH;
      out += mem[i][k] == kOutH;
    }
    c.in_h_counts.push_back(in);
    c.out_h_counts.push_back(out);
    c.probe_times.push_back(pdt * k);
  }
  c.in_h = c.in_h_counts.back();
  c.out_h = c.out_h_counts.back();
  if (c.in_h + c.out_h < n)
    throw InconclusiveError("classify: samples still outside Q at the horizon");
  if (std::any_of(drifting.begin(), drifting.end(), [](char d) { return d != 0; }))
    throw InconclusiveError("classify: captured samples still drifting outside H_{R0}");

  auto stable_from = [&](auto pred) {
    std::size_t k = probes;
    while (k > 0 && pred(k - 1)) --k;
    return pdt * static_cast<double>(k);
  };
  if (c.out_h == n) {
    c.verdict = Verdict::Escaping;
    c.witness_time = stable_from([&](std::size_t k) { return c.out_h_counts[k] == n; });
  } else if (c.in_h == n) {
    c.verdict = Verdict::Captured;
    c.witness_time = stable_from([&](std::size_t k) { return c.in_h_counts[k] == n; });
  } else {
    c.verdict = Verdict::Straddling;
    c.witness_time = stable_from([&](std::size_t k) {
      return c.in_h_counts[k] >= 1 && c.out_h_counts[k] >= 1;
    });
  }
  return c;
}

PointCloud omega_limit(const SplitSystem& sys, const NonlinearityModel& f, const SampledSet& set,
                       double horizon, const std::vector<double>& snapshot_times,
                       double merge_eps, const OmegaOptions& opts) {
  std::optional<Verdict> verdict;
  if (opts.setup) {
    verdict = classify(*opts.setup, f, set, horizon, opts.r_level, opts.classify).verdict;
    if (*verdict == Verdict::Escaping) return empty_cloud();
  }
  std::vector<double> snaps = snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  if (snaps.empty() || snaps.front() < 0.0 || snaps.back() > horizon)
    throw ConfigError("omega_limit: snapshot times must lie in [0, horizon]");
  const bool cq = sys.has_complex_rates();
  Integrator integ(sys, opts.dt);
  std::vector<std::vector<Eigen::VectorXd>> pts(set.samples.size());
  parallel_for(set.samples.size(), opts.workers, [&](std::size_t i) {
    State u = set.samples[i];
    double t = 0.0;
    for (double s : snaps) {
      u = integ.flow(f, u, t, s - t);
      t = s;
      if (verdict && *verdict == Verdict::Straddling && !opts.setup->in_h(u, opts.r_level, 1e-6))
        continue;
      pts[i].push_back(to_real(u, cq));
    }
  });
  std::vector<Eigen::VectorXd> all;
  for (auto& v : pts) all.insert(all.end(), v.begin(), v.end());
  return cluster_points(all, merge_eps);
}

PointCloud push_forward(const SplitSystem& sys, const NonlinearityModel& f, const PointCloud& cloud,
                        double t, double merge_eps, double dt) {
  const bool cq = sys.has_complex_rates();
  Integrator integ(sys, dt);
  std::vector<Eigen::VectorXd> out(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    State u = from_real(cloud.points[i], sys.n_plus(), sys.n_minus(), cq);
    out[i] = to_real(integ.flow(f, u, 0.0, t), cq);
  }
  return cluster_points(out, merge_eps);
}

AlphaLimit alpha_limit_on_attractor(const SplitSystem& sys, const NonlinearityModel& f,
                                    const GraphFn& sigma, const std::vector<VecP>& starts,
                                    double backward_horizon, double t_step, double merge_eps,
                                    const FiberOptions& fiber) {
  if (starts.empty()) throw ConfigError("alpha_limit_on_attractor: no start points");
  const std::size_t steps =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(backward_horizon / t_step - 1e-9)));
  const bool cq = sys.has_complex_rates();
  std::vector<std::vector<Eigen::VectorXd>> snaps(steps);
  for (const VecP& p0 : starts) {
    VecP p = p0;
    for (std::size_t k = 0; k < steps; ++k) {
      FiberResult r;
      try {
        r = fiber_solve(sys, f, sigma, 0.0, t_step, p, fiber);
      } catch (const SolverError& e) {
        throw SolverError("alpha_limit_on_attractor: preimage failed at p = " +
                              std::to_string(p(0)) + ": " + e.what(),
                          e.best_residual());
      }
      p = r.p_pre;
      snaps[k].push_back(to_real(State(p, sigma(p)), cq));
    }
  }
  std::vector<Eigen::VectorXd> tail;
  for (std::size_t k = steps / 2; k < steps; ++k) tail.insert(tail.end(), snaps[k].begin(), snaps[k].end());
  AlphaLimit out;
  out.cloud = cluster_points(tail, merge_eps);
  for (std::size_t k = 0; k < steps; ++k)
    out.distance_to_limit.push_back(one_sided_distance(snaps[k], out.cloud.points));
  return out;
}

}  // namespace growup
