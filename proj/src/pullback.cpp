#include "growup/pullback.hpp"

#include "growup/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace growup {

namespace {

std::vector<double> depth_ladder(const PullbackOptions& opts) {
  std::vector<double> d = opts.ladder;
  if (d.empty()) throw ConfigError("pullback: empty ladder");
  std::sort(d.begin(), d.end());
  if (!(d.front() > 0.0)) throw ConfigError("pullback: ladder depths must be positive");
  return d;
}

}  // namespace

GraphFn pullback_image(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& start,
                       double t, double depth, const PullbackOptions& opts) {
  if (!(depth > 0.0)) throw ConfigError("pullback_image: depth must be positive");
  const std::size_t n =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(depth / opts.unit_step - 1e-9)));
  const double h = depth / static_cast<double>(n);
  TransformOptions to;
  to.fiber = opts.fiber;
  to.workers = opts.workers;
  GraphFn g = start;
  for (std::size_t k = 0; k < n; ++k) {
    to.t_start = t - depth + h * static_cast<double>(k);
    g = transform(sys, f, g, h, to).graph;
  }
  return g;
}

PullbackSection pullback_section(const SplitSystem& sys, const NonlinearityModel& f, double t,
                                 const GridSpec& grid, const PullbackOptions& opts) {
  std::vector<double> depths = depth_ladder(opts);
  const GraphFn start(grid, sys.n_minus());
  PullbackSection out;
  out.t = t;
  std::optional<GraphFn> prev;
  std::size_t i = 0;
  for (;;) {
    double d = i < depths.size() ? depths[i] : 2.0 * out.depths.back();
    if (d > opts.max_depth * (1.0 + 1e-12)) break;
    GraphFn g = pullback_image(sys, f, start, t, d, opts);
    out.depths.push_back(d);
    if (prev) out.cauchy_diffs.push_back(sup_distance(g, *prev));
    prev = std::move(g);
    ++i;
    if (i >= depths.size() && !out.cauchy_diffs.empty() && out.cauchy_diffs.back() <= opts.tol) {
      out.converged = true;
      break;
    }
  }
  if (!prev) throw ConfigError("pullback_section: every ladder depth exceeds max_depth");
  out.graph = std::move(*prev);
  out.depth_used = out.depths.back();
  if (!out.converged && !out.cauchy_diffs.empty()) out.converged = out.cauchy_diffs.back() <= opts.tol;
  return out;
}

PointCloud bounded_core_section(const AbsorbingSetup& setup, const NonlinearityModel& f, double t,
                                double r_level, double forward_horizon,
                                const PullbackSection& section, double merge_eps, double dt) {
  const GraphFn& g = section.graph;
  const bool cq = setup.sys.has_complex_rates();
  const std::size_t probes =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(forward_horizon / 0.1 - 1e-9)));
  const double pdt = forward_horizon / static_cast<double>(probes);
  Integrator integ(setup.sys, dt);
  std::vector<char> keep(g.size(), 0);
  parallel_for(g.size(), 0, [&](std::size_t i) {
    State u(g.node(i), g.value(i));
    if (!setup.in_h(u, r_level, 1e-9)) return;
    for (std::size_t k = 0; k < probes; ++k) {
      u = integ.flow(f, u, t + pdt * k, pdt);
      if (!setup.in_h(u, r_level, 1e-9)) return;
    }
    keep[i] = 1;
  });
  std::vector<Eigen::VectorXd> pts;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (keep[i]) pts.push_back(to_real(State(g.node(i), g.value(i)), cq));
  return cluster_points(pts, merge_eps);
}

PullbackOmega pullback_omega(const AbsorbingSetup& setup, const NonlinearityModel& f, double t,
                             const SetFamily& family, double merge_eps,
                             const PullbackOptions& opts, double dt) {
  const SplitSystem& sys = setup.sys;
  const bool cq = sys.has_complex_rates();
  std::vector<double> depths = depth_ladder(opts);
  PullbackOmega out;
  out.depths = depths;
  std::vector<std::vector<State>> states(depths.size());

  if (family.kind == SetFamily::Kind::Points) {
    if (!family.sampler) throw ConfigError("pullback_omega: points family needs a sampler");
    Integrator integ(sys, dt);
    for (std::size_t k = 0; k < depths.size(); ++k) {
      double s = t - depths[k];
      std::vector<State> b = family.sampler(s);
      if (b.empty()) throw ConfigError("pullback_omega: empty family member");
      states[k].resize(b.size());
      parallel_for(b.size(), opts.workers, [&](std::size_t i) {
        states[k][i] = integ.flow(f, b[i], s, depths[k]);
      });
    }
  } else {
    if (family.q_levels.empty()) throw ConfigError("pullback_omega: slab family needs q levels");
    for (std::size_t k = 0; k < depths.size(); ++k)
      for (const VecM& level : family.q_levels) {
        GraphFn g = pullback_image(sys, f, GraphFn::constant(family.window, level), t, depths[k], opts);
        for (std::size_t i = 0; i < g.size(); ++i) states[k].emplace_back(g.node(i), g.value(i));
      }
  }

  for (std::size_t k = 0; k < depths.size(); ++k) {
    std::size_t in = 0;
    for (const State& u : states[k]) in += setup.in_h(u, family.r_level, 1e-9);
    out.in_h_counts.push_back(in);
    if (family.universe == SetFamily::Universe::Tilde && in == 0)
      throw ConfigError("pullback_omega: tilde universe precondition failed, S(t, s)B(s) misses H_R(t) at depth " +
                        std::to_string(depths[k]));
    if (family.universe == SetFamily::Universe::Hat && in < states[k].size())
      throw ConfigError("pullback_omega: hat universe precondition failed, images outside H_R(t) at depth " +
                        std::to_string(depths[k]));
  }
  std::vector<Eigen::VectorXd> pts;
  for (std::size_t k = depths.size() / 2; k < depths.size(); ++k)
    for (const State& u : states[k]) {
      if (family.universe == SetFamily::Universe::Tilde && family.kind == SetFamily::Kind::Points &&
          !setup.in_h(u, family.r_level, 1e-9))
        continue;
      pts.push_back(to_real(u, cq));
    }
  out.cloud = cluster_points(pts, merge_eps);
  return out;
}

double process_law_defect(const SplitSystem& sys, const NonlinearityModel& f, const State& u,
                          double s, double tau, double t, double dt) {
  if (!(s <= tau && tau <= t)) throw ConfigError("process_law_defect: need s <= tau <= t");
  Integrator integ(sys, dt);
  State direct = integ.flow(f, u, s, t - s);
  State mid = tau > s ? integ.flow(f, u, s, tau - s) : u;
  State composed = t > tau ? integ.flow(f, mid, tau, t - tau) : mid;
  return (direct - composed).norm();
}

double section_invariance_defect(const SplitSystem& sys, const NonlinearityModel& f,
                                 const GraphFn& section_s, double s, const GraphFn& section_t,
                                 double t, const PullbackOptions& opts) {
  if (!(t > s)) throw ConfigError("section_invariance_defect: need s < t");
  if (!section_s.spec().same_lattice(section_t.spec()))
    throw ConfigError("section_invariance_defect: sections must share the lattice");
  GraphFn moved = pullback_image(sys, f, section_s, t, t - s, opts);
  return sup_distance(moved, section_t);
}

PointCloud push_process(const SplitSystem& sys, const NonlinearityModel& f, const PointCloud& cloud,
                        double t0, double t1, double merge_eps, double dt) {
  const bool cq = sys.has_complex_rates();
  Integrator integ(sys, dt);
  std::vector<Eigen::VectorXd> out;
  for (const auto& x : cloud.points) {
    State u = from_real(x, sys.n_plus(), sys.n_minus(), cq);
    if (t1 > t0) u = integ.flow(f, u, t0, t1 - t0);
    out.push_back(to_real(u, cq));
  }
  return cluster_points(out, merge_eps);
}

double distance_to_section(const SplitSystem& sys, const PointCloud& cloud, const GraphFn& section) {
  const bool cq = sys.has_complex_rates();
  double worst = 0.0;
  for (const auto& x : cloud.points) {
    State u = from_real(x, sys.n_plus(), sys.n_minus(), cq);
    worst = std::max(worst, (u.q - section(u.p)).norm());
  }
  return worst;
}

}  // namespace growup
