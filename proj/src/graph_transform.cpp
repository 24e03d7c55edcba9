#include "growup/graph_transform.hpp"

#include "growup/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace growup {

ConeParameters ConeParameters::evaluate(const DichotomyConstants& d, double l_f, double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("cone parameter kappa must be positive");
  ConeParameters c;
  c.kappa = kappa;
  const bool m_one = std::abs(d.m - 1.0) <= 1e-9;
  c.gt_admissible = m_one && l_f < kappa / ((1.0 + kappa) * (1.0 + kappa)) * (d.gamma1 + d.gamma2);
  c.limit_admissible = m_one && l_f * (1.0 + 1.0 / kappa) < d.gamma2;
  return c;
}

double ConeParameters::predicted_rate(const DichotomyConstants& d, double l_f) const {
  return d.gamma2 - l_f * (1.0 + 1.0 / kappa);
}

namespace {

struct NewtonOutcome {
  VecP p;
  State image;
  double residual;
  int iterations;
  bool converged;
};

class FiberMap {
 public:
  FiberMap(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& sigma, double t0,
           double t, double dt)
      : integ_(sys, dt), f_(f), sigma_(sigma), t0_(t0), t_(t) {}

  State operator()(const VecP& p1) const {
    return integ_.flow(f_, State(p1, sigma_(p1)), t0_, t_);
  }

 private:
  Integrator integ_;
  const NonlinearityModel& f_;
  const GraphFn& sigma_;
  double t0_, t_;
};

NewtonOutcome damped_newton(const FiberMap& map, const VecP& target, VecP p, double tol,
                            int max_iter) {
  const int n = static_cast<int>(p.size());
  State u = map(p);
  VecP r = u.p - target;
  double rn = r.norm();
  NewtonOutcome out{p, u, rn, 0, false};
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it;
    if (rn <= tol) {
      out.converged = true;
      return out;
    }
    MatP jac(n, n);
    for (int j = 0; j < n; ++j) {
      double h = 1e-7 * (1.0 + std::abs(p(j)));
      VecP ph = p;
      ph(j) += h;
      jac.col(j) = (map(ph).p - u.p) / h;
    }
    VecP delta = jac.partialPivLu().solve(VecP(-r));
    if (!delta.allFinite()) break;
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      VecP pn = p + lambda * delta;
      State un = map(pn);
      VecP rr = un.p - target;
      double rnn = rr.norm();
      if (std::isfinite(rnn) && rnn < rn) {
        p = pn;
        u = un;
        r = rr;
        rn = rnn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    out.p = p;
    out.image = u;
    out.residual = rn;
    if (!accepted) break;
  }
  out.iterations = max_iter;
  out.converged = rn <= tol;
  return out;
}

std::vector<VecP> multistart_seeds(int n, double radius) {
  std::vector<VecP> seeds;
  if (n <= 3) {
    const int per_axis = 5;
    int total = 1;
    for (int a = 0; a < n; ++a) total *= per_axis;
    for (int k = 0; k < total; ++k) {
      VecP s(n);
      int rem = k;
      for (int a = 0; a < n; ++a) {
        s(a) = radius * (-1.0 + 2.0 * (rem % per_axis) / (per_axis - 1.0));
        rem /= per_axis;
      }
      if (s.norm() <= radius * (1.0 + 1e-12)) seeds.push_back(s);
    }
  } else {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < 64; ++k) {
      VecP s(n);
      for (int a = 0; a < n; ++a) s(a) = normal(rng);
      seeds.push_back(s * (radius * (k + 1) / 64.0 / std::max(s.norm(), 1e-300)));
    }
  }
  return seeds;
}

}  // namespace

FiberResult fiber_solve(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& sigma,
                        double t0, double t, const VecP& p_target, const FiberOptions& opts) {
  if (!(t > 0.0)) throw ConfigError("fiber_solve: t must be positive");
  if (p_target.size() != sys.n_plus()) throw ConfigError("fiber_solve: target dimension mismatch");
  FiberMap map(sys, f, sigma, t0, t, opts.dt);
  const double tol = opts.tol * (1.0 + p_target.norm());
  VecP seed = propagator_plus(sys, -t) * p_target;

  NewtonOutcome best = damped_newton(map, p_target, seed, tol, opts.max_iter);
  FiberResult res;
  if (best.converged) {
    res.p_pre = best.p;
    res.q = best.image.q;
    res.residual = best.residual;
    res.iterations = best.iterations;
    return res;
  }
  if (!opts.multistart)
    throw SolverError("fiber_solve: no convergence from the linear preimage", best.residual);

  double radius = opts.search_radius > 0.0 ? opts.search_radius : 2.0 * seed.norm() + 1.0;
  std::vector<NewtonOutcome> found;
  for (const VecP& s : multistart_seeds(sys.n_plus(), radius)) {
    NewtonOutcome o = damped_newton(map, p_target, s, tol, opts.max_iter);
    if (o.residual < best.residual) best = o;
    if (!o.converged) continue;
    bool dup = false;
    for (const auto& g : found)
      if ((g.p - o.p).norm() <= 1e-6 * (1.0 + o.p.norm())) dup = true;
    if (!dup) found.push_back(o);
  }
  if (found.empty())
    throw SolverError("fiber_solve: no convergence after multi-start", best.residual);
  auto pick = std::min_element(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return a.p.norm() < b.p.norm();
  });
  res.p_pre = pick->p;
  res.q = pick->image.q;
  res.residual = pick->residual;
  res.iterations = pick->iterations;
  res.multiplicity = static_cast<int>(found.size());
  return res;
}

TransformResult transform(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& sigma,
                          double t, const TransformOptions& opts) {
  TransformResult out;
  out.graph = GraphFn(sigma.spec(), sigma.n_minus());
  std::vector<int> mult(sigma.size(), 1);
  parallel_for(sigma.size(), opts.workers, [&](std::size_t i) {
    VecP target = sigma.node(i);
    try {
      FiberResult r = fiber_solve(sys, f, sigma, opts.t_start, t, target, opts.fiber);
      out.graph.value(i) = r.q;
      mult[i] = r.multiplicity;
    } catch (const SolverError& e) {
      throw SolverError("transform: node " + std::to_string(i) + ": " + e.what(),
                        e.best_residual());
    }
  });
  out.kappa_hat = out.graph.kappa_hat();
  out.max_multiplicity = *std::max_element(mult.begin(), mult.end());
  if (opts.cone) out.admissibility_warning = !opts.cone->gt_admissible;
  return out;
}

double fit_geometric_rate(const std::vector<double>& diffs, double t_step, double floor) {
  std::vector<double> xs, ys;
  for (std::size_t k = 1; k < diffs.size(); ++k) {
    if (!(diffs[k] > floor)) continue;
    xs.push_back(static_cast<double>(k) * t_step);
    ys.push_back(std::log(diffs[k]));
  }
  if (xs.size() < 2) return std::numeric_limits<double>::infinity();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return -sxy / sxx;
}

GraphLimit iterate_to_limit(const SplitSystem& sys, const NonlinearityModel& f,
                            const GraphFn& sigma0, double t_step, double tol,
                            const LimitOptions& opts) {
  if (!(tol > 0.0) || !(t_step > 0.0)) throw ConfigError("iterate_to_limit: bad tol or t_step");
  if (opts.transform.cone && !opts.transform.cone->limit_admissible)
    throw ConfigError("iterate_to_limit: needs M = 1 and L_f (1 + 1/kappa) < gamma2");
  GraphLimit lim;
  lim.graph = sigma0;
  for (int round = 1; round <= opts.max_rounds; ++round) {
    TransformResult tr = transform(sys, f, lim.graph, t_step, opts.transform);
    double d = sup_distance(tr.graph, lim.graph);
    lim.sup_diffs.push_back(d);
    lim.kappa_hats.push_back(tr.kappa_hat);
    lim.admissibility_warning = lim.admissibility_warning || tr.admissibility_warning;
    lim.graph = std::move(tr.graph);
    lim.rounds = round;
    if (d <= tol) {
      lim.rate = fit_geometric_rate(lim.sup_diffs, t_step);
      return lim;
    }
  }
  throw SolverError("iterate_to_limit: stagnation above tolerance", lim.sup_diffs.back());
}

std::vector<StatePair> sample_cone_pairs(const SplitSystem& sys, double strip_height,
                                         double p_radius, double kappa, std::size_t count,
                                         unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int np = sys.n_plus(), nm = sys.n_minus();
  const bool cq = sys.has_complex_rates();
  auto dir_p = [&]() {
    VecP v(np);
    for (int i = 0; i < np; ++i) v(i) = normal(rng);
    return VecP(v / v.norm());
  };
  auto dir_q = [&]() {
    VecM v(nm);
    for (int j = 0; j < nm; ++j) v(j) = cplx(normal(rng), cq ? normal(rng) : 0.0);
    return VecM(v / v.norm());
  };
  std::vector<StatePair> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    VecP p1 = dir_p() * (p_radius * std::pow(unif(rng), 1.0 / np));
    VecP dp = dir_p() * (p_radius * 0.2 * std::pow(10.0, -3.0 * unif(rng)));
    double frac = unif(rng) < 0.3 ? 1.0 : unif(rng);
    VecM dq = nm ? VecM(dir_q() * (kappa * dp.norm() * frac)) : VecM(VecM::Zero(0));
    double half = 0.5 * dq.norm();
    if (half > strip_height) {
      double s = strip_height / half;
      dp *= s;
      dq *= s;
      half = strip_height;
    }
    VecM c = nm ? VecM(dir_q() * ((strip_height - half) * std::pow(unif(rng), 1.0 / nm)))
                : VecM(VecM::Zero(0));
    State a(p1, c - 0.5 * dq);
    State b(VecP(p1 + dp), c + 0.5 * dq);
    out.emplace_back(a, b);
  }
  return out;
}

std::size_t check_cone_invariance(const SplitSystem& sys, const NonlinearityModel& f,
                                  const std::vector<StatePair>& pairs, double t, double kappa,
                                  double dt, int workers) {
  Integrator integ(sys, dt);
  std::vector<char> bad(pairs.size(), 0);
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    State a = integ.flow(f, pairs[i].first, 0.0, t);
    State b = integ.flow(f, pairs[i].second, 0.0, t);
    double dq = (a.q - b.q).norm();
    double dp = (a.p - b.p).norm();
    bad[i] = dq > kappa * dp * (1.0 + 1e-9) + 1e-12;
  });
  return static_cast<std::size_t>(std::count(bad.begin(), bad.end(), 1));
}

RateFit attraction_rate(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& sigma,
                        const std::vector<State>& samples, double horizon, double dt,
                        double probe_dt, double floor, int workers) {
  if (samples.empty()) throw ConfigError("attraction_rate: no samples");
  const std::size_t probes = static_cast<std::size_t>(std::floor(horizon / probe_dt + 1e-9));
  Integrator integ(sys, dt);
  std::vector<std::vector<double>> dist(samples.size(), std::vector<double>(probes + 1, 0.0));
  parallel_for(samples.size(), workers, [&](std::size_t i) {
    State u = samples[i];
    dist[i][0] = (sigma(u.p) - u.q).norm();
    for (std::size_t k = 1; k <= probes; ++k) {
      u = integ.flow(f, u, probe_dt * (k - 1), probe_dt);
      dist[i][k] = (sigma(u.p) - u.q).norm();
    }
  });
  RateFit fit;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k <= probes; ++k) {
    double m = 0.0;
    for (const auto& d : dist) m = std::max(m, d[k]);
    fit.times.push_back(probe_dt * k);
    fit.sup_distance.push_back(m);
    if (m > floor) {
      xs.push_back(probe_dt * k);
      ys.push_back(std::log(m));
    }
  }
  fit.points = xs.size();
  if (xs.size() < 2) {
    fit.rate = std::numeric_limits<double>::infinity();
    return fit;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.rate = -sxy / sxx;
  return fit;
}

}  // namespace growup
