#include "growup/semiflow.hpp"

#include "growup/graph.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace growup {

namespace {

cplx phi1(cplx z) {
  if (std::abs(z) < 0.1) {
    cplx s = 0.0, term = 1.0;
    for (int k = 1; k <= 10; ++k) {
      s += term;
      term *= z / static_cast<double>(k + 1);
    }
    return s;
  }
  return (std::exp(z) - 1.0) / z;
}

cplx phi2(cplx z) {
  if (std::abs(z) < 0.1) {
    cplx s = 0.0, term = 0.5;
    for (int k = 2; k <= 11; ++k) {
      s += term;
      term *= z / static_cast<double>(k + 1);
    }
    return s;
  }
  return (std::exp(z) - 1.0 - z) / (z * z);
}

VecP plus_field(const NonlinearityModel& f, const GraphFn& sigma, double t, const VecP& p) {
  return f(t, State(p, sigma(p))).p;
}

// One predictor-corrector step of the E+ equation driven through a graph.
VecP plus_step(const StepKernel& k, const NonlinearityModel& f, const GraphFn& sigma,
               const VecP& p, double t) {
  VecP f0 = plus_field(f, sigma, t, p);
  VecP a = k.e_plus * p + k.phi1_plus * f0;
  VecP f1 = plus_field(f, sigma, t + k.h, a);
  return a + k.phi2_plus * (f1 - f0);
}

std::size_t step_count(double span, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step size must be positive");
  double n = std::ceil(span / dt - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, n));
}

}  // namespace

std::string to_string(LipschitzClaim::Region r) {
  switch (r) {
    case LipschitzClaim::Region::None: return "none";
    case LipschitzClaim::Region::Global: return "global";
    case LipschitzClaim::Region::Strip: return "strip";
    case LipschitzClaim::Region::Exterior: return "exterior";
  }
  return "none";
}

double DecayEnvelope::operator()(double r) const {
  if (kind == Kind::Power) return d / std::pow(std::max(r, k), alpha);
  if (table.empty()) return 0.0;
  if (r <= table.front().first) return table.front().second;
  if (r >= table.back().first) return table.back().second;
  auto it = std::lower_bound(table.begin(), table.end(), r,
                             [](const auto& e, double x) { return e.first < x; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  double w = (r - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

NonlinearityModel zero_nonlinearity() {
  NonlinearityModel f;
  f.name = "zero";
  f.eval = [](double, const State& u) { return State::zero(u.n_plus(), u.n_minus()); };
  f.c_f = 0.0;
  f.lipschitz = {LipschitzClaim::Region::Global, 0.0, 0.0};
  return f;
}

NonlinearityModel translated(const NonlinearityModel& f, const State& anchor) {
  NonlinearityModel g = f;
  g.name = f.name + "_translated";
  if (f.autonomous) {
    State base = f(0.0, anchor);
    g.eval = [f, anchor, base](double t, const State& v) { return f(t, v + anchor) - base; };
  } else {
    g.eval = [f, anchor](double t, const State& v) { return f(t, v + anchor) - f(t, anchor); };
  }
  g.c_f = 2.0 * f.c_f;
  g.f0.reset();
  g.decay.reset();
  return g;
}

CertificateReport certify_nonlinearity(const SplitSystem& sys, const NonlinearityModel& f,
                                       std::size_t samples, unsigned long long seed,
                                       double p_radius, double q_radius) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int np = sys.n_plus(), nm = sys.n_minus();
  const bool complex_q = sys.has_complex_rates();

  auto ball = [&](int dim, double radius, bool cplx_coords) {
    Eigen::VectorXd v(cplx_coords ? 2 * dim : dim);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    double n = v.norm();
    if (n > 0) v /= n;
    return Eigen::VectorXd(v * radius * std::pow(unif(rng), 1.0 / std::max<Eigen::Index>(1, v.size())));
  };
  auto random_state = [&](double pr, double qr) {
    State u = sys.zero_state();
    Eigen::VectorXd a = ball(np, pr, false);
    for (int i = 0; i < np; ++i) u.p(i) = a(i);
    Eigen::VectorXd b = ball(nm, qr, complex_q);
    for (int j = 0; j < nm; ++j) u.q(j) = complex_q ? cplx(b(2 * j), b(2 * j + 1)) : cplx(b(j), 0.0);
    return u;
  };

  const LipschitzClaim& lc = f.lipschitz;
  CertificateReport rep;
  for (std::size_t s = 0; s < samples; ++s) {
    State u = random_state(p_radius, q_radius);
    if (lc.region == LipschitzClaim::Region::Strip && lc.parameter > 0.0) {
      double n = u.q.norm();
      if (n > lc.parameter) u.q *= lc.parameter / n;
    }
    if (lc.region == LipschitzClaim::Region::Exterior) {
      double n = u.p.norm();
      if (n < lc.parameter) u.p = n > 0 ? VecP(u.p * (lc.parameter * (1.0 + unif(rng)) / n))
                                        : VecP(VecP::Constant(np, lc.parameter * 2.0));
    }
    State fu = f(0.0, u);
    double fn = fu.norm();
    rep.max_norm = std::max(rep.max_norm, fn);
    if (fn > f.c_f * (1.0 + 1e-12) + 1e-14) ++rep.bound_violations;

    if (lc.region != LipschitzClaim::Region::None) {
      double scale = std::pow(10.0, -3.0 * unif(rng)) * std::max(p_radius, q_radius);
      State v = u + random_state(scale, scale);
      bool in_region = true;
      if (lc.region == LipschitzClaim::Region::Strip && lc.parameter > 0.0)
        in_region = v.q.norm() <= lc.parameter;
      if (lc.region == LipschitzClaim::Region::Exterior) in_region = v.p.norm() >= lc.parameter;
      double du = (u - v).norm();
      if (in_region && du > 0.0) {
        double ratio = (fu - f(0.0, v)).norm() / du;
        rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, ratio);
        if (ratio > lc.constant * (1.0 + 1e-9) + 1e-12) ++rep.lipschitz_violations;
      }
    }

    if (f.decay && u.p.norm() >= f.decay->k) {
      State f1 = fu;
      if (f.f0) f1 -= *f.f0;
      double h = (*f.decay)(sys.plus_norm(u.p));
      double ratio = h > 0 ? f1.q.norm() / h : 0.0;
      rep.max_decay_ratio = std::max(rep.max_decay_ratio, ratio);
      if (f1.q.norm() > h * (1.0 + 1e-12) + 1e-14) ++rep.decay_violations;
    }
    ++rep.samples;
  }
  return rep;
}

StepKernel StepKernel::make(const SplitSystem& sys, double h) {
  if (!std::isfinite(h) || h == 0.0) throw ConfigError("step kernel needs a finite non-zero step");
  const int n = sys.n_plus();
  StepKernel k;
  k.h = h;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  z.topLeftCorner(n, n) = Eigen::MatrixXd(sys.a_plus()) * h;
  z.block(0, n, n, n).setIdentity();
  z.block(n, 2 * n, n, n).setIdentity();
  Eigen::MatrixXd ez = z.exp();
  k.e_plus = ez.topLeftCorner(n, n);
  k.phi1_plus = h * ez.block(0, n, n, n);
  k.phi2_plus = h * ez.block(0, 2 * n, n, n);

  const int m = sys.n_minus();
  k.e_minus.resize(m);
  k.phi1_minus.resize(m);
  k.phi2_minus.resize(m);
  for (int j = 0; j < m; ++j) {
    cplx zj = sys.minus_rates()(j) * h;
    k.e_minus(j) = std::exp(zj);
    k.phi1_minus(j) = h * phi1(zj);
    k.phi2_minus(j) = h * phi2(zj);
  }
  return k;
}

State exp_step(const StepKernel& k, const NonlinearityModel& f, const State& u, double t) {
  State f0 = f(t, u);
  State a(k.e_plus * u.p + k.phi1_plus * f0.p,
          k.e_minus.cwiseProduct(u.q) + k.phi1_minus.cwiseProduct(f0.q));
  State f1 = f(t + k.h, a);
  a.p += k.phi2_plus * (f1.p - f0.p);
  a.q += k.phi2_minus.cwiseProduct(f1.q - f0.q);
  if (!a.all_finite()) throw IntegrationError("non-finite state in integration step", t);
  return a;
}

State step(const SplitSystem& sys, const NonlinearityModel& f, const State& u, double t,
           double dt) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  return exp_step(StepKernel::make(sys, dt), f, u, t);
}

Integrator::Integrator(const SplitSystem& sys, double dt)
    : sys_(&sys), kernel_(StepKernel::make(sys, dt)) {
  if (!(dt > 0.0)) throw ConfigError("integrator: dt must be positive");
}

State Integrator::flow(const NonlinearityModel& f, State u, double t0, double duration) const {
  if (duration == 0.0) return u;
  if (!(duration > 0.0)) throw ConfigError("flow: negative duration");
  std::size_t n = step_count(duration, kernel_.h);
  double h = duration / static_cast<double>(n);
  if (std::abs(h - kernel_.h) <= 1e-12 * kernel_.h) {
    for (std::size_t i = 0; i < n; ++i) u = exp_step(kernel_, f, u, t0 + kernel_.h * i);
    return u;
  }
  StepKernel k = StepKernel::make(*sys_, h);
  for (std::size_t i = 0; i < n; ++i) u = exp_step(k, f, u, t0 + h * i);
  return u;
}

std::string EnvelopeReport::summary() const {
  std::ostringstream os;
  os << "checked=" << checked << " q_violations=" << q_violations
     << " p_upper_violations=" << p_upper_violations
     << " p_lower_violations=" << p_lower_violations << " worst_ratio=" << worst_ratio;
  return os.str();
}

EnvelopeReport check_envelopes(const Trajectory& traj, const EnvelopeCheck& chk) {
  EnvelopeReport rep;
  const DichotomyConstants& d = chk.dich;
  const double m = d.m, cf = chk.c_f, s = chk.slack;
  auto check_pair = [&](std::size_t i, std::size_t k) {
    double dt = traj.times[k] - traj.times[i];
    const State& a = traj.states[i];
    const State& b = traj.states[k];
    double qa = a.q.norm(), qb = b.q.norm(), pa = a.p.norm(), pb = b.p.norm();
    double e2 = std::exp(-d.gamma2 * dt);
    double qbound = m * e2 * qa + m * cf / d.gamma2 * (1.0 - e2);
    double e0 = std::exp(d.gamma0 * dt);
    double pup = m * e0 * pa + m * cf / d.gamma0 * (e0 - 1.0);
    double plo = std::exp(d.gamma1 * dt) * (pa / m - cf / d.gamma1);
    bool bad = false;
    if (qb > s * qbound + 1e-12) {
      ++rep.q_violations;
      bad = true;
    }
    if (pb > s * pup + 1e-12) {
      ++rep.p_upper_violations;
      bad = true;
    }
    if (plo > 0.0 && pb < plo / s - 1e-12) {
      ++rep.p_lower_violations;
      bad = true;
    }
    if (qbound > 0) rep.worst_ratio = std::max(rep.worst_ratio, qb / qbound);
    if (bad && rep.first_violation_time == 0.0) rep.first_violation_time = traj.times[k];
    ++rep.checked;
  };
  for (std::size_t k = 1; k < traj.size(); ++k) {
    check_pair(0, k);
    if (k > 1) check_pair(k - 1, k);
  }
  return rep;
}

namespace {

Trajectory run_fixed(const SplitSystem& sys, const NonlinearityModel& f, const State& u0,
                     double t0, double t1, std::size_t n, std::size_t store_every) {
  Trajectory tr;
  double h = (t1 - t0) / static_cast<double>(n);
  tr.dt = h;
  tr.times.push_back(t0);
  tr.states.push_back(u0);
  if (n == 0) return tr;
  StepKernel k = StepKernel::make(sys, h);
  State u = u0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = t0 + h * static_cast<double>(i);
    u = exp_step(k, f, u, t);
    if ((i + 1) % store_every == 0 || i + 1 == n) {
      tr.times.push_back(i + 1 == n ? t1 : t0 + h * static_cast<double>(i + 1));
      tr.states.push_back(u);
    }
  }
  return tr;
}

}  // namespace

Trajectory integrate(const SplitSystem& sys, const NonlinearityModel& f, const State& u0,
                     double t0, double t1, double dt, const IntegrateOptions& opts) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || t1 < t0)
    throw ConfigError("integrate: t_span must be finite and increasing");
  if (u0.n_plus() != sys.n_plus() || u0.n_minus() != sys.n_minus())
    throw ConfigError("integrate: initial state has wrong dimensions");
  if (!u0.all_finite()) throw IntegrationError("integrate: non-finite initial state", t0);
  std::size_t store = std::max<std::size_t>(1, opts.store_every);
  if (t1 == t0) {
    Trajectory tr;
    tr.dt = dt;
    tr.times = {t0};
    tr.states = {u0};
    return tr;
  }
  std::size_t n = step_count(t1 - t0, dt);
  Trajectory tr = run_fixed(sys, f, u0, t0, t1, n, store);

  if (opts.richardson) {
    Trajectory fine = run_fixed(sys, f, u0, t0, t1, 2 * n, 2 * store);
    double gap = 0.0;
    std::size_t m = std::min(fine.size(), tr.size());
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(fine.times[i] - tr.times[i]) > 1e-9 * (1.0 + std::abs(tr.times[i]))) continue;
      gap = std::max(gap, (fine.states[i] - tr.states[i]).norm() / (1.0 + tr.states[i].norm()));
    }
    tr.richardson_gap = gap;
    tr.richardson_flag = gap > opts.richardson_tol;
  }

  if (opts.envelope) {
    EnvelopeReport rep = check_envelopes(tr, *opts.envelope);
    if (!rep.ok()) throw CertificateFailure("trajectory envelope violated: " + rep.summary());
  }
  return tr;
}

Trajectory integrate_process(const SplitSystem& sys, const NonlinearityModel& f, const State& u0,
                             double t0, double t1, double dt, const IntegrateOptions& opts) {
  return integrate(sys, f, u0, t0, t1, dt, opts);
}

PlusPath backward_plus_solve(const SplitSystem& sys, const NonlinearityModel& f,
                             const GraphFn& sigma, const VecP& p_end, double tau, double horizon,
                             double dt) {
  if (!(horizon > 0.0)) throw ConfigError("backward_plus_solve: horizon must be positive");
  std::size_t n = step_count(horizon, dt);
  double h = horizon / static_cast<double>(n);
  StepKernel k = StepKernel::make(sys, -h);
  PlusPath path;
  path.times.resize(n + 1);
  path.p.resize(n + 1);
  path.times[n] = tau;
  path.p[n] = p_end;
  VecP p = p_end;
  const double slack = 1e-9 * (1.0 + sigma.spec().hi.cwiseAbs().maxCoeff());
  if (!sigma.contains(p, slack)) throw DomainError("backward path starts outside the graph box", tau);
  for (std::size_t i = n; i-- > 0;) {
    double t = tau - h * static_cast<double>(n - i - 1);
    p = plus_step(k, f, sigma, p, t);
    double ti = tau - h * static_cast<double>(n - i);
    if (!p.allFinite()) throw IntegrationError("backward path became non-finite", ti);
    if (!sigma.contains(p, slack))
      throw DomainError("backward path left the graph box at t = " + std::to_string(ti), ti);
    path.times[i] = ti;
    path.p[i] = p;
  }
  return path;
}

VecP forward_plus_solve(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& sigma,
                        const VecP& p_start, double t0, double duration, double dt) {
  std::size_t n = step_count(duration, dt);
  double h = duration / static_cast<double>(n);
  StepKernel k = StepKernel::make(sys, h);
  VecP p = p_start;
  for (std::size_t i = 0; i < n; ++i) p = plus_step(k, f, sigma, p, t0 + h * static_cast<double>(i));
  return p;
}

}  // namespace growup
