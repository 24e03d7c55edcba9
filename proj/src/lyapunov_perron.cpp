#include "growup/lyapunov_perron.hpp"

#include "growup/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace growup {

LPConstraints lp_constraints(const DichotomyConstants& d, double l_f, double kappa) {
  const double m = d.m, s = d.gamma1 + d.gamma2;
  const double a = m * l_f * (1.0 + kappa);
  LPConstraints c;
  c.first_a = s / m * kappa / ((m + kappa) * (1.0 + kappa));
  c.first_b = s / m / (2.0 * (1.0 + kappa));
  c.first = l_f <= c.first_a && l_f < c.first_b;
  if (s - 2.0 * a > 0.0) {
    c.second_lhs = m * m * l_f / (s - 2.0 * a) + m * m * l_f / (s - a);
    c.second = c.second_lhs < 1.0;
  } else {
    c.second_lhs = std::numeric_limits<double>::infinity();
  }
  if (s - a > 0.0) {
    c.third_lhs = m * l_f + m * m * l_f * l_f * (1.0 + kappa) * (1.0 + m) / (s - a);
    c.third = c.third_lhs < d.gamma2;
  } else {
    c.third_lhs = std::numeric_limits<double>::infinity();
  }
  return c;
}

double lp_predicted_rate(const DichotomyConstants& d, double l_f, double kappa) {
  const double m = d.m, s = d.gamma1 + d.gamma2;
  return d.gamma2 - m * l_f - m * m * l_f * l_f * (1.0 + kappa) * (1.0 + m) / (s - m * l_f * (1.0 + kappa));
}

double default_t_inf(const DichotomyConstants& d, double c_f, double tol) {
  double x = 2.0 * d.m * c_f / (d.gamma2 * 0.1 * tol);
  return std::max(1.0, x > 1.0 ? std::log(x) / d.gamma2 : 1.0);
}

namespace {

State apply_minus_inverse(const SplitSystem& sys, const MatP& a_inv, const State& v) {
  State out = State::zero(sys.n_plus(), sys.n_minus());
  out.p = -(a_inv * v.p);
  for (int j = 0; j < sys.n_minus(); ++j) out.q(j) = -v.q(j) / sys.minus_rates()(j);
  return out;
}

State residual(const SplitSystem& sys, const NonlinearityModel& f, const State& u) {
  State r = f(0.0, u);
  r.p += sys.a_plus() * u.p;
  for (int j = 0; j < sys.n_minus(); ++j) r.q(j) += sys.minus_rates()(j) * u.q(j);
  return r;
}

std::optional<State> newton_anchor(const SplitSystem& sys, const NonlinearityModel& f, State u) {
  const bool cq = sys.has_complex_rates();
  const int np = sys.n_plus(), nm = sys.n_minus();
  auto fr = [&](const Eigen::VectorXd& x) {
    return to_real(residual(sys, f, from_real(x, np, nm, cq)), cq);
  };
  Eigen::VectorXd x = to_real(u, cq);
  Eigen::VectorXd r = fr(x);
  for (int it = 0; it < 60 && r.norm() > 1e-11; ++it) {
    Eigen::MatrixXd jac(x.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      double h = 1e-7 * (1.0 + std::abs(x(j)));
      Eigen::VectorXd xh = x;
      xh(j) += h;
      jac.col(j) = (fr(xh) - r) / h;
    }
    Eigen::VectorXd dx = jac.fullPivLu().solve(-r);
    if (!dx.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool ok = false;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::VectorXd xn = x + lambda * dx;
      Eigen::VectorXd rn = fr(xn);
      if (rn.norm() < r.norm()) {
        x = xn;
        r = rn;
        ok = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!ok) break;
  }
  if (r.norm() > 1e-10) return std::nullopt;
  return from_real(x, np, nm, cq);
}

}  // namespace

AnchorResult find_anchor(const SplitSystem& sys, const NonlinearityModel& f) {
  if (!f.autonomous) throw ConfigError("find_anchor: equilibrium anchors need an autonomous field");
  if (!sys.hyperbolic()) throw HyperbolicityError("find_anchor: the linear part must be hyperbolic");
  MatP a_inv = MatP(Eigen::MatrixXd(sys.a_plus()).inverse());
  State u = sys.zero_state();
  double omega = 1.0;
  double prev = residual(sys, f, u).norm();
  int worse = 0;
  for (int it = 0; it < 5000 && prev > 1e-10; ++it) {
    State next = (1.0 - omega) * u + omega * apply_minus_inverse(sys, a_inv, f(0.0, u));
    double r = residual(sys, f, next).norm();
    if (r >= prev) {
      if (++worse >= 5) {
        omega *= 0.5;
        worse = 0;
      }
    } else {
      worse = 0;
    }
    u = next;
    prev = r;
    if (omega < 1e-6) break;
  }
  if (prev <= 1e-10) return {u, prev, "damped_iteration"};

  // Every bounded continuous f has an equilibrium in the ball ||A^{-1}|| C_f
  // (Brouwer); multi-start Newton inside it.
  double radius = std::max(1.0, Eigen::MatrixXd(a_inv).norm() * f.c_f);
  std::vector<State> seeds = {u, sys.zero_state()};
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 16; ++k) {
    State s = sys.zero_state();
    for (int i = 0; i < sys.n_plus(); ++i) s.p(i) = normal(rng);
    for (int j = 0; j < sys.n_minus(); ++j) s.q(j) = normal(rng);
    s *= radius / std::max(s.norm(), 1e-300) * (k + 1) / 16.0;
    seeds.push_back(s);
  }
  for (const State& s : seeds) {
    if (auto r = newton_anchor(sys, f, s)) {
      double res = residual(sys, f, *r).norm();
      if (res <= 1e-10) return {*r, res, "newton"};
    }
  }
  throw ConfigError("find_anchor: no equilibrium anchor converged");
}

GraphFn lp_map(const SplitSystem& sys, const NonlinearityModel& g, const DichotomyConstants& d,
               double l_f, const LPConfig& cfg, double t_inf, const GraphFn& sigma,
               LPMapStats* stats) {
  const std::size_t steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_inf / cfg.dt - 1e-9)));
  const double h = t_inf / static_cast<double>(steps);
  StepKernel k = StepKernel::make(sys, h);
  const double growth = d.m * l_f * (1.0 + cfg.kappa) - d.gamma1;
  GraphFn out(sigma.spec(), sigma.n_minus());
  std::vector<double> env_ratio(sigma.size(), 0.0);

  parallel_for(sigma.size(), cfg.workers, [&](std::size_t i) {
    VecP p0 = sigma.node(i);
    PlusPath path;
    try {
      path = backward_plus_solve(sys, g, sigma, p0, 0.0, t_inf, h);
    } catch (const DomainError& e) {
      throw DomainError("lp_map: node " + std::to_string(i) + ": " + e.what(), e.exit_time());
    }
    const std::size_t n = path.p.size() - 1;
    double worst = 0.0;
    double p0n = p0.norm();
    for (std::size_t j = 0; j <= n; ++j) {
      double env = d.m * std::exp(growth * (0.0 - path.times[j])) * p0n;
      double pn = path.p[j].norm();
      if (env > 0.0) worst = std::max(worst, pn / env);
      else if (pn > 1e-12) worst = std::numeric_limits<double>::infinity();
    }
    env_ratio[i] = worst;

    VecM acc = VecM::Zero(sigma.n_minus());
    VecM weight = VecM::Ones(sigma.n_minus());  // e^{-Lambda s_{j+1}}
    VecM g_next = g(path.times[n], State(path.p[n], sigma(path.p[n]))).q;
    for (std::size_t j = n; j-- > 0;) {
      VecM g_cur = g(path.times[j], State(path.p[j], sigma(path.p[j]))).q;
      acc += weight.cwiseProduct(k.phi1_minus.cwiseProduct(g_cur) +
                                 k.phi2_minus.cwiseProduct(g_next - g_cur));
      weight = weight.cwiseProduct(k.e_minus);
      g_next = g_cur;
    }
    out.value(i) = acc;
  });

  VecM offset = out(VecP::Zero(sigma.n_plus()));
  for (std::size_t i = 0; i < out.size(); ++i) out.value(i) -= offset;
  if (stats) {
    stats->max_backward_ratio = *std::max_element(env_ratio.begin(), env_ratio.end());
    stats->kappa_hat = out.kappa_hat();
    stats->sup_norm = out.sup_norm();
    stats->pin_offset = offset.norm();
  }
  return out;
}

LPResult lp_fixed_point(const SplitSystem& sys, const NonlinearityModel& f,
                        const DichotomyConstants& d, double l_f, const LPConfig& cfg) {
  LPResult res;
  res.constraints = lp_constraints(d, l_f, cfg.kappa);
  if (!res.constraints.all())
    throw ConfigError("lp_fixed_point: the Lipschitz constraints fail for this (L_f, kappa, M)");
  if (!(cfg.tol > 0.0)) throw ConfigError("lp_fixed_point: tol must be positive");
  res.anchor = cfg.anchor ? *cfg.anchor : find_anchor(sys, f).anchor;
  NonlinearityModel g = translated(f, res.anchor);
  res.t_inf = cfg.t_inf > 0.0 ? cfg.t_inf : default_t_inf(d, f.c_f, cfg.tol);
  const double bound = 2.0 * d.m * f.c_f / d.gamma2;

  GraphFn sigma(cfg.grid, sys.n_minus());
  sigma = sigma.shifted(VecP(-res.anchor.p));
  const VecP origin = VecP::Zero(sys.n_plus());
  double prev_lb = 0.0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    LPMapStats st;
    GraphFn next = lp_map(sys, g, d, l_f, cfg, res.t_inf, sigma, &st);
    LPLogRow row;
    row.iteration = it;
    row.sup_diff = sup_distance(next, sigma);
    row.lb_diff = weighted_distance(next, sigma, origin);
    row.kappa_hat = st.kappa_hat;
    row.sup_norm = st.sup_norm;
    res.max_backward_ratio = std::max(res.max_backward_ratio, st.max_backward_ratio);
    if (st.kappa_hat > cfg.kappa * (1.0 + 1e-6) || st.sup_norm > bound * (1.0 + 1e-6))
      res.membership_ok = false;
    if (it == 1) res.first_step_norm = row.sup_diff;
    if (it > 1 && prev_lb > 1e-12) {
      row.ratio = row.lb_diff / prev_lb;
      res.contraction = std::max(res.contraction, row.ratio);
      const LPLogRow& last = res.log.back();
      if (last.sup_diff > 1e-12) res.sup_ratio = std::max(res.sup_ratio, row.sup_diff / last.sup_diff);
      if (row.ratio >= 1.0 && row.lb_diff > 1e-10)
        throw NonContractionError("lp_fixed_point: Picard step did not contract", row.ratio);
    }
    prev_lb = row.lb_diff;
    res.log.push_back(row);
    sigma = std::move(next);
    res.iterations = it;
    if (row.sup_diff <= cfg.tol) break;
    if (it == cfg.max_iter)
      throw SolverError("lp_fixed_point: no convergence within max_iter", row.sup_diff);
  }
  res.sigma_star = sigma;
  res.graph = sigma.shifted(res.anchor.p);
  for (std::size_t i = 0; i < res.graph.size(); ++i) res.graph.value(i) += res.anchor.q;
  return res;
}

PrefactorCheck lp_prefactor_check(const LPResult& res, const DichotomyConstants& d, double c_f,
                                  const std::vector<State>& samples) {
  PrefactorCheck c;
  for (const State& u : samples) {
    double offset = (u.q - res.graph(u.p)).norm();
    double pref = d.m * (u.norm() + 3.0 * d.m * c_f / d.gamma2);
    double ratio = offset / pref;
    c.worst_ratio = std::max(c.worst_ratio, ratio);
    if (ratio > 1.0) ++c.violations;
    ++c.samples;
  }
  return c;
}

RateFit lp_attraction_rate(const SplitSystem& sys, const NonlinearityModel& f, const LPResult& res,
                           const std::vector<State>& samples, double horizon, double dt,
                           double probe_dt, int workers) {
  return attraction_rate(sys, f, res.graph, samples, horizon, dt, probe_dt, 1e-12, workers);
}

}  // namespace growup
