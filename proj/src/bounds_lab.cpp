#include "growup/bounds_lab.hpp"

#include "growup/lyapunov_perron.hpp"
#include "growup/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace growup {

namespace {

void require_positive(double g1, double g2, const char* who) {
  if (!(g1 > 0.0) || !(g2 > 0.0) || !std::isfinite(g1) || !std::isfinite(g2))
    throw ConfigError(std::string(who) + ": rates must be positive");
}

// Maximizes h over log kappa in [1e-3, 1e3]: 1000-point grid, then golden
// section on the bracketing cell.
template <class H>
std::pair<double, double> maximize_kappa(H h) {
  const int n = 2000;
  const double lo = std::log(1e-6), hi = std::log(1e6);
  auto at = [&](int i) { return lo + (hi - lo) * i / (n - 1); };
  int best = 0;
  double best_v = -1.0;
  for (int i = 0; i < n; ++i) {
    double v = h(std::exp(at(i)));
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = at(std::max(0, best - 1)), b = at(std::min(n - 1, best + 1));
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = h(std::exp(c)), fd = h(std::exp(d));
  while (b - a > 1e-12) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = h(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = h(std::exp(d));
    }
  }
  double k = std::exp(0.5 * (a + b));
  double v = h(k);
  if (best_v > v) return {std::exp(at(best)), best_v};
  return {k, v};
}

}  // namespace

double gt_bound(double gamma1, double gamma2) {
  require_positive(gamma1, gamma2, "gt_bound");
  return gamma1 >= gamma2 ? gamma1 * gamma2 / (gamma1 + gamma2) : (gamma1 + gamma2) / 4.0;
}

double gt_variational(double gamma1, double gamma2) {
  require_positive(gamma1, gamma2, "gt_variational");
  return maximize_kappa([&](double k) {
           return std::min(k * gamma2 / (1.0 + k), k * (gamma1 + gamma2) / ((1.0 + k) * (1.0 + k)));
         }).second;
}

std::string to_string(LPVariant v) { return v == LPVariant::Full ? "full" : "first_second"; }

LPVariant parse_lp_variant(const std::string& name) {
  if (name == "full") return LPVariant::Full;
  if (name == "first_second") return LPVariant::FirstSecond;
  throw ConfigError("unknown LP variant: " + name);
}

double lp_max_lipschitz(double gamma1, double gamma2, double m, double kappa, LPVariant variant) {
  DichotomyConstants d{m, 0.0, gamma1, gamma2};
  auto ok = [&](double l) {
    LPConstraints c = lp_constraints(d, l, kappa);
    return c.first && c.second && (variant == LPVariant::FirstSecond || c.third);
  };
  double lo = 0.0, hi = (gamma1 + gamma2) / m / (2.0 * (1.0 + kappa));
  if (ok(hi)) return hi;
  while (hi - lo > 1e-9 * std::max(1.0, hi)) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

ThresholdReport lp_bound(double gamma1, double gamma2, double m, LPVariant variant) {
  require_positive(gamma1, gamma2, "lp_bound");
  if (!(m >= 1.0)) throw ConfigError("lp_bound: M must be at least 1");
  ThresholdReport r;
  r.gamma1 = gamma1;
  r.gamma2 = gamma2;
  r.m_const = m;
  r.variant = variant;
  r.gt_value = gt_bound(gamma1, gamma2);
  auto [k, v] = maximize_kappa(
      [&](double kappa) { return lp_max_lipschitz(gamma1, gamma2, m, kappa, variant); });
  r.lp_kappa_star = k;
  r.lp_value = v;
  r.infeasible = !(v > 0.0);
  if (r.infeasible) r.lp_value = 0.0;
  return r;
}

SimplifiedBound lp_bound_simplified(double m) {
  if (!(m >= 1.0)) throw ConfigError("lp_bound_simplified: M must be at least 1");
  SimplifiedBound b;
  b.kappa0 = 2.0 * m / (m + 1.0 + std::sqrt((m + 1.0) * (m + 1.0) + 4.0 * m));
  const double k = b.kappa0;
  b.ours = 1.0 / (std::min(1.0 / (2.0 * (m + 1.0 + k)), k / ((m + k) * (1.0 + k))) / m);
  b.comparator = std::max(m * m + 2.0 * m + std::sqrt(8.0 * m * m * m), 3.0 * m * m + 2.0 * m);
  return b;
}

double lp_bound_sharp_m1() {
  // gamma1 + gamma2 = 1, so the ratio is 1 / L_f.
  double l = maximize_kappa([](double k) {
               return lp_max_lipschitz(0.5, 0.5, 1.0, k, LPVariant::FirstSecond);
             }).second;
  return 1.0 / l;
}

NonlinearityModel cutoff(const NonlinearityModel& f, double r_cut) {
  if (!(r_cut > 0.0)) throw ConfigError("cutoff: r_cut must be positive");
  NonlinearityModel out = f;
  out.name = f.name + "_cutoff";
  Field inner = f.eval;
  out.eval = [inner, r_cut](double t, const State& u) {
    double pn = u.p.norm();
    if (pn >= r_cut) return inner(t, u);
    if (pn == 0.0) return State::zero(u.n_plus(), u.n_minus());
    State v(VecP(u.p * (r_cut / pn)), u.q);
    State w = inner(t, v);
    w *= pn / r_cut;
    return w;
  };
  out.lipschitz = {LipschitzClaim::Region::Strip, 5.0 * f.lipschitz.constant, f.lipschitz.parameter};
  if (out.f0) out.f0 = out.eval(0.0, State::zero(out.f0->n_plus(), out.f0->n_minus()));
  return out;
}

double default_cutoff_radius(double c_f, double l_f) {
  if (!(l_f > 0.0)) throw ConfigError("default_cutoff_radius: L_f must be positive");
  return 2.0 * c_f / l_f;
}

std::vector<StatePair> sample_strip_pairs(const SplitSystem& sys, double p_radius, double q_height,
                                          std::size_t count, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool cq = sys.has_complex_rates();
  auto ball_point = [&](int dim, double radius) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = normal(rng);
    double n = x.norm();
    if (n > 0.0) x *= radius * std::pow(unit(rng), 1.0 / dim) / n;
    return x;
  };
  auto draw_q = [&]() {
    VecM q = VecM::Zero(sys.n_minus());
    Eigen::VectorXd x = ball_point(sys.n_minus() * (cq ? 2 : 1), q_height);
    for (int j = 0; j < sys.n_minus(); ++j) q(j) = cplx(x(j), cq ? x(sys.n_minus() + j) : 0.0);
    return q;
  };
  std::vector<StatePair> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    State a(VecP(ball_point(sys.n_plus(), p_radius)), draw_q());
    State b;
    // Half the pairs are close, to probe the local constant.
    if (k % 2 == 0) {
      double scale = p_radius * std::pow(10.0, -4.0 * unit(rng));
      b = State(VecP(a.p + ball_point(sys.n_plus(), scale)), draw_q());
      b.q = a.q + (b.q - a.q) * (scale / std::max(p_radius, 1e-300));
    } else {
      b = State(VecP(ball_point(sys.n_plus(), p_radius)), draw_q());
    }
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

double max_lipschitz_ratio(const NonlinearityModel& f, const std::vector<StatePair>& pairs) {
  double worst = 0.0;
  for (const auto& [a, b] : pairs) {
    double d = (a - b).norm();
    if (d <= 1e-14) continue;
    worst = std::max(worst, (f(0.0, a) - f(0.0, b)).norm() / d);
  }
  return worst;
}

DecayPrediction decay_exponent(double gamma0, double gamma1, double gamma2,
                               const DecayEnvelope& envelope) {
  if (!(gamma0 > 0.0) || !(gamma1 > 0.0) || !(gamma2 > 0.0))
    throw ConfigError("decay_exponent: rates must be positive");
  DecayPrediction d;
  if (envelope.kind == DecayEnvelope::Kind::Slow) {
    d.slow = true;
    d.exponent = gamma1 / gamma0;
    d.descriptor = "thickness ~ M2 H(M3 |p|^" + std::to_string(d.exponent) + ")";
    return d;
  }
  const double a = gamma1 * envelope.alpha;
  if (gamma2 > a) {
    d.beta = a / gamma0;
  } else {
    d.beta = gamma2 / gamma0;
    d.equality = gamma2 == a;
  }
  d.descriptor = "thickness ~ M1 |p|^-" + std::to_string(d.beta);
  return d;
}

std::vector<FiberSamples> sample_ring_fibers(const SplitSystem& sys, const NonlinearityModel& f,
                                             const std::vector<double>& shells,
                                             const RingOptions& opts) {
  if (!(opts.ring_radius > 0.0)) throw ConfigError("sample_ring_fibers: ring radius must be positive");
  if (opts.q_levels < 2 || opts.directions < 1) throw ConfigError("sample_ring_fibers: bad sampling");
  const int np = sys.n_plus(), nm = sys.n_minus();
  std::vector<VecP> dirs;
  if (np == 1) {
    dirs = {VecP::Ones(1), VecP(-VecP::Ones(1))};
  } else if (np == 2) {
    for (int k = 0; k < opts.directions; ++k) {
      double th = 2.0 * M_PI * k / opts.directions;
      VecP d(2);
      d << std::cos(th), std::sin(th);
      dirs.push_back(d);
    }
  } else {
    for (int i = 0; i < np; ++i)
      for (double s : {1.0, -1.0}) {
        VecP d = VecP::Zero(np);
        d(i) = s;
        dirs.push_back(d);
      }
  }
  std::vector<VecM> q0s;
  for (int j = 0; j < nm; ++j)
    for (int l = 0; l < opts.q_levels; ++l) {
      VecM q = VecM::Zero(nm);
      q(j) = opts.q_height * (-1.0 + 2.0 * l / (opts.q_levels - 1));
      if (j > 0 && q(j) == cplx(0.0)) continue;
      q0s.push_back(q);
    }

  double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sys.plus_eigenvalues().size(); ++i) {
    lmax = std::max(lmax, sys.plus_eigenvalues()(i).real());
    lmin = std::min(lmin, sys.plus_eigenvalues()(i).real());
  }
  const double big_r = opts.ring_radius;
  GridSpec box = GridSpec::cube(np, 2.0 * big_r, 3);

  struct Job {
    std::size_t fiber;
    std::size_t level;
  };
  std::vector<FiberSamples> out;
  for (double r : shells)
    for (const VecP& d : dirs) out.push_back({r, VecP(r * d), std::vector<VecM>(q0s.size())});
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t l = 0; l < q0s.size(); ++l) jobs.push_back({i, l});

  parallel_for(jobs.size(), opts.workers, [&](std::size_t j) {
    const FiberSamples& fs = out[jobs[j].fiber];
    const VecM& q0 = q0s[jobs[j].level];
    GraphFn sigma = GraphFn::constant(box, q0);
    auto excess = [&](double t, VecM* q_end) {
      FiberResult res = fiber_solve(sys, f, sigma, 0.0, t, fs.p, opts.fiber);
      if (q_end) *q_end = res.q;
      return std::log(sys.plus_norm(res.p_pre) / big_r);
    };
    // Linear bracket: ||p0|| ~ r e^{-lambda t}.
    double ln_ratio = std::log(fs.r / big_r);
    double ta = std::max(1e-3, 0.5 * ln_ratio / lmax), tb = 2.0 * ln_ratio / lmin + 1.0;
    double fa = excess(ta, nullptr), fb = excess(tb, nullptr);
    int grow = 0;
    while (fa < 0.0 && grow++ < 20) {
      ta *= 0.5;
      fa = excess(ta, nullptr);
    }
    grow = 0;
    while (fb > 0.0 && grow++ < 20) {
      tb *= 1.5;
      fb = excess(tb, nullptr);
    }
    if (fa < 0.0 || fb > 0.0)
      throw SolverError("sample_ring_fibers: could not bracket the ring crossing time", std::min(std::abs(fa), std::abs(fb)));
    // Illinois-modified regula falsi.
    int side = 0;
    double tc = tb, fc = fb;
    for (int it = 0; it < opts.max_secant; ++it) {
      tc = (ta * fb - tb * fa) / (fb - fa);
      fc = excess(tc, nullptr);
      if (std::abs(fc) < opts.t_tol || tb - ta < opts.t_tol) break;
      if (fc > 0.0) {
        ta = tc;
        fa = fc;
        if (side == 1) fb *= 0.5;
        side = 1;
      } else {
        tb = tc;
        fb = fc;
        if (side == -1) fa *= 0.5;
        side = -1;
      }
    }
    VecM q_end;
    excess(tc, &q_end);
    out[jobs[j].fiber].q_values[jobs[j].level] = q_end;
  });
  return out;
}

ThicknessFit measure_thickness(const std::vector<FiberSamples>& fibers) {
  std::map<double, ShellThickness> by_shell;
  std::map<double, std::size_t> counts;
  for (const FiberSamples& fs : fibers) {
    counts[fs.r] += 0;
    if (fs.q_values.size() < 2) continue;
    double diam = 0.0;
    for (std::size_t a = 0; a < fs.q_values.size(); ++a)
      for (std::size_t b = a + 1; b < fs.q_values.size(); ++b)
        diam = std::max(diam, (fs.q_values[a] - fs.q_values[b]).norm());
    ShellThickness& s = by_shell[fs.r];
    s.r = fs.r;
    s.diameter = std::max(s.diameter, diam);
    ++s.fibers;
    ++counts[fs.r];
  }
  ThicknessFit fit;
  for (const auto& [r, c] : counts) {
    if (c == 0) fit.skipped.push_back(r);
    else fit.shells.push_back(by_shell[r]);
  }
  std::vector<double> xs, ys;
  for (const auto& s : fit.shells)
    if (s.diameter > 0.0) {
      xs.push_back(std::log(s.r));
      ys.push_back(std::log(s.diameter));
    }
  if (xs.size() < 2) throw InconclusiveError("measure_thickness: fewer than two usable shells");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

std::vector<ThresholdRow> threshold_table(int workers) {
  const double g[3] = {0.1, 1.0, 10.0};
  std::vector<ThresholdRow> rows(9);
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    ThresholdRow& r = rows[i];
    r.gamma2 = g[i / 3];
    r.gamma1 = g[i % 3];
    r.lp_full = lp_bound(r.gamma1, r.gamma2, 1.0, LPVariant::Full).lp_value;
    r.lp_first_second = lp_bound(r.gamma1, r.gamma2, 1.0, LPVariant::FirstSecond).lp_value;
    r.gt = gt_bound(r.gamma1, r.gamma2);
  });
  return rows;
}

std::vector<RemarkRow> remark_table() {
  std::vector<RemarkRow> rows;
  for (double m : {1.0, 2.0, 4.0}) {
    SimplifiedBound b = lp_bound_simplified(m);
    RemarkRow r{m, b.comparator, b.ours, 0.0, 0.0};
    if (m == 1.0) {
      r.gt = 2.0 / gt_bound(1.0, 1.0);
      r.sharp = kSharpBoundM1;
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace growup
