#include "growup/infinity.hpp"

#include "growup/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace growup {

namespace {

VecP sphere_rhs(const MatP& a, const VecP& x, const VecP& h) {
  VecP ax = a * x;
  VecP g = h - h.dot(x) * x;
  return VecP(ax - ax.dot(x) * x + g);
}

}  // namespace

SpherePath sphere_flow(const SplitSystem& sys, const NonlinearityModel& f, const Trajectory& traj,
                       const DichotomyConstants& dich) {
  if (traj.size() < 2) throw ConfigError("sphere_flow: trajectory needs at least two samples");
  const double threshold = dich.m * f.c_f / dich.gamma1;
  const std::size_t n = traj.size();
  SpherePath path;
  path.times = traj.times;
  std::vector<VecP> h(n);
  for (std::size_t k = 0; k < n; ++k) {
    const State& u = traj.states[k];
    double pn = u.p.norm();
    if (!(pn > threshold))
      throw DomainError("sphere_flow: trajectory is not in the grow-up regime", traj.times[k]);
    VecP x = u.p / pn;
    path.direct.push_back(x);
    h[k] = f(traj.times[k], u).p / pn;
    VecP g = h[k] - h[k].dot(x) * x;
    path.g_norms.push_back(g.norm());
  }
  if (sys.n_plus() == 1) {
    path.integrated = path.direct;
  } else {
    const MatP& a = sys.a_plus();
    VecP x = path.direct[0];
    path.integrated.push_back(x);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      double dt = traj.times[k + 1] - traj.times[k];
      VecP hm = 0.5 * (h[k] + h[k + 1]);
      VecP k1 = sphere_rhs(a, x, h[k]);
      VecP k2 = sphere_rhs(a, VecP(x + 0.5 * dt * k1), hm);
      VecP k3 = sphere_rhs(a, VecP(x + 0.5 * dt * k2), hm);
      VecP k4 = sphere_rhs(a, VecP(x + dt * k3), h[k + 1]);
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      path.max_norm_drift = std::max(path.max_norm_drift, std::abs(x.norm() - 1.0));
      x /= x.norm();
      path.integrated.push_back(x);
    }
  }
  path.c_b = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    path.max_discrepancy = std::max(path.max_discrepancy, (path.direct[k] - path.integrated[k]).norm());
    path.c_b = std::min(path.c_b, std::exp(-dich.gamma1 * traj.times[k]) * traj.states[k].p.norm());
  }
  for (std::size_t k = 0; k < n; ++k) {
    double bound = 2.0 * f.c_f / path.c_b * std::exp(-dich.gamma1 * traj.times[k]);
    if (path.g_norms[k] > bound * (1.0 + 1e-9)) ++path.envelope_violations;
  }
  return path;
}

VecP limit_flow_step(const MatP& a_plus, const VecP& y, double dt, double* drift) {
  const VecP zero = VecP::Zero(y.size());
  VecP k1 = sphere_rhs(a_plus, y, zero);
  VecP k2 = sphere_rhs(a_plus, VecP(y + 0.5 * dt * k1), zero);
  VecP k3 = sphere_rhs(a_plus, VecP(y + 0.5 * dt * k2), zero);
  VecP k4 = sphere_rhs(a_plus, VecP(y + dt * k3), zero);
  VecP out = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (drift) *drift = std::abs(out.norm() - 1.0);
  return VecP(out / out.norm());
}

VecP limit_flow(const MatP& a_plus, VecP y, double t, double dt) {
  if (!(t >= 0.0) || !(dt > 0.0)) throw ConfigError("limit_flow: bad time or step");
  if (t == 0.0) return y;
  std::size_t n = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
  double h = t / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) y = limit_flow_step(a_plus, y, h);
  return y;
}

double fit_decay_exponent(const std::vector<double>& times, const std::vector<double>& values,
                          double t_from) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < times.size() && k < values.size(); ++k)
    if (times[k] >= t_from && values[k] > 0.0) {
      xs.push_back(times[k]);
      ys.push_back(std::log(values[k]));
    }
  if (xs.size() < 2) throw InconclusiveError("fit_decay_exponent: fewer than two usable points");
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
  return -sxy / sxx;
}

State slowest_start(const SplitSystem& sys, const NonlinearityModel& f, double rho) {
  const Eigen::MatrixXd a = sys.a_plus();
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i).imag()) > 1e-12) continue;
    if (best < 0 || es.eigenvalues()(i).real() < es.eigenvalues()(best).real()) best = i;
  }
  if (best < 0) throw ConfigError("slowest_start: no real expanding eigenvalue");
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  v /= v.norm();
  State u = sys.zero_state();
  VecP forcing = f(0.0, u).p;
  u.p = VecP(-a.partialPivLu().solve(Eigen::VectorXd(forcing)) + rho * v);
  return u;
}

PointCloud omega_infty(const AbsorbingSetup& setup, const NonlinearityModel& f,
                       const SampledSet& set, double horizon, double merge_eps,
                       const OmegaInfinityOptions& opts) {
  SetClassification c = classify(setup, f, set, horizon, setup.family.r0, opts.classify);
  if (c.verdict != Verdict::Escaping)
    throw ConfigError("omega_infty: the set is " + to_string(c.verdict) + ", not escaping");
  std::vector<double> snaps = opts.snapshot_times.empty() ? std::vector<double>{horizon}
                                                          : opts.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  if (snaps.front() < 0.0 || snaps.back() > horizon)
    throw ConfigError("omega_infty: snapshot times must lie in [0, horizon]");
  Integrator integ(setup.sys, opts.dt);
  std::vector<std::vector<Eigen::VectorXd>> pts(set.samples.size());
  parallel_for(set.samples.size(), opts.workers, [&](std::size_t i) {
    State u = set.samples[i];
    double t = 0.0;
    for (double s : snaps) {
      u = integ.flow(f, u, t, s - t);
      t = s;
      pts[i].push_back(Eigen::VectorXd(u.p / u.p.norm()));
    }
  });
  std::vector<Eigen::VectorXd> all;
  for (auto& v : pts) all.insert(all.end(), v.begin(), v.end());
  return cluster_points(all, merge_eps);
}

double limit_flow_invariance(const MatP& a_plus, const PointCloud& cloud, double tau, double dt) {
  std::vector<Eigen::VectorXd> moved;
  for (const auto& x : cloud.points)
    moved.push_back(Eigen::VectorXd(limit_flow(a_plus, VecP(x), tau, dt)));
  return hausdorff(moved, cloud.points);
}

namespace {

int numeric_rank(const Eigen::MatrixXcd& m, double scale) {
  // Absolute threshold: powers of a nilpotent part collapse to rounding level.
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  return static_cast<int>((sv.array() > 1e-6 * std::max(1.0, scale)).count());
}

}  // namespace

JordanReport jordan_prediction(const MatP& a_plus) {
  const Eigen::MatrixXd a = a_plus;
  const int n = static_cast<int>(a.rows());
  JordanReport rep;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXcd ev = es.eigenvalues();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
  double smin = svd.singularValues().minCoeff();
  rep.condition = smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                             : std::numeric_limits<double>::infinity();
  rep.ill_conditioned = rep.condition > 1e8;

  const double scale = a.norm();
  const double tol = 1e-6 * std::max(1.0, scale);
  std::vector<cplx> distinct;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    bool seen = false;
    for (const cplx& d : distinct) seen = seen || std::abs(d - ev(i)) <= tol;
    if (!seen) distinct.push_back(ev(i));
  }
  std::sort(distinct.begin(), distinct.end(), [](const cplx& x, const cplx& y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  const Eigen::MatrixXcd ac = a.cast<cplx>();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  for (const cplx& lam : distinct) {
    EigenGroup* g = nullptr;
    for (auto& e : rep.groups)
      if (std::abs(e.real_part - lam.real()) <= tol) g = &e;
    if (!g) {
      rep.groups.push_back({});
      g = &rep.groups.back();
      g->real_part = lam.real();
    }
    g->eigenvalues.push_back(lam);
    if (std::abs(lam.imag()) > tol) g->complex = true;
    if (lam.imag() < -tol) continue;  // conjugate of a processed eigenvalue
    // Counts are real dimensions, so a conjugate pair contributes twice.
    const int pair = lam.imag() > tol ? 2 : 1;
    Eigen::MatrixXcd b = ac - lam * id;
    Eigen::MatrixXcd pw = id;
    std::vector<int> ranks = {n};
    for (int k = 1; k <= n; ++k) {
      pw = pw * b;
      ranks.push_back(numeric_rank(pw, std::pow(std::max(1.0, scale), k)));
      if (ranks[k] == ranks[k - 1]) break;
    }
    int alg = n - ranks.back();
    int geo = n - ranks[1];
    // Blocks of size >= k: r_{k-1} - r_k.
    std::vector<int> ge;
    for (std::size_t k = 1; k < ranks.size(); ++k) ge.push_back(ranks[k - 1] - ranks[k]);
    for (std::size_t k = 0; k < ge.size(); ++k) {
      int exactly = ge[k] - (k + 1 < ge.size() ? ge[k + 1] : 0);
      for (int c = 0; c < exactly * pair; ++c) g->block_sizes.push_back(static_cast<int>(k) + 1);
    }
    g->algebraic += pair * alg;
    g->geometric += pair * geo;
  }
  for (auto& g : rep.groups) {
    std::sort(g.block_sizes.begin(), g.block_sizes.end(), std::greater<int>());
    if (g.complex) {
      g.invariant_set = "rotating invariant circle (possibly recurrent)";
    } else if (g.geometric == 1 && g.algebraic == 1) {
      g.invariant_set = "pair of fixed points";
    } else if (g.geometric == 1) {
      g.invariant_set = "pair of fixed points, parabolic approach along the Jordan chain";
    } else {
      g.invariant_set = "sphere of fixed points of dimension " + std::to_string(g.geometric - 1);
    }
  }
  for (std::size_t i = 0; i + 1 < rep.groups.size(); ++i)
    rep.connections.push_back("Re " + std::to_string(rep.groups[i].real_part) + " -> Re " +
                              std::to_string(rep.groups[i + 1].real_part));
  return rep;
}

namespace {

double angle_of(const VecP& x) { return std::atan2(x(1), x(0)); }

double circle_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * M_PI);
  return std::min(d, 2.0 * M_PI - d);
}

}  // namespace

CoverageWitness sphere_coverage(const SplitSystem& sys, const NonlinearityModel& f,
                                double ring_radius, const std::vector<double>& probe_times,
                                double resolution, double dt, std::size_t max_samples,
                                int workers) {
  if (sys.n_plus() > 2) throw ConfigError("sphere_coverage: implemented for n_plus <= 2");
  if (!(resolution > 0.0) || !(ring_radius > 0.0)) throw ConfigError("sphere_coverage: bad inputs");
  Integrator integ(sys, dt);
  CoverageWitness w;
  w.resolution = resolution;
  w.probe_times = probe_times;
  w.ok = true;
  for (double t : probe_times) {
    auto image = [&](double phi) {
      State u = sys.zero_state();
      if (sys.n_plus() == 1) u.p(0) = phi < M_PI ? ring_radius : -ring_radius;
      else u.p << ring_radius * std::cos(phi), ring_radius * std::sin(phi);
      State v = t > 0.0 ? integ.flow(f, u, 0.0, t) : u;
      return VecP(v.p / v.p.norm());
    };
    if (sys.n_plus() == 1) {
      VecP a = image(0.0), b = image(1.5 * M_PI);
      double gap = std::max(std::min((a - VecP::Ones(1)).norm(), (b - VecP::Ones(1)).norm()),
                            std::min((a + VecP::Ones(1)).norm(), (b + VecP::Ones(1)).norm()));
      w.worst_gap.push_back(gap);
      w.samples.push_back(2);
      w.ok = w.ok && gap <= resolution;
      continue;
    }
    std::vector<std::pair<double, double>> ring;  // (phi, image angle)
    const std::size_t n0 = 64;
    ring.resize(n0);
    parallel_for(n0, workers, [&](std::size_t i) {
      double phi = 2.0 * M_PI * i / n0;
      ring[i] = {phi, angle_of(image(phi))};
    });
    while (ring.size() < max_samples) {
      std::vector<double> mids;
      for (std::size_t i = 0; i < ring.size(); ++i) {
        const auto& a = ring[i];
        const auto& b = ring[(i + 1) % ring.size()];
        if (circle_gap(a.second, b.second) > 0.5 * resolution) {
          double pb = i + 1 == ring.size() ? b.first + 2.0 * M_PI : b.first;
          mids.push_back(0.5 * (a.first + pb));
        }
      }
      if (mids.empty()) break;
      std::vector<std::pair<double, double>> added(mids.size());
      parallel_for(mids.size(), workers, [&](std::size_t i) {
        added[i] = {mids[i], angle_of(image(mids[i]))};
      });
      ring.insert(ring.end(), added.begin(), added.end());
      std::sort(ring.begin(), ring.end());
    }
    std::vector<double> angles;
    for (const auto& r : ring) angles.push_back(r.second);
    std::sort(angles.begin(), angles.end());
    const std::size_t net = static_cast<std::size_t>(std::ceil(2.0 * M_PI / resolution));
    double worst = 0.0;
    for (std::size_t j = 0; j < net; ++j) {
      double th = -M_PI + 2.0 * M_PI * j / net;
      auto it = std::lower_bound(angles.begin(), angles.end(), th);
      double best = std::min(circle_gap(th, it == angles.end() ? angles.front() : *it),
                             circle_gap(th, it == angles.begin() ? angles.back() : *(it - 1)));
      // Chord length between unit vectors.
      worst = std::max(worst, 2.0 * std::sin(0.5 * best));
    }
    w.worst_gap.push_back(worst);
    w.samples.push_back(ring.size());
    w.ok = w.ok && worst <= resolution;
  }
  return w;
}

}  // namespace growup
