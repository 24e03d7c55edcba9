#include "growup/operator_core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace growup {

namespace {

constexpr double kExpGuard = 700.0;
constexpr double kNeutralTol = 1e-8;

Eigen::MatrixXd dense(const MatP& a) { return Eigen::MatrixXd(a); }

std::vector<Eigen::VectorXd> cube_vertices(int dim) {
  std::vector<Eigen::VectorXd> out;
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    out.push_back(v);
  }
  return out;
}

std::vector<Eigen::VectorXd> cross_vertices(int dim) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < dim; ++i) {
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
      v(i) = s;
      out.push_back(v);
    }
  }
  return out;
}

// Facets given as outward normals n with facet {x : n.x = 1}.
double min_facet_distance(const std::vector<Eigen::VectorXd>& normals) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& n : normals) d = std::min(d, 1.0 / n.norm());
  return d;
}

double max_vertex_norm(const std::vector<Eigen::VectorXd>& vertices) {
  double d = 0.0;
  for (const auto& v : vertices) d = std::max(d, v.norm());
  return d;
}

}  // namespace

NormChoice parse_norm_choice(const std::string& name) {
  if (name == "euclidean" || name.empty()) return NormChoice::Euclidean;
  if (name == "max" || name == "linf") return NormChoice::Max;
  if (name == "sum" || name == "l1") return NormChoice::Sum;
  throw ConfigError("unknown norm_choice '" + name + "'");
}

std::string to_string(NormChoice n) {
  switch (n) {
    case NormChoice::Euclidean: return "euclidean";
    case NormChoice::Max: return "max";
    case NormChoice::Sum: return "sum";
  }
  return "euclidean";
}

NormConstants norm_constants(NormChoice norm, int dim) {
  if (norm == NormChoice::Euclidean) return {1.0, 1.0};
  if (dim > 3) throw ConfigError("polytope norms are supported only for dim(E+) <= 3");
  // Unit ball of the max norm is the cube (facet normals = +-e_i); the
  // sum-norm ball is the cross-polytope (facet normals = sign vectors).
  std::vector<Eigen::VectorXd> vertices;
  std::vector<Eigen::VectorXd> normals;
  if (norm == NormChoice::Max) {
    vertices = cube_vertices(dim);
    normals = cross_vertices(dim);
  } else {
    vertices = cross_vertices(dim);
    normals = cube_vertices(dim);
  }
  // c1 ||p|| <= |p| <= c2 ||p||: on the unit sphere of ||.||, |p| ranges
  // from the facet distance to the farthest vertex.
  return {min_facet_distance(normals), max_vertex_norm(vertices)};
}

SplitSystem SplitSystem::build(const MatP& a_plus, const VecM& minus_rates, NormChoice norm,
                               bool check) {
  if (a_plus.rows() < 1 || a_plus.rows() != a_plus.cols())
    throw ConfigError("a_plus must be a non-empty square matrix");
  if (a_plus.rows() > kMaxPlus) throw ConfigError("dim(E+) exceeds supported maximum");
  if (minus_rates.size() > kMaxMinus) throw ConfigError("dim(E-) exceeds supported maximum");
  if (!a_plus.allFinite()) throw ConfigError("a_plus has non-finite entries");

  SplitSystem s;
  s.a_plus_ = a_plus;
  s.minus_rates_ = minus_rates;
  s.norm_ = norm;
  s.norm_constants_ = growup::norm_constants(norm, static_cast<int>(a_plus.rows()));
  s.plus_eigs_ = Eigen::EigenSolver<Eigen::MatrixXd>(dense(a_plus)).eigenvalues();

  bool ok = true;
  for (Eigen::Index i = 0; i < s.plus_eigs_.size(); ++i)
    if (s.plus_eigs_(i).real() <= kNeutralTol) ok = false;
  for (Eigen::Index j = 0; j < minus_rates.size(); ++j)
    if (minus_rates(j).real() >= -kNeutralTol) ok = false;
  s.hyperbolic_ = ok;
  if (check && !ok)
    throw HyperbolicityError(
        "spectrum violates the split: a_plus needs Re > 0 and minus rates Re < 0");
  return s;
}

SplitSystem SplitSystem::make(const MatP& a_plus, const VecM& minus_rates, NormChoice norm) {
  return build(a_plus, minus_rates, norm, true);
}

SplitSystem SplitSystem::make_unchecked(const MatP& a_plus, const VecM& minus_rates,
                                        NormChoice norm) {
  return build(a_plus, minus_rates, norm, false);
}

bool SplitSystem::has_complex_rates() const {
  for (Eigen::Index j = 0; j < minus_rates_.size(); ++j)
    if (minus_rates_(j).imag() != 0.0) return true;
  return false;
}

double SplitSystem::max_abs_real_part() const {
  double b = 0.0;
  for (Eigen::Index i = 0; i < plus_eigs_.size(); ++i)
    b = std::max(b, std::abs(plus_eigs_(i).real()));
  return b;
}

double SplitSystem::plus_norm(const VecP& p) const {
  switch (norm_) {
    case NormChoice::Euclidean: return p.norm();
    case NormChoice::Max: return p.lpNorm<Eigen::Infinity>();
    case NormChoice::Sum: return p.lpNorm<1>();
  }
  return p.norm();
}

MatP propagator_plus(const SplitSystem& sys, double t) {
  if (!std::isfinite(t)) throw RangeError("propagator_plus: non-finite time");
  double bound = sys.max_abs_real_part();
  if (std::abs(t) * bound > kExpGuard) throw RangeError("propagator_plus: exponent overflow guard");
  Eigen::MatrixXd at = dense(sys.a_plus()) * t;
  return MatP(at.exp());
}

VecM propagator_minus(const SplitSystem& sys, double t) {
  if (!(t >= 0.0)) throw RangeError("propagator_minus: negative time");
  VecM out(sys.n_minus());
  for (int j = 0; j < sys.n_minus(); ++j) out(j) = std::exp(sys.minus_rates()(j) * t);
  return out;
}

std::vector<double> default_dichotomy_grid(const SplitSystem& sys) {
  double smallest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sys.plus_eigenvalues().size(); ++i)
    smallest = std::min(smallest, std::abs(sys.plus_eigenvalues()(i).real()));
  for (int j = 0; j < sys.n_minus(); ++j)
    smallest = std::min(smallest, std::abs(sys.minus_rates()(j).real()));
  if (!(smallest > kNeutralTol)) throw HyperbolicityError("spectrum touches the imaginary axis");
  double horizon = 10.0 / smallest;
  double largest = std::max(sys.max_abs_real_part(), 1e-300);
  horizon = std::min(horizon, 0.9 * kExpGuard / largest);
  std::vector<double> grid(201);
  for (int k = 0; k <= 200; ++k) grid[k] = horizon * k / 200.0;
  return grid;
}

namespace {

struct EnvelopeFit {
  double rate;
  double m;
};

// Fits n(t) <= m e^{sign * rate * t} starting from the spectral rate. If the
// ratio is still growing at the end of the grid (non-normal or defective
// blocks), the rate is relaxed by the terminal log-slope.
EnvelopeFit fit_envelope(const std::vector<double>& grid, const std::vector<double>& norms,
                         double spectral_rate, double sign) {
  auto ratios = [&](double rate) {
    std::vector<double> r(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
      r[k] = norms[k] * std::exp(-sign * rate * grid[k]);
    return r;
  };
  double rate = spectral_rate;
  for (int round = 0; round < 8 && grid.size() >= 3; ++round) {
    std::vector<double> r = ratios(rate);
    std::size_t n = r.size();
    std::size_t tail = n - std::max<std::size_t>(1, n / 10) - 1;
    auto argmax = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    if (argmax < tail || grid[n - 1] == grid[tail] || r[tail] <= 0.0) break;
    double slope = std::log(r[n - 1] / r[tail]) / (grid[n - 1] - grid[tail]);
    if (!(slope > 1e-12)) break;
    rate += sign * 1.5 * slope;
  }
  std::vector<double> r = ratios(rate);
  double m = std::max(1.0, *std::max_element(r.begin(), r.end()));
  if (m - 1.0 < 1e-9) m = 1.0;
  return {rate, m};
}

}  // namespace

DichotomyConstants estimate_dichotomy(const SplitSystem& sys, const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("estimate_dichotomy: empty time grid");
  if (!sys.hyperbolic()) throw HyperbolicityError("estimate_dichotomy: system is not hyperbolic");

  double re_min = std::numeric_limits<double>::infinity();
  double re_max = 0.0;
  for (Eigen::Index i = 0; i < sys.plus_eigenvalues().size(); ++i) {
    re_min = std::min(re_min, sys.plus_eigenvalues()(i).real());
    re_max = std::max(re_max, sys.plus_eigenvalues()(i).real());
  }
  double gamma2_spec = std::numeric_limits<double>::infinity();
  for (int j = 0; j < sys.n_minus(); ++j)
    gamma2_spec = std::min(gamma2_spec, -sys.minus_rates()(j).real());
  if (sys.n_minus() == 0) gamma2_spec = re_min;

  std::vector<double> fwd(grid.size()), bwd(grid.size()), minus(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double t = grid[k];
    if (t < 0.0) throw ConfigError("estimate_dichotomy: grid must be non-negative");
    Eigen::JacobiSVD<Eigen::MatrixXd> f(dense(propagator_plus(sys, t)));
    Eigen::JacobiSVD<Eigen::MatrixXd> b(dense(propagator_plus(sys, -t)));
    fwd[k] = f.singularValues()(0);
    bwd[k] = b.singularValues()(0);
    double mm = 0.0;
    VecM pm = propagator_minus(sys, t);
    for (int j = 0; j < pm.size(); ++j) mm = std::max(mm, std::abs(pm(j)));
    minus[k] = sys.n_minus() ? mm : std::exp(-gamma2_spec * t);
  }

  EnvelopeFit g0 = fit_envelope(grid, fwd, re_max, +1.0);
  EnvelopeFit g1 = fit_envelope(grid, bwd, re_min, -1.0);
  EnvelopeFit g2 = fit_envelope(grid, minus, gamma2_spec, -1.0);
  if (!(g1.rate > kNeutralTol) || !(g2.rate > kNeutralTol))
    throw HyperbolicityError("estimate_dichotomy: no positive exponent fits the grid");

  DichotomyConstants d;
  d.m = std::max({g0.m, g1.m, g2.m});
  d.gamma0 = g0.rate;
  d.gamma1 = g1.rate;
  d.gamma2 = g2.rate;
  return d;
}

DichotomyConstants estimate_dichotomy(const SplitSystem& sys) {
  if (!sys.hyperbolic()) throw HyperbolicityError("estimate_dichotomy: system is not hyperbolic");
  return estimate_dichotomy(sys, default_dichotomy_grid(sys));
}

LyapunovCertificate solve_lyapunov(const SplitSystem& sys) {
  if (!sys.hyperbolic()) throw HyperbolicityError("solve_lyapunov: a_plus spectrum not in Re > 0");
  const int n = sys.n_plus();
  Eigen::MatrixXd a = dense(sys.a_plus());

  // Bartels-Stewart on the complex Schur form A = U T U^H; the equation
  // becomes T^H Y + Y T = U^H C U with Y = U^H N U.
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(a.cast<cplx>());
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& u = schur.matrixU();

  double min_den = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) min_den = std::min(min_den, std::abs(std::conj(t(i, i)) + t(j, j)));
  double cond = 2.0 * std::max(a.norm(), 1e-300) / min_den;
  if (!(cond < 1e12)) throw SolverError("solve_lyapunov: ill-conditioned Lyapunov operator", cond);

  auto solve = [&](const Eigen::MatrixXd& c) {
    Eigen::MatrixXcd ch = u.adjoint() * c.cast<cplx>() * u;
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        cplx s = ch(i, j);
        for (int k = 0; k < i; ++k) s -= std::conj(t(k, i)) * y(k, j);
        for (int k = 0; k < j; ++k) s -= y(i, k) * t(k, j);
        y(i, j) = s / (std::conj(t(i, i)) + t(j, j));
      }
    }
    Eigen::MatrixXd x = (u * y * u.adjoint()).real();
    return Eigen::MatrixXd(0.5 * (x + x.transpose()));
  };

  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd nm = solve(id);
  for (int refine = 0; refine < 2; ++refine) {
    Eigen::MatrixXd res = id - (a.transpose() * nm + nm * a);
    nm += solve(res);
  }

  LyapunovCertificate cert;
  cert.n = MatP(nm);
  cert.residual = (a.transpose() * nm + nm * a - id).norm();
  cert.condition = cond;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nm);
  double lmin = es.eigenvalues()(0);
  double lmax = es.eigenvalues()(n - 1);
  if (!(lmin > 0.0)) throw SolverError("solve_lyapunov: N is not positive definite", lmin);
  cert.n_norm = lmax;
  const NormConstants& nc = sys.norm_constants();
  cert.d1 = nc.c1 * std::sqrt(lmin);
  cert.d2 = nc.c2 * std::sqrt(lmax);
  cert.r0 = std::numeric_limits<double>::quiet_NaN();
  cert.r1 = std::numeric_limits<double>::quiet_NaN();
  return cert;
}

LyapunovCertificate with_forcing_bound(LyapunovCertificate cert, const SplitSystem& sys,
                                       double c_f, double margin) {
  if (!(c_f >= 0.0) || !std::isfinite(c_f)) throw ConfigError("forcing bound must be finite");
  if (!(margin > 0.0)) throw ConfigError("radius margin must be positive");
  const NormConstants& nc = sys.norm_constants();
  cert.r0 = 2.0 * nc.c2 * nc.c2 * c_f * cert.n_norm / (nc.c1 * nc.c1) + margin;
  cert.r1 = cert.d2 / cert.d1 * cert.r0;
  return cert;
}

}  // namespace growup
