#include "growup/presets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <regex>

namespace growup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VecM real_rates(std::initializer_list<double> rates) {
  VecM v(static_cast<Eigen::Index>(rates.size()));
  Eigen::Index i = 0;
  for (double r : rates) v(i++) = cplx(r, 0.0);
  return v;
}

MatP scalar(double a) {
  MatP m(1, 1);
  m(0, 0) = a;
  return m;
}

State planar(double x, double y) {
  State u = State::zero(1, 1);
  u.p(0) = x;
  u.q(0) = y;
  return u;
}

Eigen::MatrixXd unit_spectral(Eigen::MatrixXd m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return m / svd.singularValues()(0);
}

// Vertical component of the counterexample field for x, y >= 0.
double cex_h(double x, double y) {
  double s = x / (1.0 + x);
  if (y <= 1.0) return s * y;
  if (y <= 2.0) return s * (2.0 - y) * y;
  return 0.0;
}

// Horizontal component of the non-closed-core field for x >= 0, y >= 0.
double jb_x(double x, double y) {
  if (y == 0.0) return std::max(x, 1.0);
  double a = std::min(1.0 / (3.0 * y), 1.0);
  if (x <= a) return std::max(3.0 * y, 1.0) * x;
  if (x <= 2.0 / (3.0 * y)) return 1.0;
  if (x <= 1.0 / y) return -3.0 * y * x + 3.0;
  return x - 1.0 / y;
}

}  // namespace

NonlinearityModel saturate(const NonlinearityModel& f, double c_f) {
  NonlinearityModel g = f;
  g.name = f.name + "_saturated";
  g.c_f = c_f;
  g.eval = [f, c_f](double t, const State& u) {
    State v = f(t, u);
    const bool cq = std::any_of(v.q.data(), v.q.data() + v.q.size(),
                                [](const cplx& z) { return z.imag() != 0.0; });
    const double dim = v.n_plus() + (cq ? 2.0 : 1.0) * v.n_minus();
    const double c = c_f / std::sqrt(dim);
    auto clamp = [c](double x) { return c * std::tanh(x / c); };
    for (int i = 0; i < v.n_plus(); ++i) v.p(i) = clamp(v.p(i));
    for (int j = 0; j < v.n_minus(); ++j) v.q(j) = cplx(clamp(v.q(j).real()), clamp(v.q(j).imag()));
    return v;
  };
  return g;
}

NonlinearityModel saturated_random(const SplitSystem& sys, unsigned long long seed,
                                   double lipschitz, double c_f) {
  if (sys.has_complex_rates())
    throw ConfigError("saturated_random requires real contracting rates");
  if (!(lipschitz >= 0.0) || !(c_f > 0.0)) throw ConfigError("saturated_random: bad constants");
  const int np = sys.n_plus(), nm = sys.n_minus();
  const int dim = np + nm;
  const int hidden = 2 * dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w(dim, hidden), v(hidden, dim);
  Eigen::VectorXd b(hidden);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = normal(rng);
  w = unit_spectral(w) * lipschitz;
  v = unit_spectral(v);

  NonlinearityModel raw;
  raw.name = "saturated_random(" + std::to_string(seed) + ")";
  raw.eval = [w, v, b, np, nm](double, const State& u) {
    Eigen::VectorXd x(np + nm);
    x.head(np) = u.p;
    for (int j = 0; j < nm; ++j) x(np + j) = u.q(j).real();
    Eigen::VectorXd y = w * (v * x + b).array().tanh().matrix();
    State out = State::zero(np, nm);
    out.p = y.head(np);
    for (int j = 0; j < nm; ++j) out.q(j) = cplx(y(np + j), 0.0);
    return out;
  };
  NonlinearityModel f = saturate(raw, c_f);
  f.name = raw.name;
  f.lipschitz = {LipschitzClaim::Region::Global, lipschitz, 0.0};
  return f;
}

NonlinearityModel constant_forcing(const State& c) {
  NonlinearityModel f;
  f.name = "constant";
  f.eval = [c](double, const State&) { return c; };
  f.c_f = c.norm();
  f.lipschitz = {LipschitzClaim::Region::Global, 0.0, 0.0};
  f.f0 = c;
  return f;
}

Preset preset_ex1() {
  return {"ex1", SplitSystem::make(scalar(1.0), real_rates({-1.0})), zero_nonlinearity()};
}

Preset preset_ex2() {
  MatP a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  return {"ex2", SplitSystem::make_unchecked(a, real_rates({-1.0})), zero_nonlinearity()};
}

Preset preset_cex_nonattracting() {
  NonlinearityModel f;
  f.name = "cex_nonattracting";
  f.eval = [](double, const State& u) {
    double x = u.p(0), y = u.q(0).real();
    double g = cex_h(std::abs(x), std::abs(y));
    return planar(0.0, y < 0.0 ? -g : g);
  };
  f.c_f = 1.0;
  f.lipschitz = {LipschitzClaim::Region::Global, 2.5, 0.0};
  return {"cex_nonattracting", SplitSystem::make(scalar(1.0), real_rates({-1.0})), f};
}

Preset preset_jb_nonclosed() {
  NonlinearityModel f;
  f.name = "jb_nonclosed";
  f.eval = [](double, const State& u) {
    double x = u.p(0), y = u.q(0).real();
    double ax = std::abs(x), ay = std::abs(y);
    double fx = jb_x(ax, ay);
    if (x < 0.0) fx = -fx;
    double fy = 0.0;
    if (ay >= 1.0) fy = -ay + 1.0;
    if (y < 0.0) fy = -fy;
    // The field minus the linear part diag(1, -1).
    return planar(fx - x, fy + y);
  };
  f.c_f = kInf;
  f.lipschitz = {LipschitzClaim::Region::None, 0.0, 0.0};
  return {"jb_nonclosed", SplitSystem::make(scalar(1.0), real_rates({-1.0})), f};
}

Preset preset_sin_forced() {
  NonlinearityModel f;
  f.name = "sin_forced";
  f.eval = [](double t, const State&) { return planar(0.0, std::sin(t)); };
  f.c_f = 1.0;
  f.lipschitz = {LipschitzClaim::Region::Global, 0.0, 0.0};
  f.autonomous = false;
  return {"sin_forced", SplitSystem::make(scalar(1.0), real_rates({-1.0})), f};
}

Preset preset_oscillating_b() {
  SplitSystem sys = SplitSystem::make(scalar(1.0), real_rates({-1.0, -2.0}));
  NonlinearityModel raw;
  raw.name = "oscillating_b";
  // b(t) u plus a p-dependent coupling into E- so the attractor is not q = 0.
  raw.eval = [](double t, const State& u) {
    State v = u;
    v *= 0.15 * std::sin(t);
    const double g = 0.1 * std::tanh(u.p(0));
    v.q(0) += g;
    v.q(1) -= g;
    return v;
  };
  raw.autonomous = false;
  NonlinearityModel f = saturate(raw, 0.3);
  f.name = "oscillating_b";
  f.lipschitz = {LipschitzClaim::Region::Global, 0.3, 0.0};
  f.autonomous = false;
  return {"oscillating_b", sys, f};
}

Preset preset_oscillatory_growup() {
  NonlinearityModel f;
  f.name = "oscillatory_growup";
  f.eval = [](double t, const State& u) {
    State v = State::zero(u.n_plus(), u.n_minus());
    v.p(0) = std::sin(t) - t * std::cos(t);
    return v;
  };
  f.c_f = kInf;
  f.autonomous = false;
  return {"oscillatory_growup", SplitSystem::make_unchecked(scalar(0.0), real_rates({-1.0})), f};
}

Preset preset_power_decay(double g0, double g1, double g2, double alpha, double d, double k) {
  if (!(g0 >= g1 && g1 > 0.0 && g2 > 0.0 && alpha > 0.0 && d > 0.0 && k > 0.0))
    throw ConfigError("power_decay: need g0 >= g1 > 0, g2 > 0, alpha, d, k > 0");
  MatP a = MatP::Zero(2, 2);
  a(0, 0) = g0;
  a(1, 1) = g1;
  SplitSystem sys = SplitSystem::make(a, real_rates({-g2}));
  NonlinearityModel f;
  f.name = "power_decay";
  f.eval = [d, alpha, k](double, const State& u) {
    State v = State::zero(u.n_plus(), u.n_minus());
    double r = std::max(u.p.norm(), k);
    v.q(0) = cplx(d * std::tanh(2.0 * u.q(0).real()) / std::pow(r, alpha), 0.0);
    return v;
  };
  f.c_f = d / std::pow(k, alpha);
  f.lipschitz = {LipschitzClaim::Region::Global, 2.0 * d / std::pow(k, alpha) +
                                                     alpha * d / std::pow(k, alpha + 1.0),
                 0.0};
  f.f0 = State::zero(2, 1);
  f.decay = DecayEnvelope{DecayEnvelope::Kind::Power, d, alpha, k, {}};
  return {"power_decay", sys, f};
}

Preset preset_small_lipschitz(unsigned long long seed, double a, double g2, double l_f,
                              double c_f) {
  SplitSystem sys = SplitSystem::make(scalar(a), real_rates({-g2, -g2 - 0.5}));
  return {"saturated_random(" + std::to_string(seed) + ")", sys,
          saturated_random(sys, seed, l_f, c_f)};
}

Preset preset_infinity_demo(double c, unsigned long long seed) {
  MatP a = MatP::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 1.0;
  SplitSystem sys = SplitSystem::make(a, real_rates({-1.0}));
  NonlinearityModel small = saturated_random(sys, seed, 0.1, 0.1);
  NonlinearityModel f;
  f.name = "infinity_demo";
  f.eval = [c, small](double t, const State& u) {
    State v = small(t, u);
    v.p.setZero();
    v.p(0) = c;
    return v;
  };
  f.c_f = std::sqrt(c * c + 0.01);
  f.lipschitz = {LipschitzClaim::Region::Global, 0.1, 0.0};
  return {"infinity_demo", sys, f};
}

Preset preset_by_name(const std::string& name) {
  if (name == "ex1") return preset_ex1();
  if (name == "ex2") return preset_ex2();
  if (name == "cex_nonattracting") return preset_cex_nonattracting();
  if (name == "jb_nonclosed") return preset_jb_nonclosed();
  if (name == "sin_forced") return preset_sin_forced();
  if (name == "oscillating_b") return preset_oscillating_b();
  if (name == "oscillatory_growup") return preset_oscillatory_growup();
  std::smatch m;
  static const std::regex sr(R"(saturated_random\((\d+)\))");
  if (std::regex_match(name, m, sr))
    return preset_small_lipschitz(std::stoull(m[1].str()), 1.0, 1.0, 0.2, 0.5);
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"ex1", "ex2", "cex_nonattracting", "jb_nonclosed", "saturated_random(<seed>)",
          "sin_forced", "oscillating_b", "oscillatory_growup"};
}

}  // namespace growup
