#include "growup/graph.hpp"

#include <algorithm>
#include <cmath>

namespace growup {

GridSpec GridSpec::cube(int n_plus, double radius, int count) {
  GridSpec s;
  s.lo = VecP::Constant(n_plus, -radius);
  s.hi = VecP::Constant(n_plus, radius);
  s.counts.assign(n_plus, count);
  return s;
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int c : counts) n *= static_cast<std::size_t>(c);
  return n;
}

double GridSpec::spacing(int axis) const {
  return (hi(axis) - lo(axis)) / (counts[axis] - 1);
}

bool GridSpec::same_lattice(const GridSpec& o, double tol) const {
  if (dim() != o.dim() || counts != o.counts) return false;
  return (lo - o.lo).cwiseAbs().maxCoeff() <= tol && (hi - o.hi).cwiseAbs().maxCoeff() <= tol;
}

GraphFn::GraphFn(GridSpec spec, int n_minus) : spec_(std::move(spec)), n_minus_(n_minus) {
  const int n = spec_.dim();
  if (n < 1 || n > kMaxPlus || static_cast<int>(spec_.counts.size()) != n ||
      spec_.hi.size() != n)
    throw ConfigError("grid: inconsistent dimensions");
  for (int a = 0; a < n; ++a) {
    if (spec_.counts[a] < 2) throw ConfigError("grid: need at least two nodes per axis");
    if (!(spec_.hi(a) > spec_.lo(a))) throw ConfigError("grid: empty box");
  }
  strides_.assign(n, 1);
  for (int a = n - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * spec_.counts[a + 1];
  values_.assign(spec_.size(), VecM::Zero(n_minus));
}

GraphFn GraphFn::constant(GridSpec spec, const VecM& value) {
  GraphFn g(std::move(spec), static_cast<int>(value.size()));
  std::fill(g.values_.begin(), g.values_.end(), value);
  return g;
}

VecP GraphFn::node(std::size_t idx) const {
  const int n = spec_.dim();
  VecP p(n);
  for (int a = 0; a < n; ++a) {
    int i = static_cast<int>(idx / strides_[a]) % spec_.counts[a];
    p(a) = spec_.lo(a) + i * spec_.spacing(a);
  }
  return p;
}

VecM GraphFn::operator()(const VecP& p) const {
  const int n = spec_.dim();
  int base[kMaxPlus];
  double frac[kMaxPlus];
  for (int a = 0; a < n; ++a) {
    double h = spec_.spacing(a);
    double x = std::clamp(p(a), spec_.lo(a), spec_.hi(a));
    double s = (x - spec_.lo(a)) / h;
    int i = std::min(static_cast<int>(std::floor(s)), spec_.counts[a] - 2);
    i = std::max(i, 0);
    base[a] = i;
    frac[a] = std::clamp(s - i, 0.0, 1.0);
  }
  VecM out = VecM::Zero(n_minus_);
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    std::size_t idx = 0;
    for (int a = 0; a < n; ++a) {
      int bit = (corner >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      idx += static_cast<std::size_t>(base[a] + bit) * strides_[a];
    }
    if (w != 0.0) out += w * values_[idx];
  }
  return out;
}

bool GraphFn::contains(const VecP& p, double slack) const {
  for (int a = 0; a < spec_.dim(); ++a)
    if (p(a) < spec_.lo(a) - slack || p(a) > spec_.hi(a) + slack) return false;
  return true;
}

double GraphFn::kappa_hat() const {
  const int n = spec_.dim();
  double best = 0.0;
  std::vector<int> cell(n, 0);
  std::size_t cells = 1;
  for (int a = 0; a < n; ++a) cells *= static_cast<std::size_t>(spec_.counts[a] - 1);
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rem = c;
    std::size_t origin = 0;
    for (int a = n - 1; a >= 0; --a) {
      cell[a] = static_cast<int>(rem % (spec_.counts[a] - 1));
      rem /= (spec_.counts[a] - 1);
      origin += static_cast<std::size_t>(cell[a]) * strides_[a];
    }
    double sq = 0.0;
    for (int a = 0; a < n; ++a) {
      double h = spec_.spacing(a);
      double m = 0.0;
      for (int corner = 0; corner < (1 << n); ++corner) {
        if ((corner >> a) & 1) continue;
        std::size_t idx = origin;
        for (int b = 0; b < n; ++b)
          if ((corner >> b) & 1) idx += strides_[b];
        m = std::max(m, (values_[idx + strides_[a]] - values_[idx]).norm() / h);
      }
      sq += m * m;
    }
    best = std::max(best, std::sqrt(sq));
  }
  return best;
}

double GraphFn::sup_norm() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, v.norm());
  return m;
}

GraphFn GraphFn::shifted(const VecP& offset) const {
  GraphFn g = *this;
  g.spec_.lo += offset;
  g.spec_.hi += offset;
  return g;
}

double sup_distance(const GraphFn& a, const GraphFn& b) {
  if (a.size() != b.size() || a.n_minus() != b.n_minus() ||
      a.spec().counts != b.spec().counts)
    throw ConfigError("sup_distance: graphs live on different lattices");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a.value(i) - b.value(i)).norm());
  return m;
}

double weighted_distance(const GraphFn& a, const GraphFn& b, const VecP& origin) {
  if (a.size() != b.size() || a.spec().counts != b.spec().counts)
    throw ConfigError("weighted_distance: graphs live on different lattices");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double r = (a.node(i) - origin).norm();
    if (r < 1e-12) continue;
    m = std::max(m, (a.value(i) - b.value(i)).norm() / r);
  }
  return m;
}

}  // namespace growup
