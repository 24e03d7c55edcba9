#pragma once

#include "growup/types.hpp"

#include <cstddef>
#include <vector>

namespace growup {

// Regular lattice on the box [lo, hi] in E+ coordinates.
struct GridSpec {
  VecP lo;
  VecP hi;
  std::vector<int> counts;

  static GridSpec cube(int n_plus, double radius, int count);
  int dim() const { return static_cast<int>(lo.size()); }
  std::size_t size() const;
  double spacing(int axis) const;
  bool same_lattice(const GridSpec& o, double tol = 1e-12) const;
};

// Graph of a function E+ -> E- sampled on a lattice, multilinear in between
// and constant (clamped) outside the box.
class GraphFn {
 public:
  GraphFn() = default;
  GraphFn(GridSpec spec, int n_minus);

  static GraphFn constant(GridSpec spec, const VecM& value);

  const GridSpec& spec() const { return spec_; }
  int n_plus() const { return spec_.dim(); }
  int n_minus() const { return n_minus_; }
  std::size_t size() const { return values_.size(); }

  VecP node(std::size_t idx) const;
  const VecM& value(std::size_t idx) const { return values_[idx]; }
  VecM& value(std::size_t idx) { return values_[idx]; }
  const std::vector<VecM>& values() const { return values_; }

  VecM operator()(const VecP& p) const;

  bool contains(const VecP& p, double slack = 0.0) const;

  // Largest Euclidean gradient bound of the interpolant over the cells.
  double kappa_hat() const;
  double sup_norm() const;

  // Same values on the box translated by `offset`.
  GraphFn shifted(const VecP& offset) const;

 private:
  GridSpec spec_;
  int n_minus_ = 0;
  std::vector<int> strides_;
  std::vector<VecM> values_;
};

double sup_distance(const GraphFn& a, const GraphFn& b);

// sup over nodes p != 0 of ||a(p) - b(p)|| / ||p - origin||.
double weighted_distance(const GraphFn& a, const GraphFn& b, const VecP& origin);

}  // namespace growup
