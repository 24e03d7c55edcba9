#include "growup/types.hpp"

namespace growup {

bool State::all_finite() const {
  if (!p.allFinite()) return false;
  for (Eigen::Index j = 0; j < q.size(); ++j)
    if (!std::isfinite(q(j).real()) || !std::isfinite(q(j).imag())) return false;
  return true;
}

Eigen::VectorXd to_real(const State& u, bool with_imag) {
  const Eigen::Index np = u.p.size(), nm = u.q.size();
  Eigen::VectorXd x(np + (with_imag ? 2 : 1) * nm);
  x.head(np) = u.p;
  for (Eigen::Index j = 0; j < nm; ++j) {
    x(np + j) = u.q(j).real();
    if (with_imag) x(np + nm + j) = u.q(j).imag();
  }
  return x;
}

State from_real(const Eigen::VectorXd& x, int n_plus, int n_minus, bool with_imag) {
  State u = State::zero(n_plus, n_minus);
  u.p = x.head(n_plus);
  for (int j = 0; j < n_minus; ++j)
    u.q(j) = cplx(x(n_plus + j), with_imag ? x(n_plus + n_minus + j) : 0.0);
  return u;
}

}  // namespace growup
