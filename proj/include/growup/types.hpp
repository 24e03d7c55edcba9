#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace growup {

inline constexpr int kMaxPlus = 8;
inline constexpr int kMaxMinus = 16;

using cplx = std::complex<double>;

// Stack-backed vectors; the dimensions of the finite surrogates are small.
using VecP = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxPlus, 1>;
using MatP = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxPlus, kMaxPlus>;
using VecM = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxMinus, 1>;

struct State {
  VecP p;
  VecM q;

  State() = default;
  State(VecP p_, VecM q_) : p(std::move(p_)), q(std::move(q_)) {}

  static State zero(int n_plus, int n_minus) {
    return State(VecP::Zero(n_plus), VecM::Zero(n_minus));
  }

  int n_plus() const { return static_cast<int>(p.size()); }
  int n_minus() const { return static_cast<int>(q.size()); }

  double norm() const { return std::sqrt(p.squaredNorm() + q.squaredNorm()); }
  bool all_finite() const;

  State& operator+=(const State& o) {
    p += o.p;
    q += o.q;
    return *this;
  }
  State& operator-=(const State& o) {
    p -= o.p;
    q -= o.q;
    return *this;
  }
  State& operator*=(double s) {
    p *= s;
    q *= s;
    return *this;
  }
};

inline State operator+(State a, const State& b) { return a += b; }
inline State operator-(State a, const State& b) { return a -= b; }
inline State operator*(double s, State a) { return a *= s; }

// Real coordinates (p, Re q, Im q); the imaginary block is dropped when
// `with_imag` is false.
Eigen::VectorXd to_real(const State& u, bool with_imag = true);
State from_real(const Eigen::VectorXd& x, int n_plus, int n_minus, bool with_imag = true);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class HyperbolicityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CertificateFailure : public Error {
 public:
  using Error::Error;
};

class InconclusiveError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_time)
      : Error(what), last_time_(last_time) {}
  double last_time() const { return last_time_; }

 private:
  double last_time_;
};

class DomainError : public Error {
 public:
  DomainError(const std::string& what, double exit_time)
      : Error(what), exit_time_(exit_time) {}
  double exit_time() const { return exit_time_; }

 private:
  double exit_time_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

class NonContractionError : public Error {
 public:
  NonContractionError(const std::string& what, double ratio) : Error(what), ratio_(ratio) {}
  double ratio() const { return ratio_; }

 private:
  double ratio_;
};

}  // namespace growup
