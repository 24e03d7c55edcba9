#pragma once

#include "growup/operator_core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace growup {

struct LipschitzClaim {
  enum class Region { None, Global, Strip, Exterior };
  Region region = Region::None;
  double constant = 0.0;
  double parameter = 0.0;  // strip height A, or cutoff radius R_cut
};

std::string to_string(LipschitzClaim::Region r);

// H(r) bounding the contracting component of the decaying part f1 for r >= k.
struct DecayEnvelope {
  enum class Kind { Power, Slow };
  Kind kind = Kind::Power;
  double d = 0.0;
  double alpha = 0.0;
  double k = 1.0;
  std::vector<std::pair<double, double>> table;  // (r, H(r)) for Kind::Slow, r increasing

  double operator()(double r) const;
};

using Field = std::function<State(double, const State&)>;

struct NonlinearityModel {
  std::string name;
  Field eval;
  double c_f = 0.0;
  LipschitzClaim lipschitz;
  std::optional<State> f0;
  std::optional<DecayEnvelope> decay;
  bool autonomous = true;

  State operator()(double t, const State& u) const { return eval(t, u); }
};

NonlinearityModel zero_nonlinearity();

// Wraps f as the translated field g(v) = f(v + anchor) - f(anchor).
NonlinearityModel translated(const NonlinearityModel& f, const State& anchor);

struct CertificateReport {
  std::size_t samples = 0;
  double max_norm = 0.0;
  double max_lipschitz_ratio = 0.0;
  double max_decay_ratio = 0.0;
  std::size_t bound_violations = 0;
  std::size_t lipschitz_violations = 0;
  std::size_t decay_violations = 0;

  bool ok() const { return bound_violations + lipschitz_violations + decay_violations == 0; }
};

// Monte-Carlo check of c_f, the Lipschitz claim on its region and the decay
// envelope. Samples have ||p|| <= p_radius and ||q|| <= q_radius.
CertificateReport certify_nonlinearity(const SplitSystem& sys, const NonlinearityModel& f,
                                       std::size_t samples, unsigned long long seed,
                                       double p_radius, double q_radius);

// Exponential-integrator data for one step size: exact linear propagation and
// the phi-function weights of the Duhamel quadrature.
struct StepKernel {
  double h = 0.0;
  MatP e_plus, phi1_plus, phi2_plus;  // h * phi_k(h A) for k = 1, 2
  VecM e_minus, phi1_minus, phi2_minus;

  static StepKernel make(const SplitSystem& sys, double h);
};

// Second-order exponential predictor-corrector for u' = Au + f(t, u).
State exp_step(const StepKernel& k, const NonlinearityModel& f, const State& u, double t);

State step(const SplitSystem& sys, const NonlinearityModel& f, const State& u, double t,
           double dt);

// Reusable fixed-step flow; durations are split into equal steps no longer
// than dt.
class Integrator {
 public:
  Integrator(const SplitSystem& sys, double dt);

  const SplitSystem& system() const { return *sys_; }
  double dt() const { return kernel_.h; }

  State flow(const NonlinearityModel& f, State u, double t0, double duration) const;

 private:
  const SplitSystem* sys_;
  StepKernel kernel_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  double dt = 0.0;
  int order = 2;
  double richardson_gap = 0.0;
  bool richardson_flag = false;

  std::size_t size() const { return times.size(); }
  const State& back() const { return states.back(); }
};

struct EnvelopeCheck {
  DichotomyConstants dich;
  double c_f = 0.0;
  double slack = 1.05;
};

struct EnvelopeReport {
  std::size_t checked = 0;
  std::size_t q_violations = 0;      // contracting-component bound
  std::size_t p_upper_violations = 0;
  std::size_t p_lower_violations = 0;
  double worst_ratio = 0.0;
  double first_violation_time = 0.0;

  bool ok() const { return q_violations + p_upper_violations + p_lower_violations == 0; }
  std::string summary() const;
};

EnvelopeReport check_envelopes(const Trajectory& traj, const EnvelopeCheck& chk);

struct IntegrateOptions {
  std::size_t store_every = 1;
  bool richardson = false;
  double richardson_tol = 1e-6;
  std::optional<EnvelopeCheck> envelope;  // violations raise CertificateFailure
};

Trajectory integrate(const SplitSystem& sys, const NonlinearityModel& f, const State& u0,
                     double t0, double t1, double dt, const IntegrateOptions& opts = {});

Trajectory integrate_process(const SplitSystem& sys, const NonlinearityModel& f, const State& u0,
                             double t0, double t1, double dt, const IntegrateOptions& opts = {});

class GraphFn;

struct PlusPath {
  std::vector<double> times;  // increasing, from tau - horizon to tau
  std::vector<VecP> p;
};

// Solves p' = a_plus p + P f(t, p + sigma(p)) backward from p(tau) = p_end.
PlusPath backward_plus_solve(const SplitSystem& sys, const NonlinearityModel& f,
                             const GraphFn& sigma, const VecP& p_end, double tau, double horizon,
                             double dt);

// Forward re-integration of the same equation from the start of a path.
VecP forward_plus_solve(const SplitSystem& sys, const NonlinearityModel& f, const GraphFn& sigma,
                        const VecP& p_start, double t0, double duration, double dt);

}  // namespace growup
