#pragma once

#include "growup/graph.hpp"
#include "growup/graph_transform.hpp"
#include "growup/point_cloud.hpp"
#include "growup/semiflow.hpp"

#include <optional>
#include <string>
#include <vector>

namespace growup {

struct AbsorbingStrip {
  double d1_level = 0.0;  // M C_f / gamma2 + 1
  double d2_level = 0.0;  // M d1_level

  bool in_inner(const State& u) const { return u.q.norm() <= d1_level; }
  bool in_q(const State& u, double margin = 0.0) const { return u.q.norm() <= d2_level + margin; }
};

struct NestedFamily {
  LyapunovCertificate cert;
  double r0 = 0.0;
  double r1 = 0.0;

  double level(double r) const { return cert.d1 * cert.d1 * r * r; }
  double s_of_r(double r) const { return cert.d1 / cert.d2 * r; }
};

struct AbsorbingSetup {
  SplitSystem sys;
  DichotomyConstants dich;
  double c_f = 0.0;
  AbsorbingStrip strip;
  NestedFamily family;

  double form(const State& u) const { return family.cert.form(u.p); }
  bool in_h(const State& u, double r, double margin = 0.0) const {
    return strip.in_q(u, margin) && form(u) <= family.level(r) + margin;
  }
  // Diameter of H_{r0} measured in the box enclosing it.
  double diameter_h0() const;
};

AbsorbingSetup build_family(const SplitSystem& sys, const DichotomyConstants& dich, double c_f,
                            const LyapunovCertificate& cert, double margin = 1.0);

AbsorbingSetup build_family(const SplitSystem& sys, double c_f);

// Time after which ||q|| <= d1_level is guaranteed, from the q-envelope.
double absorption_time_bound(const AbsorbingSetup& setup, double q0_norm);

struct MonotonicityWitness {
  std::size_t trajectories = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
};

// The quadratic form increases strictly along the given trajectories while
// they stay outside H_{r0}.
MonotonicityWitness expanding_witness(const AbsorbingSetup& setup, const NonlinearityModel& f,
                                      const std::vector<State>& starts, double horizon,
                                      double dt = 0.002);

struct SampledSet {
  std::vector<State> samples;
  double radius = 0.0;
};

// Lattice points of the ball (spacing `step`) plus the center.
SampledSet ball_samples(const State& center, double radius, double step);
SampledSet segment_samples(const State& a, const State& b, std::size_t count);

enum class Verdict { Escaping, Straddling, Captured };
std::string to_string(Verdict v);

struct SetClassification {
  Verdict verdict = Verdict::Escaping;
  double witness_time = 0.0;
  double r_level = 0.0;
  std::size_t in_h = 0;
  std::size_t out_h = 0;
  std::size_t samples = 0;
  std::vector<std::size_t> in_h_counts;   // per probe
  std::vector<std::size_t> out_h_counts;  // per probe
  std::vector<double> probe_times;
};

struct ClassifyOptions {
  double probe_dt = 0.1;
  double dt = 0.005;
  double margin = 1e-6;
  int workers = 0;
};

SetClassification classify(const AbsorbingSetup& setup, const NonlinearityModel& f,
                           const SampledSet& set, double horizon, double r_level,
                           const ClassifyOptions& opts = {});

struct OmegaOptions {
  double dt = 0.005;
  int workers = 0;
  std::optional<AbsorbingSetup> setup;  // enables the escaping check
  double r_level = 0.0;
  ClassifyOptions classify;
};

PointCloud omega_limit(const SplitSystem& sys, const NonlinearityModel& f, const SampledSet& set,
                       double horizon, const std::vector<double>& snapshot_times,
                       double merge_eps, const OmegaOptions& opts = {});

// Pushes cloud points forward by t and re-clusters.
PointCloud push_forward(const SplitSystem& sys, const NonlinearityModel& f, const PointCloud& cloud,
                        double t, double merge_eps, double dt = 0.005);

struct AlphaLimit {
  PointCloud cloud;
  std::vector<double> distance_to_limit;  // per backward step
};

AlphaLimit alpha_limit_on_attractor(const SplitSystem& sys, const NonlinearityModel& f,
                                    const GraphFn& sigma, const std::vector<VecP>& starts,
                                    double backward_horizon, double t_step, double merge_eps,
                                    const FiberOptions& fiber = {});

}  // namespace growup
