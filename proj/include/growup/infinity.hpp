#pragma once

#include "growup/absorbing.hpp"
#include "growup/point_cloud.hpp"
#include "growup/semiflow.hpp"

#include <string>
#include <vector>

namespace growup {

struct SphereState {
  VecP x;
  double t = 0.0;
};

struct SpherePath {
  std::vector<double> times;
  std::vector<VecP> direct;      // Pu(t) / |Pu(t)|
  std::vector<VecP> integrated;  // sphere ODE driven by g(t)
  std::vector<double> g_norms;
  double max_discrepancy = 0.0;
  double max_norm_drift = 0.0;  // |x| - 1 before renormalization
  double c_b = 0.0;             // min over the run of e^{-gamma1 t} |Pu(t)|
  std::size_t envelope_violations = 0;
};

// Rescaled dynamics x = Pu / |Pu| of a grow-up trajectory. The second route
// integrates x' = Ax - (Ax, x)x + g(t) with g(t) = (I - x x^T) P f(u) / |Pu|
// sampled along the trajectory.
SpherePath sphere_flow(const SplitSystem& sys, const NonlinearityModel& f, const Trajectory& traj,
                       const DichotomyConstants& dich);

// One RK4 step of y' = Ay - (Ay, y)y followed by renormalization. The drift
// of |y| from 1 before renormalization is written to `drift` when given.
VecP limit_flow_step(const MatP& a_plus, const VecP& y, double dt, double* drift = nullptr);

VecP limit_flow(const MatP& a_plus, VecP y, double t, double dt = 1e-3);

// Least-squares decay exponent of values over times >= t_from.
double fit_decay_exponent(const std::vector<double>& times, const std::vector<double>& values,
                          double t_from);

// Start on the slowest expanding direction through the E+ equilibrium of the
// forced linear part; its g(t) decays at the slowest possible rate.
State slowest_start(const SplitSystem& sys, const NonlinearityModel& f, double rho);

struct OmegaInfinityOptions {
  double dt = 0.005;
  int workers = 0;
  std::vector<double> snapshot_times;  // empty: the horizon only
  ClassifyOptions classify;
};

// Clustered late-time directions Pu(t) / |Pu(t)| of an escaping set.
PointCloud omega_infty(const AbsorbingSetup& setup, const NonlinearityModel& f,
                       const SampledSet& set, double horizon, double merge_eps,
                       const OmegaInfinityOptions& opts = {});

// Hausdorff distance between a direction cloud and its image under the limit flow.
double limit_flow_invariance(const MatP& a_plus, const PointCloud& cloud, double tau,
                             double dt = 1e-3);

struct EigenGroup {
  double real_part = 0.0;
  std::vector<cplx> eigenvalues;
  int algebraic = 0;
  int geometric = 0;
  std::vector<int> block_sizes;
  bool complex = false;
  std::string invariant_set;
};

struct JordanReport {
  std::vector<EigenGroup> groups;  // increasing real part
  std::vector<std::string> connections;
  double condition = 0.0;
  bool ill_conditioned = false;  // eigenvector condition above 1e8
};

JordanReport jordan_prediction(const MatP& a_plus);

struct CoverageWitness {
  std::vector<double> probe_times;
  std::vector<double> worst_gap;  // largest net-point distance per probe
  std::vector<std::size_t> samples;
  double resolution = 0.0;
  bool ok = false;
};

// Sampled surjectivity of the normalized P-image of the ring
// {|Pv| = R, (I-P)v = 0} at each probe time, refined adaptively until
// consecutive image directions are closer than resolution / 2. n_plus <= 2.
CoverageWitness sphere_coverage(const SplitSystem& sys, const NonlinearityModel& f,
                                double ring_radius, const std::vector<double>& probe_times,
                                double resolution, double dt = 0.005,
                                std::size_t max_samples = 200000, int workers = 0);

}  // namespace growup
