#pragma once

#include "growup/semiflow.hpp"

#include <string>
#include <vector>

namespace growup {

struct Preset {
  std::string name;
  SplitSystem sys;
  NonlinearityModel f;
};

// Componentwise c * tanh(x / c) with c = c_f / sqrt(dim); caps ||f|| by c_f
// and never increases Lipschitz constants.
NonlinearityModel saturate(const NonlinearityModel& f, double c_f);

// f(u) = clamp(scale * W tanh(V x + b)) on the real coordinates x of u, with
// ||W|| = ||V|| = 1 so that the global Lipschitz constant is `lipschitz`.
NonlinearityModel saturated_random(const SplitSystem& sys, unsigned long long seed,
                                   double lipschitz, double c_f);

NonlinearityModel constant_forcing(const State& c);

// x' = x, y' = -y.
Preset preset_ex1();
// x' = y, y' = -x, z' = -z (neutral E+ block).
Preset preset_ex2();
// Planar field whose graph attractor {y = 0} does not attract bounded sets.
Preset preset_cex_nonattracting();
// Planar field with J = R x [-1, 1] and a non-closed bounded core.
Preset preset_jb_nonclosed();
// p' = p, q' = -q + sin t.
Preset preset_sin_forced();
// u' = Au + 0.3 sin(t) clamp(u) on a 1+2 dimensional split.
Preset preset_oscillating_b();
// Scalar x' = sin t - t cos t; unbounded forcing, excluded by the standing bounds.
Preset preset_oscillatory_growup();

// a_plus = diag(g0, g1), one contracting rate -g2, f = (0, d tanh(2q) / max(|p|, k)^alpha).
Preset preset_power_decay(double g0, double g1, double g2, double alpha, double d, double k);

// a_plus = [a], minus rates (-g2, -g2 - 0.5), saturated_random forcing.
Preset preset_small_lipschitz(unsigned long long seed, double a, double g2, double l_f, double c_f);

// a_plus = diag(2, 1), minus = (-1); constant E+ forcing c plus a small
// saturated E- term.
Preset preset_infinity_demo(double c, unsigned long long seed);

// Names: ex1, ex2, cex_nonattracting, jb_nonclosed, saturated_random(seed),
// sin_forced, oscillating_b, oscillatory_growup.
Preset preset_by_name(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace growup
