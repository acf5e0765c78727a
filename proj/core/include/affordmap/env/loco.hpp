#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "affordmap/rng.hpp"

namespace affordmap::env {

inline constexpr std::size_t kLocoActionDim = 4;
inline constexpr std::size_t kLocoSensorDim = 5;

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Per-step gait command: left/right amplitudes in [0, 1] and clock phases
/// in [-pi, pi].
struct LocoAction {
  double amp_left = 0.0;
  double amp_right = 0.0;
  double phase_left = 0.0;
  double phase_right = 0.0;

  std::array<double, kLocoActionDim> as_array() const { return {amp_left, amp_right, phase_left, phase_right}; }
  static LocoAction from(std::span<const double> v) { return {v[0], v[1], v[2], v[3]}; }
};

struct LocoParams {
  std::size_t horizon = 5;
  double dt = 1.0;
  double turn_gain = 0.6;
  double slip_threshold = 1.5;  // A_L + A_R above this switches to the slip noise regime
  double sigma_slip = 0.3;
  double sigma_base = 0.02;
  bool noise = true;
};

/// Gait efficiency: 1 for in-phase legs, 0 for anti-phase legs.
double gait_efficiency(const LocoAction& action);

bool in_overdrive(const LocoAction& action, const LocoParams& params);

/// One clock cycle of the two-legged gait surrogate:
///   e = (1 + cos(phase_l - phase_r)) / 2
///   v = e (A_l + A_r) / 2 + N(0, sigma)
///   theta' = theta + turn_gain (A_r - A_l) dt
///   (x', y') = (x, y) + v dt (cos theta', sin theta')
/// with sigma = sigma_slip in overdrive, sigma_base otherwise.
Pose loco_step(const Pose& pose, const LocoAction& action, const LocoParams& params, Rng& rng);

/// Applies the actions in order; the returned trajectory starts with `start`.
std::vector<Pose> loco_rollout(const Pose& start, std::span<const LocoAction> policy, const LocoParams& params,
                               Rng& rng);

/// (x, y, cos theta, sin theta, step / horizon)
std::array<double, kLocoSensorDim> loco_sensor(const Pose& pose, std::size_t step, std::size_t horizon);

}  // namespace affordmap::env
