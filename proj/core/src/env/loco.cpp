#include "affordmap/env/loco.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace affordmap::env {

namespace {
void check_bounds(const LocoAction& a) {
  constexpr double slack = 1e-9;
  const bool ok = a.amp_left >= -slack && a.amp_left <= 1.0 + slack && a.amp_right >= -slack &&
                  a.amp_right <= 1.0 + slack && std::abs(a.phase_left) <= std::numbers::pi + slack &&
                  std::abs(a.phase_right) <= std::numbers::pi + slack;
  if (!ok) throw std::out_of_range("locomotion action outside its bounds");
}
}  // namespace

double gait_efficiency(const LocoAction& action) {
  return 0.5 * (1.0 + std::cos(action.phase_left - action.phase_right));
}

bool in_overdrive(const LocoAction& action, const LocoParams& params) {
  return action.amp_left + action.amp_right > params.slip_threshold;
}

Pose loco_step(const Pose& pose, const LocoAction& action, const LocoParams& params, Rng& rng) {
  check_bounds(action);
  const double sigma = in_overdrive(action, params) ? params.sigma_slip : params.sigma_base;
  double v = gait_efficiency(action) * 0.5 * (action.amp_left + action.amp_right);
  if (params.noise) {
    std::normal_distribution<double> noise(0.0, sigma);
    v += noise(rng);
  }
  const double turn = params.turn_gain * (action.amp_right - action.amp_left);
  Pose next;
  next.theta = pose.theta + turn * params.dt;
  next.x = pose.x + v * params.dt * std::cos(next.theta);
  next.y = pose.y + v * params.dt * std::sin(next.theta);
  return next;
}

std::vector<Pose> loco_rollout(const Pose& start, std::span<const LocoAction> policy, const LocoParams& params,
                               Rng& rng) {
  std::vector<Pose> trajectory{start};
  trajectory.reserve(policy.size() + 1);
  for (const LocoAction& a : policy) trajectory.push_back(loco_step(trajectory.back(), a, params, rng));
  return trajectory;
}

std::array<double, kLocoSensorDim> loco_sensor(const Pose& pose, std::size_t step, std::size_t horizon) {
  return {pose.x, pose.y, std::cos(pose.theta), std::sin(pose.theta),
          static_cast<double>(step) / static_cast<double>(horizon)};
}

}  // namespace affordmap::env
