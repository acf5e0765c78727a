#include "affordmap/env/reacher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace affordmap::env {

namespace {
constexpr double kLimitSlack = 1e-9;
}

std::array<Point2, kReacherJoints + 1> joint_positions(const JointAngles& angles, double segment_length) {
  std::array<Point2, kReacherJoints + 1> pts;
  pts[0] = Point2::Zero();
  double heading = 0.0;
  for (std::size_t i = 0; i < kReacherJoints; ++i) {
    heading += angles[i];
    pts[i + 1] = pts[i] + segment_length * Point2(std::cos(heading), std::sin(heading));
  }
  return pts;
}

Point2 reacher_kinematics(const JointAngles& angles, const ReacherParams& params) {
  for (std::size_t i = 0; i < kReacherJoints; ++i) {
    if (!(std::abs(angles[i]) <= params.joint_limit + kLimitSlack)) {
      throw JointLimitError("joint " + std::to_string(i) + " angle " + std::to_string(angles[i]) +
                            " outside +-" + std::to_string(params.joint_limit));
    }
  }
  return joint_positions(angles, params.segment_length).back();
}

double obstacle_clearance(const JointAngles& angles, std::span<const Disc> obstacles, double segment_length) {
  const auto pts = joint_positions(angles, segment_length);
  double clearance = std::numeric_limits<double>::infinity();
  for (const Disc& d : obstacles) {
    for (std::size_t i = 0; i < kReacherJoints; ++i) {
      clearance = std::min(clearance, point_segment_distance(d.center, pts[i], pts[i + 1]) - d.radius);
    }
  }
  return clearance;
}

bool configuration_collides(const JointAngles& angles, std::span<const Disc> obstacles, double segment_length) {
  return obstacle_clearance(angles, obstacles, segment_length) <= 0.0;
}

std::array<double, kOccupancyCells> occupancy_grid(std::span<const Disc> obstacles, double half_width) {
  std::array<double, kOccupancyCells> grid{};
  const double cell = 2.0 * half_width / static_cast<double>(kOccupancySide);
  for (std::size_t r = 0; r < kOccupancySide; ++r) {
    for (std::size_t c = 0; c < kOccupancySide; ++c) {
      const double x0 = -half_width + cell * static_cast<double>(c);
      const double y0 = -half_width + cell * static_cast<double>(r);
      for (const Disc& d : obstacles) {
        if (disc_intersects_square(d.center, d.radius, x0, y0, cell)) {
          grid[r * kOccupancySide + c] = 1.0;
          break;
        }
      }
    }
  }
  return grid;
}

Reacher2D::Reacher2D(ReacherParams params, std::vector<Disc> obstacles)
    : params_(params), obstacles_(std::move(obstacles)) {}

Reacher2D Reacher2D::generate(const ReacherParams& params, Rng& rng) {
  std::uniform_int_distribution<std::size_t> count_dist(params.min_obstacles, params.max_obstacles);
  std::uniform_real_distribution<double> area_dist(params.annulus_inner * params.annulus_inner,
                                                   params.annulus_outer * params.annulus_outer);
  std::uniform_real_distribution<double> angle_dist(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> radius_dist(params.radius_min, params.radius_max);
  const JointAngles rest{};
  for (;;) {
    const std::size_t count = count_dist(rng);
    std::vector<Disc> discs;
    discs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double r = std::sqrt(area_dist(rng));
      const double phi = angle_dist(rng);
      const double radius = radius_dist(rng);
      discs.push_back({Point2(r * std::cos(phi), r * std::sin(phi)), radius});
    }
    if (!configuration_collides(rest, discs, params.segment_length)) return Reacher2D(params, std::move(discs));
  }
}

std::array<double, kOccupancyCells> Reacher2D::occupancy() const {
  return occupancy_grid(obstacles_, params_.workspace_half_width);
}

std::vector<double> Reacher2D::sensor() const {
  std::vector<double> s(angles_.begin(), angles_.end());
  const auto occ = occupancy();
  s.insert(s.end(), occ.begin(), occ.end());
  return s;
}

void Reacher2D::check_limits(const JointAngles& target) const {
  for (std::size_t i = 0; i < kReacherJoints; ++i) {
    if (!(std::abs(target[i]) <= params_.joint_limit + kLimitSlack)) {
      throw JointLimitError("target angle " + std::to_string(i) + " = " + std::to_string(target[i]) +
                            " outside joint limits");
    }
  }
}

ReacherStepResult Reacher2D::preview(const JointAngles& target) const {
  check_limits(target);
  ReacherStepResult result;
  result.final_angles = angles_;
  const auto n = static_cast<double>(params_.sweep_substeps);
  for (std::size_t t = 1; t <= params_.sweep_substeps; ++t) {
    const double frac = static_cast<double>(t) / n;
    JointAngles q;
    for (std::size_t i = 0; i < kReacherJoints; ++i) q[i] = angles_[i] + frac * (target[i] - angles_[i]);
    if (configuration_collides(q, obstacles_, params_.segment_length)) {
      result.truncated = true;
      break;
    }
    result.final_angles = q;
    result.free_substeps = t;
  }
  if (!result.truncated) result.final_angles = target;
  for (double& a : result.final_angles) a = std::clamp(a, -params_.joint_limit, params_.joint_limit);
  result.tip = joint_positions(result.final_angles, params_.segment_length).back();
  return result;
}

ReacherStepResult Reacher2D::step(const JointAngles& target) {
  ReacherStepResult result = preview(target);
  angles_ = result.final_angles;
  return result;
}

}  // namespace affordmap::env
