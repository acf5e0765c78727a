#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "affordmap/env/geometry.hpp"
#include "affordmap/rng.hpp"

namespace affordmap::env {

inline constexpr std::size_t kReacherJoints = 8;
inline constexpr std::size_t kOccupancySide = 8;
inline constexpr std::size_t kOccupancyCells = kOccupancySide * kOccupancySide;
inline constexpr std::size_t kReacherSensorDim = kReacherJoints + kOccupancyCells;

using JointAngles = std::array<double, kReacherJoints>;

class JointLimitError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct Disc {
  Point2 center = Point2::Zero();
  double radius = 0.0;
};

struct ReacherParams {
  double segment_length = 0.5;
  double joint_limit = std::numbers::pi / 2;
  std::size_t sweep_substeps = 32;
  double workspace_half_width = 4.0;  // occupancy grid spans [-w, w]^2

  // environment generation
  std::size_t min_obstacles = 0;
  std::size_t max_obstacles = 4;
  double annulus_inner = 1.5;
  double annulus_outer = 3.5;
  double radius_min = 0.3;
  double radius_max = 0.8;

  double reach() const { return segment_length * static_cast<double>(kReacherJoints); }
};

/// Joint positions from the base (index 0, the origin) to the tip (index 8).
/// Angles are relative; segment i points along the cumulative sum of
/// angles 0..i.
std::array<Point2, kReacherJoints + 1> joint_positions(const JointAngles& angles, double segment_length = 0.5);

/// Tip position. Rejects angles outside +-joint_limit (1e-9 slack for
/// floating-point round trips).
Point2 reacher_kinematics(const JointAngles& angles, const ReacherParams& params = {});

/// Minimum over segments and obstacles of (segment-center distance - radius).
/// Positive means collision-free.
double obstacle_clearance(const JointAngles& angles, std::span<const Disc> obstacles, double segment_length = 0.5);

bool configuration_collides(const JointAngles& angles, std::span<const Disc> obstacles, double segment_length = 0.5);

/// One occupancy cell is 1 iff some disc intersects its closed square.
/// Index r * 8 + c, with column c along +x from -w and row r along +y from -w.
std::array<double, kOccupancyCells> occupancy_grid(std::span<const Disc> obstacles, double half_width = 4.0);

struct ReacherStepResult {
  JointAngles final_angles{};
  Point2 tip = Point2::Zero();
  bool truncated = false;
  std::size_t free_substeps = 0;  // substeps completed before the first collision
};

/// Planar eight-joint arm among disc obstacles. Moves are linear sweeps in
/// joint space, stopped at the last collision-free substep.
class Reacher2D {
 public:
  explicit Reacher2D(ReacherParams params = {}, std::vector<Disc> obstacles = {});

  /// Random obstacle layout; layouts where the rest pose collides are resampled.
  static Reacher2D generate(const ReacherParams& params, Rng& rng);

  const ReacherParams& params() const { return params_; }
  const std::vector<Disc>& obstacles() const { return obstacles_; }
  const JointAngles& angles() const { return angles_; }

  std::array<double, kOccupancyCells> occupancy() const;

  /// Joint angles followed by the 64 occupancy bits.
  std::vector<double> sensor() const;

  ReacherStepResult preview(const JointAngles& target) const;
  ReacherStepResult step(const JointAngles& target);

  void reset() { angles_.fill(0.0); }

 private:
  void check_limits(const JointAngles& target) const;

  ReacherParams params_;
  std::vector<Disc> obstacles_;
  JointAngles angles_{};
};

}  // namespace affordmap::env
