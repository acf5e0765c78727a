#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "affordmap/env/geometry.hpp"
#include "affordmap/env/loco.hpp"
#include "affordmap/env/reacher.hpp"
#include "affordmap/rng.hpp"

namespace affordmap::env {

enum class TaskKind { reacher, loco };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

/// Per-dimension closed box [lo, hi] for admissible actions.
struct ActionBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
  bool contains(const Eigen::VectorXd& a, double slack = 0.0) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& a) const;
  Eigen::VectorXd sample(Rng& rng) const;
};

/// One environment instance in the middle of an episode.
class World {
 public:
  virtual ~World() = default;

  virtual Eigen::VectorXd sensor() const = 0;
  /// Applies one action (clamped to the action box) and advances the clock.
  virtual void step(const Eigen::VectorXd& action, Rng& rng) = 0;
  /// Projection of the current sensor into the 2D target space.
  virtual Point2 outcome() const = 0;
  virtual std::size_t steps_taken() const = 0;
  virtual std::unique_ptr<World> clone() const = 0;
};

/// Environment family: shapes, action bounds, the world distribution used
/// during training, and how the predictor's regression target relates to
/// sensor vectors.
class Task {
 public:
  virtual ~Task() = default;

  virtual TaskKind kind() const = 0;
  virtual std::size_t sensor_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual std::size_t horizon() const = 0;
  virtual const ActionBox& action_box() const = 0;

  /// Length of the predictor's regression target.
  virtual std::size_t prediction_dim() const = 0;
  /// Offset of the 2D outcome inside the regression target.
  virtual std::size_t outcome_offset() const = 0;
  /// True when the regression target is the next sensor vector itself, so
  /// predictions can be fed back for multi-step chains.
  virtual bool prediction_is_sensor() const = 0;
  virtual Eigen::VectorXd regression_target(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                                            const Eigen::VectorXd& s_next) const = 0;

  /// Target-space projection of a full sensor vector.
  virtual Point2 project(const Eigen::VectorXd& sensor) const = 0;

  /// Sensor with every obstacle reading zeroed (identity when the task has none).
  virtual Eigen::VectorXd blank_obstacles(const Eigen::VectorXd& sensor) const = 0;

  /// Training-distribution world (random obstacles for the reacher).
  virtual std::unique_ptr<World> sample_world(Rng& rng) const = 0;
  /// Obstacle-free reacher / origin-start locomotion.
  virtual std::unique_ptr<World> canonical_world() const = 0;

  /// Copy with stochastic dynamics switched off (identity for deterministic tasks).
  virtual std::unique_ptr<Task> noise_free() const = 0;
  virtual bool stochastic() const = 0;

  /// Characteristic length of the target space (reach radius for the arm).
  virtual double reach_scale() const = 0;
};

class ReacherTask final : public Task {
 public:
  explicit ReacherTask(ReacherParams params = {});

  const ReacherParams& params() const { return params_; }

  TaskKind kind() const override { return TaskKind::reacher; }
  std::size_t sensor_dim() const override { return kReacherSensorDim; }
  std::size_t action_dim() const override { return kReacherJoints; }
  std::size_t horizon() const override { return 1; }
  const ActionBox& action_box() const override { return box_; }
  std::size_t prediction_dim() const override { return kReacherJoints + 2; }
  std::size_t outcome_offset() const override { return kReacherJoints; }
  bool prediction_is_sensor() const override { return false; }
  Eigen::VectorXd regression_target(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& s_next) const override;
  Point2 project(const Eigen::VectorXd& sensor) const override;
  Eigen::VectorXd blank_obstacles(const Eigen::VectorXd& sensor) const override;
  std::unique_ptr<World> sample_world(Rng& rng) const override;
  std::unique_ptr<World> canonical_world() const override;
  std::unique_ptr<World> world_for(Reacher2D arm) const;
  std::unique_ptr<Task> noise_free() const override { return std::make_unique<ReacherTask>(params_); }
  bool stochastic() const override { return false; }
  double reach_scale() const override { return params_.reach(); }

 private:
  ReacherParams params_;
  ActionBox box_;
};

class LocoTask final : public Task {
 public:
  explicit LocoTask(LocoParams params = {});

  const LocoParams& params() const { return params_; }

  TaskKind kind() const override { return TaskKind::loco; }
  std::size_t sensor_dim() const override { return kLocoSensorDim; }
  std::size_t action_dim() const override { return kLocoActionDim; }
  std::size_t horizon() const override { return params_.horizon; }
  const ActionBox& action_box() const override { return box_; }
  std::size_t prediction_dim() const override { return kLocoSensorDim; }
  std::size_t outcome_offset() const override { return 0; }
  bool prediction_is_sensor() const override { return true; }
  Eigen::VectorXd regression_target(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& s_next) const override;
  Point2 project(const Eigen::VectorXd& sensor) const override;
  Eigen::VectorXd blank_obstacles(const Eigen::VectorXd& sensor) const override { return sensor; }
  std::unique_ptr<World> sample_world(Rng& rng) const override;
  std::unique_ptr<World> canonical_world() const override;
  std::unique_ptr<Task> noise_free() const override;
  bool stochastic() const override { return params_.noise; }
  /// Distance covered in one horizon at full in-phase drive.
  double reach_scale() const override { return static_cast<double>(params_.horizon) * params_.dt; }

 private:
  LocoParams params_;
  ActionBox box_;
};

class ReacherWorld final : public World {
 public:
  explicit ReacherWorld(Reacher2D arm) : arm_(std::move(arm)) {}

  const Reacher2D& arm() const { return arm_; }
  const ReacherStepResult& last_step() const { return last_; }

  Eigen::VectorXd sensor() const override;
  void step(const Eigen::VectorXd& action, Rng& rng) override;
  Point2 outcome() const override;
  std::size_t steps_taken() const override { return steps_; }
  std::unique_ptr<World> clone() const override { return std::make_unique<ReacherWorld>(*this); }

 private:
  Reacher2D arm_;
  ReacherStepResult last_;
  std::size_t steps_ = 0;
};

class LocoWorld final : public World {
 public:
  LocoWorld(LocoParams params, Pose start) : params_(params), pose_(start) {}

  const Pose& pose() const { return pose_; }

  Eigen::VectorXd sensor() const override;
  void step(const Eigen::VectorXd& action, Rng& rng) override;
  Point2 outcome() const override { return Point2(pose_.x, pose_.y); }
  std::size_t steps_taken() const override { return steps_; }
  std::unique_ptr<World> clone() const override { return std::make_unique<LocoWorld>(*this); }

 private:
  LocoParams params_;
  Pose pose_;
  std::size_t steps_ = 0;
};

}  // namespace affordmap::env
