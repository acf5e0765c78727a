#include "affordmap/env/task.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>

namespace affordmap::env {

std::string_view to_string(TaskKind kind) { return kind == TaskKind::reacher ? "reacher" : "loco"; }

TaskKind task_kind_from_string(std::string_view name) {
  if (name == "reacher") return TaskKind::reacher;
  if (name == "loco") return TaskKind::loco;
  throw std::invalid_argument("unknown task '" + std::string(name) + "' (expected reacher or loco)");
}

bool ActionBox::contains(const Eigen::VectorXd& a, double slack) const {
  if (a.size() != lo.size()) return false;
  return ((a.array() >= lo.array() - slack) && (a.array() <= hi.array() + slack)).all();
}

Eigen::VectorXd ActionBox::clamp(const Eigen::VectorXd& a) const { return a.cwiseMax(lo).cwiseMin(hi); }

Eigen::VectorXd ActionBox::sample(Rng& rng) const {
  Eigen::VectorXd a(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    std::uniform_real_distribution<double> dist(lo[i], hi[i]);
    a[i] = dist(rng);
  }
  return a;
}


// ---- reacher ---------------------------------------------------------------

ReacherTask::ReacherTask(ReacherParams params) : params_(params) {
  box_.lo = Eigen::VectorXd::Constant(kReacherJoints, -params_.joint_limit);
  box_.hi = Eigen::VectorXd::Constant(kReacherJoints, params_.joint_limit);
}

Eigen::VectorXd ReacherTask::regression_target(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                               const Eigen::VectorXd& s_next) const {
  Eigen::VectorXd y(prediction_dim());
  y.head(kReacherJoints) = s_next.head(kReacherJoints);
  y.tail(2) = project(s_next);
  return y;
}

Point2 ReacherTask::project(const Eigen::VectorXd& sensor) const {
  JointAngles q;
  for (std::size_t i = 0; i < kReacherJoints; ++i) {
    q[i] = std::clamp(sensor[static_cast<Eigen::Index>(i)], -params_.joint_limit, params_.joint_limit);
  }
  return joint_positions(q, params_.segment_length).back();
}

Eigen::VectorXd ReacherTask::blank_obstacles(const Eigen::VectorXd& sensor) const {
  Eigen::VectorXd out = sensor;
  out.tail(kOccupancyCells).setZero();
  return out;
}

std::unique_ptr<World> ReacherTask::sample_world(Rng& rng) const {
  return std::make_unique<ReacherWorld>(Reacher2D::generate(params_, rng));
}

std::unique_ptr<World> ReacherTask::canonical_world() const {
  return std::make_unique<ReacherWorld>(Reacher2D(params_));
}

std::unique_ptr<World> ReacherTask::world_for(Reacher2D arm) const {
  return std::make_unique<ReacherWorld>(std::move(arm));
}

Eigen::VectorXd ReacherWorld::sensor() const {
  const auto s = arm_.sensor();
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

void ReacherWorld::step(const Eigen::VectorXd& action, Rng&) {
  if (action.size() != static_cast<Eigen::Index>(kReacherJoints)) {
    throw std::invalid_argument("reacher action must have 8 entries");
  }
  const double lim = arm_.params().joint_limit;
  JointAngles target;
  for (std::size_t i = 0; i < kReacherJoints; ++i) {
    target[i] = std::clamp(action[static_cast<Eigen::Index>(i)], -lim, lim);
  }
  last_ = arm_.step(target);
  ++steps_;
}

Point2 ReacherWorld::outcome() const { return reacher_kinematics(arm_.angles(), arm_.params()); }

// ---- locomotion ------------------------------------------------------------

LocoTask::LocoTask(LocoParams params) : params_(params) {
  box_.lo = Eigen::Vector4d(0.0, 0.0, -std::numbers::pi, -std::numbers::pi);
  box_.hi = Eigen::Vector4d(1.0, 1.0, std::numbers::pi, std::numbers::pi);
}

Eigen::VectorXd LocoTask::regression_target(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                            const Eigen::VectorXd& s_next) const {
  return s_next;
}

Point2 LocoTask::project(const Eigen::VectorXd& sensor) const { return Point2(sensor[0], sensor[1]); }

std::unique_ptr<World> LocoTask::sample_world(Rng&) const { return canonical_world(); }

std::unique_ptr<World> LocoTask::canonical_world() const { return std::make_unique<LocoWorld>(params_, Pose{}); }

std::unique_ptr<Task> LocoTask::noise_free() const {
  LocoParams p = params_;
  p.noise = false;
  return std::make_unique<LocoTask>(p);
}

Eigen::VectorXd LocoWorld::sensor() const {
  const auto s = loco_sensor(pose_, steps_, params_.horizon);
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

void LocoWorld::step(const Eigen::VectorXd& action, Rng& rng) {
  if (action.size() != static_cast<Eigen::Index>(kLocoActionDim)) {
    throw std::invalid_argument("locomotion action must have 4 entries");
  }
  LocoAction a{std::clamp(action[0], 0.0, 1.0), std::clamp(action[1], 0.0, 1.0),
               std::clamp(action[2], -std::numbers::pi, std::numbers::pi),
               std::clamp(action[3], -std::numbers::pi, std::numbers::pi)};
  pose_ = loco_step(pose_, a, params_, rng);
  ++steps_;
}

}  // namespace affordmap::env
