#include <doctest.h>

#include <cmath>
#include <numbers>

#include "affordmap/env/geometry.hpp"
#include "affordmap/env/loco.hpp"
#include "affordmap/env/reacher.hpp"
#include "affordmap/env/task.hpp"

using namespace affordmap;
using namespace affordmap::env;

namespace {

JointAngles random_angles(Rng& rng, double lim = std::numbers::pi / 2) {
  std::uniform_real_distribution<double> u(-lim, lim);
  JointAngles q;
  for (auto& a : q) a = u(rng);
  return q;
}

// cumulative heading sum, written independently of the library
Point2 oracle_tip(const JointAngles& q, double len) {
  double heading = 0, x = 0, y = 0;
  for (double a : q) {
    heading += a;
    x += len * std::cos(heading);
    y += len * std::sin(heading);
  }
  return {x, y};
}

}  // namespace

TEST_CASE("rest pose reaches straight out to 4") {
  const Point2 tip = reacher_kinematics(JointAngles{});
  CHECK(tip.x() == doctest::Approx(4.0));
  CHECK(tip.y() == doctest::Approx(0.0));
}

TEST_CASE("kinematics agrees with the cumulative-sum oracle") {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const JointAngles q = random_angles(rng);
    CHECK((reacher_kinematics(q) - oracle_tip(q, 0.5)).norm() < 1e-12);
  }
}

TEST_CASE("kinematics rejects angles beyond the joint limit") {
  JointAngles q{};
  q[3] = std::numbers::pi / 2 + 1e-6;
  CHECK_THROWS_AS(reacher_kinematics(q), JointLimitError);
  q[3] = std::numbers::pi / 2 + 1e-10;
  CHECK_NOTHROW(reacher_kinematics(q));
}

TEST_CASE("sweep without obstacles lands exactly on the target") {
  Rng rng(2);
  Reacher2D arm;
  const JointAngles q = random_angles(rng);
  const auto r = arm.step(q);
  CHECK_FALSE(r.truncated);
  CHECK(r.free_substeps == 32);
  CHECK(r.final_angles == q);
  CHECK((r.tip - oracle_tip(q, 0.5)).norm() < 1e-12);
}

TEST_CASE("sweep stops before an obstacle and never returns a colliding pose") {
  Rng rng(5);
  ReacherParams params;
  params.min_obstacles = 2;
  int truncated = 0;
  for (int e = 0; e < 300; ++e) {
    Reacher2D arm = Reacher2D::generate(params, rng);
    CHECK_FALSE(configuration_collides(arm.angles(), arm.obstacles()));
    for (int s = 0; s < 3; ++s) {
      const auto r = arm.step(random_angles(rng));
      CHECK_FALSE(configuration_collides(r.final_angles, arm.obstacles()));
      truncated += r.truncated ? 1 : 0;
      if (r.truncated) CHECK(r.free_substeps < 32);
    }
  }
  CHECK(truncated > 0);
}

TEST_CASE("a wall of obstacles blocks the sweep at the first substep") {
  // a disc sitting on the arm's path right next to the rest pose
  Reacher2D arm(ReacherParams{}, {Disc{Point2(3.0, 0.6), 0.5}});
  JointAngles target{};
  target[0] = 0.5;
  const auto r = arm.preview(target);
  CHECK(r.truncated);
  CHECK(r.free_substeps < 32);
  CHECK_FALSE(configuration_collides(r.final_angles, arm.obstacles()));
}

TEST_CASE("generated obstacles respect the annulus and radius ranges") {
  Rng rng(8);
  ReacherParams params;
  for (int e = 0; e < 200; ++e) {
    const Reacher2D arm = Reacher2D::generate(params, rng);
    CHECK(arm.obstacles().size() <= 4);
    for (const Disc& d : arm.obstacles()) {
      CHECK(d.center.norm() >= 1.5 - 1e-12);
      CHECK(d.center.norm() <= 3.5 + 1e-12);
      CHECK(d.radius >= 0.3);
      CHECK(d.radius <= 0.8);
    }
  }
}

TEST_CASE("occupancy grid matches a Monte Carlo point-in-disc oracle") {
  Rng rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ReacherParams params;
  params.min_obstacles = 3;
  for (int e = 0; e < 20; ++e) {
    const Reacher2D arm = Reacher2D::generate(params, rng);
    const auto occ = arm.occupancy();
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        const double x0 = -4.0 + c, y0 = -4.0 + r;
        bool hit = false;
        for (int k = 0; k < 4000 && !hit; ++k) {
          const Point2 p(x0 + u(rng), y0 + u(rng));
          for (const Disc& d : arm.obstacles()) hit = hit || (p - d.center).norm() < d.radius;
        }
        // sampled hits prove occupancy; exact clamped distance decides the rest
        bool exact = false;
        for (const Disc& d : arm.obstacles()) {
          const Point2 q(std::clamp(d.center.x(), x0, x0 + 1), std::clamp(d.center.y(), y0, y0 + 1));
          exact = exact || (q - d.center).norm() <= d.radius;
        }
        if (hit) CHECK(occ[static_cast<std::size_t>(r * 8 + c)] == 1.0);
        CHECK((occ[static_cast<std::size_t>(r * 8 + c)] == 1.0) == exact);
      }
    }
  }
}

TEST_CASE("sensor is joint angles then occupancy") {
  Reacher2D arm(ReacherParams{}, {Disc{Point2(2.5, 2.5), 0.4}});
  const auto s = arm.sensor();
  REQUIRE(s.size() == kReacherSensorDim);
  for (std::size_t i = 0; i < kReacherJoints; ++i) CHECK(s[i] == 0.0);
  double occupied = 0;
  for (std::size_t i = kReacherJoints; i < s.size(); ++i) occupied += s[i];
  CHECK(occupied >= 1.0);
}

TEST_CASE("convex hull area of a unit square and rotation invariance") {
  std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  CHECK(convex_hull_area(sq) == doctest::Approx(1.0));
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Point2> pts(50);
  for (auto& p : pts) p = Point2(n(rng), n(rng));
  const double a = convex_hull_area(pts);
  const double t = 0.7;
  Eigen::Matrix2d rot;
  rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  for (auto& p : pts) p = rot * p;
  CHECK(std::abs(convex_hull_area(pts) - a) < 1e-9);
}

TEST_CASE("degenerate hulls have zero area") {
  std::vector<Point2> two{{0, 0}, {1, 1}};
  CHECK(convex_hull_area(two) == 0.0);
  std::vector<Point2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  CHECK(convex_hull_area(line) == 0.0);
}

TEST_CASE("point-segment distance") {
  CHECK(point_segment_distance({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(point_segment_distance({3, 0}, {-1, 0}, {1, 0}) == doctest::Approx(2.0));
}

TEST_CASE("loco: in-phase straight drive covers one unit per step without noise") {
  LocoParams p;
  p.noise = false;
  Rng rng(1);
  Pose pose;
  for (int t = 0; t < 5; ++t) pose = loco_step(pose, {1.0, 1.0, 0.3, 0.3}, p, rng);
  CHECK(pose.x == doctest::Approx(5.0));
  CHECK(pose.y == doctest::Approx(0.0));
}

TEST_CASE("loco: anti-phase legs do not advance") {
  LocoParams p;
  p.noise = false;
  Rng rng(1);
  const Pose pose = loco_step({}, {0.8, 0.8, std::numbers::pi, 0.0}, p, rng);
  CHECK(std::hypot(pose.x, pose.y) < 1e-12);
}

TEST_CASE("loco: overdrive switches to the slip noise level") {
  LocoParams p;
  CHECK(in_overdrive({1.0, 0.9, 0, 0}, p));
  CHECK_FALSE(in_overdrive({0.7, 0.7, 0, 0}, p));
  Rng rng(4);
  double sum = 0, sum2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Pose q = loco_step({}, {1.0, 1.0, 0, 0}, p, rng);
    sum += q.x;
    sum2 += q.x * q.x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sd == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("loco: out-of-box actions are rejected by the raw step") {
  Rng rng(1);
  CHECK_THROWS(loco_step({}, {1.2, 0.0, 0.0, 0.0}, LocoParams{}, rng));
}

TEST_CASE("tasks expose consistent shapes") {
  ReacherTask r;
  CHECK(r.sensor_dim() == 72);
  CHECK(r.action_dim() == 8);
  CHECK(r.prediction_dim() == 10);
  CHECK(r.horizon() == 1);
  CHECK(r.reach_scale() == doctest::Approx(4.0));
  LocoTask l;
  CHECK(l.sensor_dim() == 5);
  CHECK(l.action_dim() == 4);
  CHECK(l.horizon() == 5);
  CHECK(l.prediction_is_sensor());
  const auto w = l.canonical_world();
  CHECK(w->sensor()[2] == doctest::Approx(1.0));  // cos(0)
}

TEST_CASE("reacher regression target is final angles and tip") {
  ReacherTask task;
  Rng rng(6);
  auto w = task.canonical_world();
  const Eigen::VectorXd s = w->sensor();
  const Eigen::VectorXd a = task.action_box().sample(rng);
  w->step(a, rng);
  const Eigen::VectorXd y = task.regression_target(s, a, w->sensor());
  CHECK((y.head(8) - a).norm() < 1e-12);
  CHECK((y.tail(2) - w->outcome()).norm() < 1e-12);
}

TEST_CASE("blanking zeroes only the occupancy part") {
  ReacherTask task;
  Eigen::VectorXd s = Eigen::VectorXd::Ones(72);
  const Eigen::VectorXd b = task.blank_obstacles(s);
  CHECK(b.head(8).sum() == 8.0);
  CHECK(b.tail(64).sum() == 0.0);
}
