#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "affordmap/affordance/export.hpp"
#include "affordmap/affordance/interpolate.hpp"
#include "affordmap/affordance/metrics.hpp"
#include "affordmap/env/geometry.hpp"
#include "affordmap/env/task.hpp"
#include "affordmap/proposer/proposer.hpp"

using namespace affordmap;
using namespace affordmap::affordance;
using proposer::AffordanceGrid;
using proposer::OutcomeGrid;

namespace {

// Smooth, non-folding warp of the affordance square.
OutcomeGrid warped(const AffordanceGrid& g) {
  OutcomeGrid og;
  og.outcomes.resize(2, static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Eigen::Vector2d w = g.vertex(i);
    const double r = 1.0 + 0.4 * (w[0] + 1.0);
    const double t = 0.6 * w[1] + 0.1 * w[0] * w[0];
    og.outcomes.col(static_cast<Eigen::Index>(i)) = Eigen::Vector2d(r * std::cos(t), r * std::sin(t));
  }
  return og;
}

double brute_min(const Eigen::MatrixXd& p) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < p.cols(); ++j) best = std::min(best, (p.col(i) - p.col(j)).norm());
  }
  return best;
}

}  // namespace

TEST_CASE("unit square metrics") {
  AffordanceGrid g(2, 2);
  const Eigen::MatrixXd sq = (g.vertices().array() + 1.0) * 0.5;
  const GridMetrics m = grid_metrics(sq, g.edges(), 2.0);
  CHECK(m.hull_area == doctest::Approx(1.0));
  CHECK(m.min_pairwise == 1.0);
  CHECK(m.mean_neighbor == doctest::Approx(1.0));
  CHECK(m.coverage_fraction == doctest::Approx(0.5));
  CHECK_FALSE(m.has_prediction);
  const Eigen::MatrixXd shifted = sq.array() + 0.1;
  const GridMetrics p = grid_metrics(sq, g.edges(), 2.0, &shifted);
  CHECK(p.has_prediction);
  CHECK(p.prediction_rmse == doctest::Approx(std::sqrt(0.02)));
}

TEST_CASE("collinear outcomes have zero hull area") {
  Eigen::MatrixXd line(2, 5);
  line << 0, 1, 2, 3, 4, 0, 2, 4, 6, 8;
  CHECK(grid_metrics(line, {}, 1.0).hull_area == 0.0);
}

TEST_CASE("metrics min pairwise equals brute force and is a pure function") {
  Rng rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  AffordanceGrid g(2, 9);
  Eigen::MatrixXd p(2, 81);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = n(rng);
  const GridMetrics a = grid_metrics(p, g.edges(), 10.0);
  CHECK(a.min_pairwise == brute_min(p));
  CHECK(a == grid_metrics(Eigen::MatrixXd(p), g.edges(), 10.0));
}

TEST_CASE("target at a vertex outcome recovers the vertex") {
  AffordanceGrid g(2, 9);
  const OutcomeGrid og = warped(g);
  for (std::size_t i : {0u, 10u, 40u, 57u, 80u}) {
    const auto r = interpolate_affordance(og.point(i), og, g, 0.1);
    CHECK_FALSE(r.fallback);
    CHECK(r.residual < 1e-9);
    CHECK((r.omega - g.vertex(i)).norm() < 1e-9);
  }
}

TEST_CASE("identity patch centre maps to the cell centre") {
  AffordanceGrid g(2, 5);
  OutcomeGrid og;
  og.outcomes = 3.0 * g.vertices();
  og.outcomes.row(0).array() += 1.0;
  const Eigen::Vector2d centre_omega(-0.25, 0.25);
  const Eigen::Vector2d target(3.0 * centre_omega[0] + 1.0, 3.0 * centre_omega[1]);
  const auto r = interpolate_affordance(target, og, g, 0.1);
  CHECK_FALSE(r.fallback);
  CHECK(r.residual < 1e-12);
  CHECK((r.omega - centre_omega).norm() < 1e-12);
}

TEST_CASE("forward then inverse bilinear recovers local coordinates") {
  AffordanceGrid g(2, 9);
  const OutcomeGrid og = warped(g);
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> cell(0, 7);
  for (int i = 0; i < 500; ++i) {
    const std::size_t c0 = cell(rng), c1 = cell(rng);
    REQUIRE(cell_orientation(og, g, c0, c1) != 0.0);
    const Eigen::Vector2d uv(u(rng), u(rng));
    const env::Point2 x = bilinear_point(og, g, c0, c1, uv[0], uv[1]);
    CHECK((invert_cell(og, g, c0, c1, x) - uv).norm() < 1e-6);
  }
}

TEST_CASE("claimed residual is reproduced by re-evaluating the patch") {
  AffordanceGrid g(2, 9);
  const OutcomeGrid og = warped(g);
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 200; ++i) {
    const env::Point2 target(u(rng) + 1.0, u(rng));
    const auto r = interpolate_affordance(target, og, g, 10.0);
    REQUIRE_FALSE(r.fallback);
    const std::size_t c0 = r.cell % (g.side() - 1), c1 = r.cell / (g.side() - 1);
    const double h = g.spacing();
    const double uu = (r.omega[0] + 1.0) / h - static_cast<double>(c0);
    const double vv = (r.omega[1] + 1.0) / h - static_cast<double>(c1);
    const double again = (bilinear_point(og, g, c0, c1, uu, vv) - target).norm();
    CHECK(std::abs(again - r.residual) < 1e-6);
  }
}

TEST_CASE("far targets fall back to the nearest vertex") {
  AffordanceGrid g(2, 9);
  const OutcomeGrid og = warped(g);
  const env::Point2 far(100, 100);
  const auto r = interpolate_affordance(far, og, g, 0.1);
  CHECK(r.fallback);
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if ((og.point(i) - far).norm() < (og.point(nearest) - far).norm()) nearest = i;
  }
  CHECK(r.omega == g.vertex(nearest));
  CHECK(r.residual == doctest::Approx((og.point(nearest) - far).norm()));
}

TEST_CASE("folded cells are skipped") {
  AffordanceGrid g(2, 3);
  OutcomeGrid og;
  og.outcomes = g.vertices();
  // push the centre vertex far past its right neighbour: the two left cells fold
  og.outcomes.col(4) = Eigen::Vector2d(3.0, 0.0);
  int folded = 0;
  for (std::size_t c1 = 0; c1 < 2; ++c1) {
    for (std::size_t c0 = 0; c0 < 2; ++c0) folded += cell_orientation(og, g, c0, c1) < 0 ? 1 : 0;
  }
  CHECK(folded >= 1);
  const auto r = interpolate_affordance(Eigen::Vector2d(-0.5, -0.5), og, g, 1e-3);
  if (!r.fallback) {
    const std::size_t c0 = r.cell % 2, c1 = r.cell / 2;
    CHECK(cell_orientation(og, g, c0, c1) > 0);
  }
}

TEST_CASE("reach replays vertex outcomes and honours the fallback contract") {
  env::ReacherTask task;
  Rng rng(5);
  const auto net = proposer::make_proposer(task, predictor::Architecture{}, 2, rng);
  AffordanceGrid g(2, 9);
  auto start = task.canonical_world();
  const auto env_grid = proposer::rollout_environment(net, task, *start, g.vertices(), rng).grid;
  const double r_max = 0.1 * task.reach_scale();
  for (std::size_t i : {0u, 13u, 40u, 66u, 80u}) {
    const auto r = reach(env_grid.point(i), net, task, *start, env_grid, g, r_max, rng);
    CHECK(r.error < 1e-6);
  }
  const env::Point2 far(100, 100);
  const auto r = reach(far, net, task, *start, env_grid, g, r_max, rng);
  CHECK(r.interpolation.fallback);
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) nearest = std::min(nearest, (env_grid.point(i) - far).norm());
  CHECK(std::abs(r.error - nearest) < 1e-6);
}

TEST_CASE("transplant is a no-op without obstacles") {
  env::ReacherTask task;
  Rng rng(6);
  const auto net = proposer::make_proposer(task, predictor::Architecture{}, 2, rng);
  AffordanceGrid g(2, 5);
  auto start = task.canonical_world();
  const auto cmp = transplant_compare(net, task, *start, g, 40.0, rng);
  CHECK(cmp.conditioned.rollout.grid.outcomes == cmp.transplanted.rollout.grid.outcomes);
  CHECK(cmp.conditioned.metrics == cmp.transplanted.metrics);
}

TEST_CASE("evaluate_grid with a predictor reports both grids") {
  env::ReacherTask task;
  Rng rng(7);
  predictor::Architecture arch;
  arch.trunk_hidden = {16};
  arch.head_hidden = {16};
  const auto model = predictor::make_predictor(task, arch, true, rng);
  const auto net = proposer::make_proposer(task, arch, 2, rng);
  AffordanceGrid g(2, 4);
  auto start = task.canonical_world();
  EvaluateOptions opt;
  opt.model = &model;
  const auto ev = evaluate_grid(net, task, *start, g, 40.0, rng, opt);
  REQUIRE(ev.predicted.has_value());
  CHECK(ev.predicted->has_sigma());
  CHECK(ev.metrics.has_prediction);
  const Eigen::MatrixXd diff = ev.predicted->outcomes - ev.rollout.grid.outcomes;
  CHECK(ev.metrics.prediction_rmse == doctest::Approx(std::sqrt(diff.colwise().squaredNorm().mean())));
}

TEST_CASE("reacher reachable area estimate is close to a dense oracle") {
  env::ReacherTask task;
  Rng rng(8);
  // 1e7-sample estimate of this estimator, computed offline
  constexpr double dense = 47.81;
  const double a = reachable_area(task, kReachableAreaSamples, rng);
  CHECK(std::abs(a - dense) / dense < 0.02);
  CHECK(a <= std::numbers::pi * task.reach_scale() * task.reach_scale());
}

TEST_CASE("csv and svg exports") {
  AffordanceGrid g(2, 9);
  OutcomeGrid og = warped(g);
  og.sigma = Eigen::VectorXd::Constant(81, 0.25);
  og.source = proposer::OutcomeSource::predictor;
  std::ostringstream csv;
  write_grid_csv(csv, g, og);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 82);
  CHECK(text.rfind("omega0,omega1,x,y,sigma,source\n", 0) == 0);
  CHECK(text.find(",0.25,predictor\n") != std::string::npos);
  std::ostringstream svg;
  write_grid_svg(svg, g, og, 3.0);
  const std::string s = svg.str();
  std::size_t circles = 0;
  for (std::size_t pos = s.find("<circle"); pos != std::string::npos; pos = s.find("<circle", pos + 1)) ++circles;
  CHECK(circles == 81);
  std::ostringstream kv;
  write_metrics_kv(kv, grid_metrics(og.outcomes, g.edges(), 10.0), "eval.");
  CHECK(kv.str().find("eval.min_pairwise=") != std::string::npos);
}
