#include "affordmap/affordance/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "affordmap/env/geometry.hpp"
#include "affordmap/proposer/spread_loss.hpp"

namespace affordmap::affordance {

namespace {

constexpr std::size_t kRadialBands = 200;
constexpr std::size_t kPolarSectors = 180;

// Half the samples have independent uniform joints; the other half bend
// every joint around a shared angle, which reaches the curled-up boundary
// of the workspace far more often than independent joints do.
double reacher_area(const env::ReacherParams& params, std::size_t samples, Rng& rng) {
  const double lim = params.joint_limit;
  const double reach = params.reach();
  std::uniform_real_distribution<double> joint(-lim, lim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> phi_max(kRadialBands, -1.0);
  env::JointAngles q{};
  for (std::size_t i = 0; i < samples; ++i) {
    if (i % 2 == 0) {
      for (std::size_t j = 1; j < env::kReacherJoints; ++j) q[j] = joint(rng);
    } else {
      const double centre = joint(rng) * unit(rng);
      double spread = unit(rng);
      spread = spread * spread * lim;
      for (std::size_t j = 1; j < env::kReacherJoints; ++j) {
        q[j] = std::clamp(centre + spread * (2.0 * unit(rng) - 1.0), -lim, lim);
      }
    }
    q[0] = 0.0;
    const env::Point2 tip = env::joint_positions(q, params.segment_length).back();
    const auto band = std::min(kRadialBands - 1, static_cast<std::size_t>(tip.norm() / reach * kRadialBands));
    phi_max[band] = std::max(phi_max[band], std::abs(std::atan2(tip.y(), tip.x())));
  }
  const double dr = reach / static_cast<double>(kRadialBands);
  double area = 0.0;
  for (std::size_t b = 0; b < kRadialBands; ++b) {
    if (phi_max[b] < 0.0) continue;
    const double r = (static_cast<double>(b) + 0.5) * dr;
    area += r * dr * std::min(2.0 * std::numbers::pi, 2.0 * lim + 2.0 * phi_max[b]);
  }
  return area;
}

// For a fixed heading sequence the position is linear in the per-step speeds,
// so the boundary of the reachable set comes from steps at either full or
// zero speed. The first half of the budget mixes uniform actions with such
// bang-bang drives (in phase at the largest amplitude sum the turn rate
// allows, or in anti-phase for no forward motion). The second half perturbs
// the action sequence holding the record radius of a random sector.
double loco_area(const env::LocoTask& task, std::size_t samples, Rng& rng) {
  const auto quiet = task.noise_free();
  const env::ActionBox& box = task.action_box();
  const std::size_t h = quiet->horizon();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<double> r_max(kPolarSectors, 0.0);
  std::vector<Eigen::MatrixXd> best(kPolarSectors);
  const auto start = quiet->canonical_world();

  const auto record = [&](const Eigen::MatrixXd& seq) {
    auto world = start->clone();
    for (std::size_t t = 0; t < h; ++t) world->step(seq.col(static_cast<Eigen::Index>(t)), rng);
    const env::Point2 p = world->outcome();
    const double phi = std::atan2(p.y(), p.x()) + std::numbers::pi;
    const auto sector =
        std::min(kPolarSectors - 1, static_cast<std::size_t>(phi / (2.0 * std::numbers::pi) * kPolarSectors));
    if (p.norm() > r_max[sector] || best[sector].size() == 0) {
      r_max[sector] = std::max(r_max[sector], p.norm());
      best[sector] = seq;
    }
  };

  Eigen::MatrixXd seq(4, static_cast<Eigen::Index>(h));
  const std::size_t global = samples / 2;
  for (std::size_t i = 0; i < global; ++i) {
    const bool uniform = i % 4 == 0;
    const double centre = sym(rng);
    const double spread = unit(rng) * unit(rng);
    const double stop = 0.5 * unit(rng);
    for (Eigen::Index t = 0; t < seq.cols(); ++t) {
      if (uniform) {
        seq.col(t) = box.sample(rng);
      } else {
        const double d = std::clamp(centre + spread * sym(rng), -1.0, 1.0);
        const double phase = std::numbers::pi * sym(rng);
        const double other = unit(rng) < stop ? (phase > 0 ? phase - std::numbers::pi : phase + std::numbers::pi) : phase;
        seq.col(t) << std::min(1.0, 1.0 - d), std::min(1.0, 1.0 + d), phase, other;
      }
    }
    record(seq);
  }

  std::vector<std::size_t> filled;
  for (std::size_t s = 0; s < kPolarSectors; ++s) {
    if (best[s].size() > 0) filled.push_back(s);
  }
  std::uniform_int_distribution<std::size_t> pick(0, filled.empty() ? 0 : filled.size() - 1);
  for (std::size_t i = global; i < samples && !filled.empty(); ++i) {
    seq = best[filled[pick(rng)]];
    const double scale = 0.2 * unit(rng);
    for (Eigen::Index t = 0; t < seq.cols(); ++t) {
      for (Eigen::Index d = 0; d < 4; ++d) seq(d, t) += scale * (box.hi[d] - box.lo[d]) * jitter(rng);
      seq.col(t) = box.clamp(seq.col(t));
    }
    record(seq);
  }

  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(kPolarSectors);
  double area = 0.0;
  for (double r : r_max) area += 0.5 * r * r * dphi;
  return area;
}

}  // namespace

GridMetrics grid_metrics(const Eigen::MatrixXd& outcomes, std::span<const proposer::Edge> edges,
                         double reachable_area, const Eigen::MatrixXd* predicted) {
  GridMetrics m;
  m.min_pairwise = outcomes.cols() >= 2 ? proposer::min_pairwise_distance(outcomes) : 0.0;
  m.mean_neighbor = edges.empty() ? 0.0 : proposer::mean_edge_length(outcomes, edges);
  std::vector<env::Point2> pts;
  pts.reserve(static_cast<std::size_t>(outcomes.cols()));
  for (Eigen::Index i = 0; i < outcomes.cols(); ++i) pts.emplace_back(outcomes.col(i));
  m.hull_area = env::convex_hull_area(pts);
  m.coverage_fraction = reachable_area > 0.0 ? m.hull_area / reachable_area : 0.0;
  if (predicted != nullptr) {
    if (predicted->cols() != outcomes.cols() || predicted->rows() != outcomes.rows()) {
      throw std::invalid_argument("predicted outcome grid does not match the environment grid");
    }
    m.prediction_rmse = outcomes.cols() > 0
                            ? std::sqrt((outcomes - *predicted).colwise().squaredNorm().mean())
                            : 0.0;
    m.has_prediction = true;
  }
  return m;
}

double reachable_area(const env::Task& task, std::size_t samples, Rng& rng) {
  if (const auto* r = dynamic_cast<const env::ReacherTask*>(&task)) return reacher_area(r->params(), samples, rng);
  if (const auto* l = dynamic_cast<const env::LocoTask*>(&task)) return loco_area(*l, samples, rng);
  throw std::invalid_argument("no reachable-area estimator for this task");
}

GridEvaluation evaluate_grid(const proposer::Proposer& net, const env::Task& task, const env::World& start,
                             const proposer::AffordanceGrid& grid, double reachable_area, Rng& rng,
                             const EvaluateOptions& options) {
  if (options.trials == 0) throw std::invalid_argument("evaluate_grid needs at least one trial");
  GridEvaluation ev;
  ev.rollout = proposer::rollout_environment(net, task, start, grid.vertices(), rng, options.trials, options.view);
  const Eigen::MatrixXd* predicted = nullptr;
  if (options.model != nullptr) {
    Eigen::VectorXd s0 = start.sensor();
    if (options.view == proposer::SensorView::obstacles_blanked) s0 = task.blank_obstacles(s0);
    const Eigen::MatrixXf omega = grid.vertices().cast<float>();
    const auto pr = proposer::rollout_predictor(net, *options.model, task, s0, omega, task.horizon());
    ev.predicted = pr.outcome_grid(options.model->layout.gaussian);
    predicted = &ev.predicted->outcomes;
  }
  ev.metrics = grid_metrics(ev.rollout.grid.outcomes, grid.edges(), reachable_area, predicted);
  return ev;
}

TransplantComparison transplant_compare(const proposer::Proposer& net, const env::Task& task, const env::World& start,
                                        const proposer::AffordanceGrid& grid, double reachable_area, Rng& rng) {
  TransplantComparison c;
  EvaluateOptions opt;
  c.conditioned = evaluate_grid(net, task, start, grid, reachable_area, rng, opt);
  opt.view = proposer::SensorView::obstacles_blanked;
  c.transplanted = evaluate_grid(net, task, start, grid, reachable_area, rng, opt);
  return c;
}

}  // namespace affordmap::affordance
