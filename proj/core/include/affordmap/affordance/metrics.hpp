#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "affordmap/env/task.hpp"
#include "affordmap/predictor/predictor.hpp"
#include "affordmap/proposer/grid.hpp"
#include "affordmap/proposer/proposer.hpp"
#include "affordmap/rng.hpp"

namespace affordmap::affordance {

inline constexpr std::size_t kReachableAreaSamples = 100000;

struct GridMetrics {
  double min_pairwise = 0.0;
  double mean_neighbor = 0.0;
  double hull_area = 0.0;
  double coverage_fraction = 0.0;  // hull_area / reachable area
  double prediction_rmse = 0.0;    // environment vs predictor outcomes; 0 without a predictor
  bool has_prediction = false;

  bool operator==(const GridMetrics&) const = default;
};

/// Pure function of the outcome set. `predicted`, when given, must have the
/// same vertex count as `outcomes`.
GridMetrics grid_metrics(const Eigen::MatrixXd& outcomes, std::span<const proposer::Edge> edges,
                         double reachable_area, const Eigen::MatrixXd* predicted = nullptr);

/// Monte Carlo area of the set of outcomes reachable in one horizon from the
/// canonical start, over admissible actions.
///
/// Reacher: the base joint only rotates the rest of the arm, so the set is
/// sampled with the base joint at zero, the largest polar angle is tracked
/// per radius band, and the +-limit rotation is applied analytically:
///   area = sum_r r dr min(2 pi, 2 limit + 2 phi_max(r)).
/// Locomotion: noise-free rollouts of random per-step actions, largest
/// radius tracked per polar-angle sector.
double reachable_area(const env::Task& task, std::size_t samples, Rng& rng);

struct GridEvaluation {
  proposer::EnvRollout rollout;                     // environment-sourced grid
  std::optional<proposer::OutcomeGrid> predicted;  // when a predictor was given
  GridMetrics metrics;
};

struct EvaluateOptions {
  std::size_t trials = 1;
  proposer::SensorView view = proposer::SensorView::full;
  const predictor::Predictor* model = nullptr;
};

/// Rolls every vertex through clones of `start` and computes the metrics.
GridEvaluation evaluate_grid(const proposer::Proposer& net, const env::Task& task, const env::World& start,
                             const proposer::AffordanceGrid& grid, double reachable_area, Rng& rng,
                             const EvaluateOptions& options = {});

struct TransplantComparison {
  GridEvaluation conditioned;   // proposer sees the real occupancy
  GridEvaluation transplanted;  // proposer sees occupancy zeroed
};

TransplantComparison transplant_compare(const proposer::Proposer& net, const env::Task& task, const env::World& start,
                                        const proposer::AffordanceGrid& grid, double reachable_area, Rng& rng);

}  // namespace affordmap::affordance
