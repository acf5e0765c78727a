#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "affordmap/env/geometry.hpp"
#include "affordmap/env/task.hpp"
#include "affordmap/proposer/grid.hpp"
#include "affordmap/proposer/proposer.hpp"
#include "affordmap/rng.hpp"

namespace affordmap::affordance {

inline constexpr std::size_t kNewtonIterations = 20;

struct InterpolationResult {
  Eigen::Vector2d omega = Eigen::Vector2d::Zero();
  std::size_t cell = 0;  // c0 + (k-1) c1 of the lower-left vertex; the vertex index on fallback
  double residual = 0.0;
  bool fallback = false;
};

/// Bilinear patch of cell (c0, c1) at local coordinates (u, v) in [0, 1]^2.
env::Point2 bilinear_point(const proposer::OutcomeGrid& outcomes, const proposer::AffordanceGrid& grid,
                           std::size_t c0, std::size_t c1, double u, double v);

/// Jacobian determinant of the cell's patch at its centre.
double cell_orientation(const proposer::OutcomeGrid& outcomes, const proposer::AffordanceGrid& grid, std::size_t c0,
                        std::size_t c1);

/// Local coordinates in the cell closest to `target` (Newton, clamped).
Eigen::Vector2d invert_cell(const proposer::OutcomeGrid& outcomes, const proposer::AffordanceGrid& grid,
                            std::size_t c0, std::size_t c1, const env::Point2& target,
                            std::size_t iterations = kNewtonIterations);

/// Searches every cell whose orientation agrees with the grid's dominant
/// orientation (folded cells are skipped); falls back to the vertex with the
/// nearest outcome when no patch comes within r_max of the target.
InterpolationResult interpolate_affordance(const env::Point2& target, const proposer::OutcomeGrid& outcomes,
                                           const proposer::AffordanceGrid& grid, double r_max);

struct ReachResult {
  InterpolationResult interpolation;
  env::Point2 achieved = env::Point2::Zero();
  double error = 0.0;
};

/// Interpolates omega* and executes pi(., omega*) from a clone of `start`
/// for the task horizon.
ReachResult reach(const env::Point2& target, const proposer::Proposer& net, const env::Task& task,
                  const env::World& start, const proposer::OutcomeGrid& outcomes,
                  const proposer::AffordanceGrid& grid, double r_max, Rng& rng);

}  // namespace affordmap::affordance
