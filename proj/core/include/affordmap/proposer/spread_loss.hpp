#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "affordmap/proposer/grid.hpp"

namespace affordmap::proposer {

enum class SpreadMode { hard_min, soft_min };

/// How the predicted-uncertainty term enters the minimized loss.
/// penalize:  + alpha ln<sigma>  (large predicted sigma raises the loss)
/// literal:   - alpha ln<sigma>  (the formula as printed; rewards uncertainty)
enum class UncertaintySign { penalize, literal };

SpreadMode spread_mode_from_string(std::string_view name);
UncertaintySign uncertainty_sign_from_string(std::string_view name);

struct ProposerLossConfig {
  double smoothness = 0.05;  // lambda on the mean neighbor-edge length
  double alpha = 0.01;       // uncertainty weight
  SpreadMode mode = SpreadMode::hard_min;
  double temperature = 0.1;  // soft-min tau
  UncertaintySign sign = UncertaintySign::penalize;

  void validate() const;
};

struct SpreadLoss {
  double value = 0.0;
  double min_pairwise = 0.0;  // exact hard minimum, whatever the mode
  double spread_term = 0.0;   // hard or soft minimum actually used
  double mean_neighbor = 0.0;
  double sigma_mean = 0.0;
  Edge closest{0, 0};
  Eigen::MatrixXd d_outcomes;  // 2 x V
  Eigen::VectorXd d_sigma;     // per-vertex; empty when the grid has no sigma
};

/// loss = -spread + smoothness * mean_edges d(s_i, s_j) +- alpha ln<sigma>,
/// spread = min_{i<j} d(s_i, s_j) (hard) or -tau ln sum exp(-d_ij / tau) (soft).
/// Hard-min routes gradient through the minimizing pair only. Coincident
/// points contribute a zero gradient.
SpreadLoss spread_loss(const OutcomeGrid& grid, std::span<const Edge> edges, const ProposerLossConfig& cfg);

/// Brute-force minimum pairwise Euclidean distance over columns.
double min_pairwise_distance(const Eigen::MatrixXd& points);
double mean_edge_length(const Eigen::MatrixXd& points, std::span<const Edge> edges);

}  // namespace affordmap::proposer
