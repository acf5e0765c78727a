#include "affordmap/proposer/spread_loss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace affordmap::proposer {

SpreadMode spread_mode_from_string(std::string_view name) {
  if (name == "hard_min" || name == "hard-min") return SpreadMode::hard_min;
  if (name == "soft_min" || name == "soft-min") return SpreadMode::soft_min;
  throw std::invalid_argument("unknown spread mode '" + std::string(name) + "'");
}

UncertaintySign uncertainty_sign_from_string(std::string_view name) {
  if (name == "penalize") return UncertaintySign::penalize;
  if (name == "literal") return UncertaintySign::literal;
  throw std::invalid_argument("unknown uncertainty sign '" + std::string(name) + "'");
}

void ProposerLossConfig::validate() const {
  if (!(smoothness >= 0.0)) throw std::invalid_argument("smoothness weight must be non-negative");
  if (!(alpha >= 0.0)) throw std::invalid_argument("uncertainty weight alpha must be non-negative");
  if (mode == SpreadMode::soft_min && !(temperature > 0.0)) {
    throw std::invalid_argument("soft-min temperature must be positive");
  }
}

double min_pairwise_distance(const Eigen::MatrixXd& points) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < points.cols(); ++j) {
      best = std::min(best, (points.col(i) - points.col(j)).norm());
    }
  }
  return best;
}

double mean_edge_length(const Eigen::MatrixXd& points, std::span<const Edge> edges) {
  if (edges.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [i, j] : edges) {
    total += (points.col(static_cast<Eigen::Index>(i)) - points.col(static_cast<Eigen::Index>(j))).norm();
  }
  return total / static_cast<double>(edges.size());
}

namespace {
// Adds scale * d||p_i - p_j|| / dp to the gradient columns i and j.
void add_distance_gradient(Eigen::MatrixXd& grad, const Eigen::MatrixXd& pts, std::size_t i, std::size_t j,
                           double scale) {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  const Eigen::VectorXd diff = pts.col(ii) - pts.col(jj);
  const double d = diff.norm();
  if (d == 0.0) return;
  grad.col(ii) += scale * diff / d;
  grad.col(jj) -= scale * diff / d;
}
}  // namespace

SpreadLoss spread_loss(const OutcomeGrid& grid, std::span<const Edge> edges, const ProposerLossConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd& pts = grid.outcomes;
  const std::size_t v = grid.size();
  if (v < 2) throw std::invalid_argument("spread_loss needs at least two outcomes");

  SpreadLoss out;
  out.d_outcomes = Eigen::MatrixXd::Zero(pts.rows(), pts.cols());

  // pairwise distances, upper triangle
  std::vector<double> dist;
  dist.reserve(v * (v - 1) / 2);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v; ++i) {
    for (std::size_t j = i + 1; j < v; ++j) {
      const double d = (pts.col(static_cast<Eigen::Index>(i)) - pts.col(static_cast<Eigen::Index>(j))).norm();
      dist.push_back(d);
      if (d < best) {
        best = d;
        out.closest = {i, j};
      }
    }
  }
  out.min_pairwise = best;

  if (cfg.mode == SpreadMode::hard_min) {
    out.spread_term = best;
    add_distance_gradient(out.d_outcomes, pts, out.closest.first, out.closest.second, -1.0);
  } else {
    const double tau = cfg.temperature;
    // -tau ln sum exp(-d/tau), stabilized around the hard minimum
    double acc = 0.0;
    for (double d : dist) acc += std::exp(-(d - best) / tau);
    out.spread_term = best - tau * std::log(acc);
    std::size_t p = 0;
    for (std::size_t i = 0; i < v; ++i) {
      for (std::size_t j = i + 1; j < v; ++j, ++p) {
        const double w = std::exp(-(dist[p] - best) / tau) / acc;
        if (w > 0.0) add_distance_gradient(out.d_outcomes, pts, i, j, -w);
      }
    }
  }
  out.value = -out.spread_term;

  if (!edges.empty()) {
    out.mean_neighbor = mean_edge_length(pts, edges);
    out.value += cfg.smoothness * out.mean_neighbor;
    if (cfg.smoothness > 0.0) {
      const double scale = cfg.smoothness / static_cast<double>(edges.size());
      for (const auto& [i, j] : edges) add_distance_gradient(out.d_outcomes, pts, i, j, scale);
    }
  }

  if (grid.has_sigma()) {
    out.sigma_mean = grid.sigma.mean();
    out.d_sigma = Eigen::VectorXd::Zero(grid.sigma.size());
    if (cfg.alpha > 0.0 && out.sigma_mean > 0.0) {
      const double sign = cfg.sign == UncertaintySign::penalize ? 1.0 : -1.0;
      out.value += sign * cfg.alpha * std::log(out.sigma_mean);
      out.d_sigma.setConstant(sign * cfg.alpha / (out.sigma_mean * static_cast<double>(grid.sigma.size())));
    }
  }
  return out;
}

}  // namespace affordmap::proposer
