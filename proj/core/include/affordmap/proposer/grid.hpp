#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace affordmap::proposer {

using Edge = std::pair<std::size_t, std::size_t>;

/// Regular k^n lattice over [-1, 1]^n. Vertex index is mixed-radix with the
/// first coordinate varying fastest: i = c_0 + k c_1 + k^2 c_2 + ...
class AffordanceGrid {
 public:
  explicit AffordanceGrid(std::size_t n = 2, std::size_t k = 9);

  std::size_t dim() const { return n_; }
  std::size_t side() const { return k_; }
  std::size_t size() const { return static_cast<std::size_t>(vertices_.cols()); }
  double spacing() const { return 2.0 / static_cast<double>(k_ - 1); }

  /// n x k^n matrix, one vertex per column.
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  Eigen::VectorXd vertex(std::size_t i) const { return vertices_.col(static_cast<Eigen::Index>(i)); }

  /// Axis-aligned adjacent pairs (i < j), n k^(n-1) (k-1) of them.
  const std::vector<Edge>& edges() const { return edges_; }

  std::size_t index(const std::vector<std::size_t>& coords) const;
  std::vector<std::size_t> coords(std::size_t index) const;

 private:
  std::size_t n_;
  std::size_t k_;
  Eigen::MatrixXd vertices_;
  std::vector<Edge> edges_;
};

enum class OutcomeSource { environment, predictor };

std::string_view to_string(OutcomeSource s);

/// Per-vertex outcomes in the 2D target space.
struct OutcomeGrid {
  Eigen::MatrixXd outcomes;  // 2 x V
  Eigen::VectorXd sigma;     // per-vertex mean predicted sigma; empty when environment-sourced
  OutcomeSource source = OutcomeSource::environment;

  std::size_t size() const { return static_cast<std::size_t>(outcomes.cols()); }
  Eigen::Vector2d point(std::size_t i) const { return outcomes.col(static_cast<Eigen::Index>(i)); }
  bool has_sigma() const { return sigma.size() == outcomes.cols() && sigma.size() > 0; }
};

}  // namespace affordmap::proposer
