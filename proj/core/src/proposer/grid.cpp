#include "affordmap/proposer/grid.hpp"

#include <stdexcept>

namespace affordmap::proposer {

AffordanceGrid::AffordanceGrid(std::size_t n, std::size_t k) : n_(n), k_(k) {
  if (n == 0) throw std::invalid_argument("affordance grid dimension must be positive");
  if (k < 2) throw std::invalid_argument("affordance grid needs at least two vertices per side");
  std::size_t count = 1;
  for (std::size_t d = 0; d < n; ++d) count *= k;
  vertices_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = coords(i);
    for (std::size_t d = 0; d < n; ++d) {
      vertices_(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) =
          -1.0 + spacing() * static_cast<double>(c[d]);
    }
  }
  std::size_t stride = 1;
  for (std::size_t d = 0; d < n; ++d) {
    for (std::size_t i = 0; i < count; ++i) {
      if (coords(i)[d] + 1 < k) edges_.emplace_back(i, i + stride);
    }
    stride *= k;
  }
}

std::size_t AffordanceGrid::index(const std::vector<std::size_t>& coords) const {
  if (coords.size() != n_) throw std::invalid_argument("grid coordinate has wrong dimension");
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t d = 0; d < n_; ++d) {
    if (coords[d] >= k_) throw std::out_of_range("grid coordinate out of range");
    idx += coords[d] * stride;
    stride *= k_;
  }
  return idx;
}

std::vector<std::size_t> AffordanceGrid::coords(std::size_t index) const {
  std::vector<std::size_t> c(n_);
  for (std::size_t d = 0; d < n_; ++d) {
    c[d] = index % k_;
    index /= k_;
  }
  return c;
}

std::string_view to_string(OutcomeSource s) { return s == OutcomeSource::environment ? "environment" : "predictor"; }

}  // namespace affordmap::proposer
