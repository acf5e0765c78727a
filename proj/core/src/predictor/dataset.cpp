#include "affordmap/predictor/dataset.hpp"

#include <stdexcept>
#include <string>

#include "affordmap/rng.hpp"

namespace affordmap::predictor {

std::string_view to_string(Provenance p) { return p == Provenance::random ? "random" : "proposer"; }

ExperienceDataset::ExperienceDataset(std::size_t sensor_dim, std::size_t action_dim, double validation_fraction,
                                     std::uint64_t split_seed)
    : sensor_dim_(sensor_dim),
      action_dim_(action_dim),
      validation_fraction_(validation_fraction),
      split_seed_(split_seed) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in [0, 1)");
  }
}

void ExperienceDataset::append(Transition t) {
  if (static_cast<std::size_t>(t.s.size()) != sensor_dim_ || static_cast<std::size_t>(t.s_next.size()) != sensor_dim_ ||
      static_cast<std::size_t>(t.a.size()) != action_dim_) {
    throw std::invalid_argument("transition dimensions (" + std::to_string(t.s.size()) + ", " +
                                std::to_string(t.a.size()) + ", " + std::to_string(t.s_next.size()) +
                                ") do not match dataset schema (" + std::to_string(sensor_dim_) + ", " +
                                std::to_string(action_dim_) + ")");
  }
  if (!t.s.allFinite() || !t.a.allFinite() || !t.s_next.allFinite()) {
    throw std::invalid_argument("transition contains non-finite values");
  }
  records_.push_back(std::move(t));
}

void ExperienceDataset::append(const std::vector<Transition>& batch) {
  for (const Transition& t : batch) append(t);
}

bool ExperienceDataset::is_validation(std::size_t index) const {
  const std::uint64_t h = derive_seed(split_seed_, {index});
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < validation_fraction_;
}

std::vector<std::size_t> ExperienceDataset::training_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!is_validation(i)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> ExperienceDataset::validation_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (is_validation(i)) out.push_back(i);
  }
  return out;
}

std::size_t ExperienceDataset::count(Provenance p) const {
  std::size_t n = 0;
  for (const Transition& t : records_) n += t.provenance == p ? 1 : 0;
  return n;
}

}  // namespace affordmap::predictor
