#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace affordmap::predictor {

enum class Provenance : std::uint8_t { random = 0, proposer = 1 };

std::string_view to_string(Provenance p);

/// Experience triplet (s_t, a_t, s_{t+1}), stored at training precision.
struct Transition {
  Eigen::VectorXf s;
  Eigen::VectorXf a;
  Eigen::VectorXf s_next;
  Provenance provenance = Provenance::random;
};

/// Append-only experience store. Each record's train/validation membership
/// is a pure function of (split_seed, record index), so the split of old
/// records never changes as the dataset grows.
class ExperienceDataset {
 public:
  ExperienceDataset(std::size_t sensor_dim, std::size_t action_dim, double validation_fraction = 0.1,
                    std::uint64_t split_seed = 0);

  std::size_t sensor_dim() const { return sensor_dim_; }
  std::size_t action_dim() const { return action_dim_; }
  double validation_fraction() const { return validation_fraction_; }
  std::uint64_t split_seed() const { return split_seed_; }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const Transition& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<Transition>& records() const { return records_; }

  /// Rejects dimension mismatches and non-finite entries.
  void append(Transition t);
  void append(const std::vector<Transition>& batch);

  bool is_validation(std::size_t index) const;
  std::vector<std::size_t> training_indices() const;
  std::vector<std::size_t> validation_indices() const;
  std::size_t count(Provenance p) const;

 private:
  std::size_t sensor_dim_;
  std::size_t action_dim_;
  double validation_fraction_;
  std::uint64_t split_seed_;
  std::vector<Transition> records_;
};

}  // namespace affordmap::predictor
