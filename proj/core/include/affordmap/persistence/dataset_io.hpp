#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "affordmap/persistence/weights_io.hpp"
#include "affordmap/predictor/dataset.hpp"

namespace affordmap::persistence {

inline constexpr int kDatasetFormatVersion = 1;
/// The header block is padded to a fixed size so appends rewrite the count
/// in place without moving any record.
inline constexpr std::size_t kDatasetHeaderBytes = 1024;

/// Layout on disk:
///   kDatasetHeaderBytes of "affordmap-dataset\n" + JSON schema padded with spaces
///   count fixed-width records: s, a, s_next as little-endian float32, then
///   the provenance byte and three zero bytes.
struct DatasetHeader {
  int version = kDatasetFormatVersion;
  std::size_t sensor_dim = 0;
  std::size_t action_dim = 0;
  std::size_t count = 0;
  double validation_fraction = 0.1;
  std::uint64_t split_seed = 0;

  std::size_t record_bytes() const { return 4 * (2 * sensor_dim + action_dim) + 4; }
  nlohmann::json to_json() const;
};

void save_dataset(const std::filesystem::path& path, const predictor::ExperienceDataset& data);

/// Throws SchemaError when the file's dimensions differ from the expected
/// ones (pass 0 to accept whatever the file declares).
predictor::ExperienceDataset load_dataset(const std::filesystem::path& path, std::size_t expected_sensor_dim = 0,
                                          std::size_t expected_action_dim = 0);

/// Adds records at the end; earlier bytes are untouched apart from the count
/// in the header.
void append_dataset(const std::filesystem::path& path, const std::vector<predictor::Transition>& records);

DatasetHeader read_dataset_header(const std::filesystem::path& path);

}  // namespace affordmap::persistence
