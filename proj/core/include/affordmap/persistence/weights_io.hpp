#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affordmap/diffnet/fused.hpp"
#include "affordmap/diffnet/network.hpp"
#include "affordmap/predictor/predictor.hpp"

namespace affordmap::persistence {

class PersistenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class FormatError : public PersistenceError {
 public:
  using PersistenceError::PersistenceError;
};
class VersionError : public PersistenceError {
 public:
  using PersistenceError::PersistenceError;
};
class ChecksumError : public PersistenceError {
 public:
  using PersistenceError::PersistenceError;
};
/// Payload shorter or longer than the header declares.
class LengthError : public PersistenceError {
 public:
  using PersistenceError::PersistenceError;
};
class SchemaError : public PersistenceError {
 public:
  using PersistenceError::PersistenceError;
};

inline constexpr int kWeightFormatVersion = 1;

std::uint32_t crc32(std::span<const std::byte> bytes);

/// Layout on disk:
///   "affordmap-weights\n"
///   "manifest-bytes <N>\n"
///   <N bytes of JSON manifest>
///   <param_count little-endian float32 values>
struct WeightManifest {
  int version = kWeightFormatVersion;
  std::string kind;  // "network" or "fused"
  std::vector<diffnet::LayerSpec> trunk;  // the whole network when kind == "network"
  std::vector<diffnet::LayerSpec> head;
  std::size_t side_dim = 0;
  std::size_t param_count = 0;
  std::uint64_t seed = 0;
  std::uint32_t crc32 = 0;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

void save_network(const std::filesystem::path& path, const diffnet::Network& net, std::uint64_t seed,
                  const nlohmann::json& extra = nlohmann::json::object());
diffnet::Network load_network(const std::filesystem::path& path);

void save_fused(const std::filesystem::path& path, const diffnet::FusedNet& net, std::uint64_t seed,
                const nlohmann::json& extra = nlohmann::json::object());
diffnet::FusedNet load_fused(const std::filesystem::path& path, WeightManifest* manifest = nullptr);

/// Fused net plus the predictor layout in the manifest's extra block.
void save_predictor(const std::filesystem::path& path, const predictor::Predictor& model, std::uint64_t seed);
predictor::Predictor load_predictor(const std::filesystem::path& path);

/// Parses and validates the header only (no payload checks).
WeightManifest read_weight_manifest(const std::filesystem::path& path);

}  // namespace affordmap::persistence
