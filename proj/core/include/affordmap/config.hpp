#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affordmap/env/task.hpp"
#include "affordmap/trainer/trainer.hpp"

namespace affordmap {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every key with its default. trainer.seed has none and must be supplied.
const nlohmann::json& default_config();

struct EvalSettings {
  std::size_t grid_side = 9;
  std::size_t trials = 1;
  double r_max = 0.0;  // resolved: 10% of the task's reach scale unless set
  std::uint64_t seed = 0;
};

/// Sections env, predictor, proposer, trainer, eval; each a flat object.
class RunConfig {
 public:
  /// Validates keys and types against the defaults and fills the gaps.
  explicit RunConfig(const nlohmann::json& user);

  /// `path` may be empty for defaults plus overrides. Overrides are
  /// "section.key=value"; the value is read as JSON when it parses, as a
  /// string otherwise.
  static RunConfig load(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

  const nlohmann::json& effective() const { return json_; }
  std::uint64_t seed() const;

  std::unique_ptr<env::Task> make_task() const;
  trainer::CycleConfig cycle_config() const;
  EvalSettings eval(const env::Task& task) const;

 private:
  nlohmann::json json_;
};

/// Applies one "section.key=value" override in place.
void apply_override(nlohmann::json& config, const std::string& assignment);

}  // namespace affordmap
