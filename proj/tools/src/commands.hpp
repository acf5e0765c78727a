#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace affordmap::cli {

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kConfigError = 2;

struct TrainArgs {
  std::filesystem::path config;
  std::filesystem::path run_dir;
  std::vector<std::string> overrides;
  std::optional<std::size_t> workers;
};

struct ReachArgs {
  std::filesystem::path run_dir;
  std::vector<double> target;  // empty or two values
  std::filesystem::path targets_file;
};

int cmd_train(const TrainArgs& args);
int cmd_eval(const std::filesystem::path& run_dir, std::optional<std::size_t> workers);
int cmd_reach(const ReachArgs& args);
int cmd_plot(const std::filesystem::path& run_dir, const std::filesystem::path& out);
int cmd_inspect(const std::filesystem::path& file, bool verify);

}  // namespace affordmap::cli
