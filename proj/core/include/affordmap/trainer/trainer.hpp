#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affordmap/affordance/metrics.hpp"
#include "affordmap/env/task.hpp"
#include "affordmap/predictor/dataset.hpp"
#include "affordmap/predictor/predictor.hpp"
#include "affordmap/proposer/proposer.hpp"

namespace affordmap::trainer {

struct CycleConfig {
  std::size_t cycles = 3;
  // transitions per cycle; rounded up to whole episodes of the task horizon
  std::size_t collect_random = 6667;
  std::size_t collect_proposer = 3000;
  double sigma_explore = 0.1;
  bool warm_start = false;  // keep the previous cycle's predictor instead of retraining from scratch
  bool gaussian = false;
  predictor::Architecture architecture;
  predictor::TrainConfig predictor;
  proposer::ProposerTrainConfig proposer;
  std::size_t grid_side = 9;
  double validation_fraction = 0.1;
  std::size_t eval_trials = 1;
  std::size_t workers = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PhaseSeconds {
  double collect = 0.0;
  double predictor = 0.0;
  double proposer = 0.0;
  double evaluate = 0.0;
};

struct CycleReport {
  std::size_t cycle = 0;
  std::size_t dataset_size = 0;
  std::size_t random_records = 0;
  std::size_t proposer_records = 0;
  predictor::TrainReport predictor;
  proposer::ProposerTrainReport proposer;
  affordance::GridMetrics metrics;  // environment grid from the canonical start
  PhaseSeconds seconds;
};

struct RunReport {
  std::vector<CycleReport> cycles;
  double reachable_area = 0.0;
  affordance::GridMetrics initial_metrics;  // untrained proposer, before cycle 0

  /// Timings are excluded unless asked for, so reports of identical runs
  /// serialize identically.
  nlohmann::json to_json(bool with_timing = false) const;
};

struct RunResult {
  RunReport report;
  predictor::Predictor predictor;
  proposer::Proposer proposer;
  predictor::ExperienceDataset dataset;
};

class CycleError : public std::runtime_error {
 public:
  CycleError(std::size_t cycle, std::string phase, const std::string& what);
  std::size_t cycle() const { return cycle_; }
  const std::string& phase() const { return phase_; }

 private:
  std::size_t cycle_;
  std::string phase_;
};

std::size_t episodes_for(std::size_t transitions, std::size_t horizon);

/// `episodes` episodes of `task.horizon()` steps each; episode e draws its
/// world, omega and noise from derive_seed(seed, {e}), so the result does not
/// depend on the worker count. Without a proposer actions are uniform over
/// the action box.
std::vector<predictor::Transition> collect_transitions(const env::Task& task, const proposer::Proposer* net,
                                                       std::size_t episodes, double sigma_explore, std::uint64_t seed,
                                                       std::size_t workers = 1);

/// Collect, append, train predictor, train proposer, evaluate; `cycles`
/// times. Progress goes to `progress` as key=value lines, one per phase.
RunResult run_cycles(const env::Task& task, const CycleConfig& cfg, std::ostream* progress = nullptr);

}  // namespace affordmap::trainer
