#include "affordmap/trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <ostream>
#include <thread>

namespace affordmap::trainer {

namespace {

// derive_seed path tags
enum : std::uint64_t { kCollectRandom = 1, kCollectProposer, kPredictorInit, kPredictorTrain, kProposerInit,
                       kProposerTrain, kEvaluate, kArea, kSplit };

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

nlohmann::json metrics_json(const affordance::GridMetrics& m) {
  nlohmann::json j{{"min_pairwise", m.min_pairwise},
                   {"mean_neighbor", m.mean_neighbor},
                   {"hull_area", m.hull_area},
                   {"coverage_fraction", m.coverage_fraction}};
  if (m.has_prediction) j["prediction_rmse"] = m.prediction_rmse;
  return j;
}

void episode(const env::Task& task, const proposer::Proposer* net, double sigma_explore, std::uint64_t seed,
             std::vector<predictor::Transition>& out) {
  Rng rng(seed);
  auto world = task.sample_world(rng);
  const env::ActionBox& box = task.action_box();
  Eigen::VectorXd omega;
  if (net != nullptr) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    omega.resize(static_cast<Eigen::Index>(net->side_dim()));
    for (Eigen::Index i = 0; i < omega.size(); ++i) omega[i] = u(rng);
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t t = 0; t < task.horizon(); ++t) {
    const Eigen::VectorXd s = world->sensor();
    Eigen::VectorXd a;
    if (net != nullptr) {
      a = proposer::propose(*net, s, omega);
      if (sigma_explore > 0.0) {
        for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += sigma_explore * noise(rng);
        a = box.clamp(a);
      }
    } else {
      a = box.sample(rng);
    }
    world->step(a, rng);
    out.push_back({s.cast<float>(), a.cast<float>(), world->sensor().cast<float>(),
                   net != nullptr ? predictor::Provenance::proposer : predictor::Provenance::random});
  }
}

}  // namespace

void CycleConfig::validate() const {
  if (cycles == 0) throw std::invalid_argument("cycles must be at least 1");
  if (collect_random == 0 && collect_proposer == 0) {
    throw std::invalid_argument("at least one of collect_random and collect_proposer must be positive");
  }
  if (!(sigma_explore >= 0.0)) throw std::invalid_argument("sigma_explore must be non-negative");
  if (grid_side < 2) throw std::invalid_argument("grid side must be at least 2");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation_fraction must lie in [0, 1)");
  }
  if (eval_trials == 0) throw std::invalid_argument("eval trials must be at least 1");
  proposer.loss.validate();
}

CycleError::CycleError(std::size_t cycle, std::string phase, const std::string& what)
    : std::runtime_error("cycle " + std::to_string(cycle) + " phase " + phase + ": " + what),
      cycle_(cycle),
      phase_(std::move(phase)) {}

std::size_t episodes_for(std::size_t transitions, std::size_t horizon) {
  return horizon == 0 ? 0 : (transitions + horizon - 1) / horizon;
}

std::vector<predictor::Transition> collect_transitions(const env::Task& task, const proposer::Proposer* net,
                                                       std::size_t episodes, double sigma_explore, std::uint64_t seed,
                                                       std::size_t workers) {
  std::vector<std::vector<predictor::Transition>> per(episodes);
  const auto run = [&](std::size_t e) { episode(task, net, sigma_explore, derive_seed(seed, {e}), per[e]); };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(episodes, 1));
  if (workers == 1) {
    for (std::size_t e = 0; e < episodes; ++e) run(e);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t e = w; e < episodes; e += workers) run(e);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  std::vector<predictor::Transition> out;
  out.reserve(episodes * task.horizon());
  for (auto& v : per) std::move(v.begin(), v.end(), std::back_inserter(out));
  return out;
}

RunResult run_cycles(const env::Task& task, const CycleConfig& cfg, std::ostream* progress) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed;
  const proposer::AffordanceGrid grid(2, cfg.grid_side);

  Rng init_rng(derive_seed(seed, {kProposerInit}));
  proposer::Proposer net = proposer::make_proposer(task, cfg.architecture, grid.dim(), init_rng);
  Rng pred_rng(derive_seed(seed, {kPredictorInit, 0}));
  predictor::Predictor model = predictor::make_predictor(task, cfg.architecture, cfg.gaussian, pred_rng);
  predictor::ExperienceDataset data(task.sensor_dim(), task.action_dim(), cfg.validation_fraction,
                                    derive_seed(seed, {kSplit}));

  RunReport report;
  {
    Rng area_rng(derive_seed(seed, {kArea}));
    report.reachable_area = affordance::reachable_area(task, affordance::kReachableAreaSamples, area_rng);
  }
  const auto say = [&](const std::string& line) {
    if (progress != nullptr) *progress << line << std::endl;
  };
  {
    Rng er(derive_seed(seed, {kEvaluate}));
    affordance::EvaluateOptions eo;
    eo.trials = cfg.eval_trials;
    const auto start = task.canonical_world();
    report.initial_metrics = affordance::evaluate_grid(net, task, *start, grid, report.reachable_area, er, eo).metrics;
    say("phase=initial min_pairwise=" + std::to_string(report.initial_metrics.min_pairwise) +
        " hull_area=" + std::to_string(report.initial_metrics.hull_area));
  }

  for (std::size_t c = 0; c < cfg.cycles; ++c) {
    CycleReport cr;
    cr.cycle = c;
    std::string phase = "collect";
    try {
      auto t0 = Clock::now();
      const std::size_t h = task.horizon();
      auto random = collect_transitions(task, nullptr, episodes_for(cfg.collect_random, h), 0.0,
                                        derive_seed(seed, {kCollectRandom, c}), cfg.workers);
      auto guided = collect_transitions(task, &net, episodes_for(cfg.collect_proposer, h), cfg.sigma_explore,
                                        derive_seed(seed, {kCollectProposer, c}), cfg.workers);
      data.append(random);
      data.append(guided);
      cr.dataset_size = data.size();
      cr.random_records = data.count(predictor::Provenance::random);
      cr.proposer_records = data.count(predictor::Provenance::proposer);
      cr.seconds.collect = seconds_since(t0);
      say("phase=collect cycle=" + std::to_string(c) + " random=" + std::to_string(random.size()) +
          " proposer=" + std::to_string(guided.size()) + " dataset=" + std::to_string(data.size()));

      phase = "predictor";
      t0 = Clock::now();
      if (!cfg.warm_start && c > 0) {
        Rng r(derive_seed(seed, {kPredictorInit, c}));
        model = predictor::make_predictor(task, cfg.architecture, cfg.gaussian, r);
      }
      predictor::TrainConfig pc = cfg.predictor;
      pc.seed = derive_seed(seed, {kPredictorTrain, c});
      cr.predictor = predictor::train_predictor(model, data, task, pc);
      cr.seconds.predictor = seconds_since(t0);
      say("phase=predictor cycle=" + std::to_string(c) + " epochs=" + std::to_string(cr.predictor.train_loss.size()) +
          " train_loss=" + std::to_string(cr.predictor.train_loss.back()) +
          " val_loss=" + std::to_string(cr.predictor.validation_loss.empty() ? 0.0 : cr.predictor.validation_loss.back()));

      phase = "proposer";
      t0 = Clock::now();
      proposer::ProposerTrainConfig qc = cfg.proposer;
      qc.seed = derive_seed(seed, {kProposerTrain, c});
      cr.proposer = proposer::train_proposer(net, model, task, grid, qc);
      cr.seconds.proposer = seconds_since(t0);
      say("phase=proposer cycle=" + std::to_string(c) + " iterations=" + std::to_string(cr.proposer.iterations) +
          " loss=" + std::to_string(cr.proposer.epoch_loss.empty() ? 0.0 : cr.proposer.epoch_loss.back()));

      phase = "evaluate";
      t0 = Clock::now();
      Rng er(derive_seed(seed, {kEvaluate, c}));
      affordance::EvaluateOptions eo;
      eo.trials = cfg.eval_trials;
      eo.model = &model;
      const auto start = task.canonical_world();
      cr.metrics = affordance::evaluate_grid(net, task, *start, grid, report.reachable_area, er, eo).metrics;
      cr.seconds.evaluate = seconds_since(t0);
      say("phase=evaluate cycle=" + std::to_string(c) + " min_pairwise=" + std::to_string(cr.metrics.min_pairwise) +
          " hull_area=" + std::to_string(cr.metrics.hull_area) +
          " coverage_fraction=" + std::to_string(cr.metrics.coverage_fraction) +
          " prediction_rmse=" + std::to_string(cr.metrics.prediction_rmse));
    } catch (const CycleError&) {
      throw;
    } catch (const std::exception& e) {
      throw CycleError(c, phase, e.what());
    }
    report.cycles.push_back(std::move(cr));
  }
  return {std::move(report), std::move(model), std::move(net), std::move(data)};
}

nlohmann::json RunReport::to_json(bool with_timing) const {
  nlohmann::json j;
  j["reachable_area"] = reachable_area;
  j["initial_metrics"] = metrics_json(initial_metrics);
  auto arr = nlohmann::json::array();
  for (const auto& c : cycles) {
    nlohmann::json cj{{"cycle", c.cycle},
                      {"dataset_size", c.dataset_size},
                      {"random_records", c.random_records},
                      {"proposer_records", c.proposer_records},
                      {"predictor",
                       {{"train_loss", c.predictor.train_loss},
                        {"validation_loss", c.predictor.validation_loss},
                        {"best_epoch", c.predictor.best_epoch},
                        {"early_stopped", c.predictor.early_stopped},
                        {"gradient_steps", c.predictor.gradient_steps}}},
                      {"proposer",
                       {{"epoch_loss", c.proposer.epoch_loss},
                        {"iterations", c.proposer.iterations},
                        {"early_stopped", c.proposer.early_stopped},
                        {"final_min_pairwise",
                         c.proposer.min_pairwise_trace.empty() ? 0.0 : c.proposer.min_pairwise_trace.back()}}},
                      {"metrics", metrics_json(c.metrics)}};
    if (with_timing) {
      cj["seconds"] = {{"collect", c.seconds.collect},
                       {"predictor", c.seconds.predictor},
                       {"proposer", c.seconds.proposer},
                       {"evaluate", c.seconds.evaluate}};
    }
    arr.push_back(std::move(cj));
  }
  j["cycles"] = std::move(arr);
  return j;
}

}  // namespace affordmap::trainer
