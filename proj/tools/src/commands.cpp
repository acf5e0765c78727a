#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "affordmap/affordance/export.hpp"
#include "affordmap/affordance/interpolate.hpp"
#include "affordmap/affordance/metrics.hpp"
#include "affordmap/config.hpp"
#include "affordmap/persistence/dataset_io.hpp"
#include "affordmap/persistence/weights_io.hpp"
#include "affordmap/trainer/trainer.hpp"

namespace affordmap::cli {

namespace fs = std::filesystem;

namespace {

class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// seeds for evaluation-side randomness, derived from eval.seed
enum : std::uint64_t { kEvalArea = 1, kEvalRollout, kEvalReach };

struct LoadedRun {
  RunConfig config;
  std::unique_ptr<env::Task> task;
  EvalSettings eval;
  predictor::Predictor model;
  proposer::Proposer net;
};

void require(const fs::path& p) {
  if (!fs::exists(p)) throw MissingArtifact("missing " + p.string());
}

nlohmann::json read_json(const fs::path& p) {
  require(p);
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

LoadedRun load_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw MissingArtifact("run directory " + dir.string() + " does not exist");
  RunConfig cfg(read_json(dir / "config.json"));
  auto task = cfg.make_task();
  const EvalSettings eval = cfg.eval(*task);
  require(dir / "predictor.weights");
  require(dir / "proposer.weights");
  auto model = persistence::load_predictor(dir / "predictor.weights");
  auto net = persistence::load_fused(dir / "proposer.weights");
  if (net.sensor_dim() != task->sensor_dim() || net.side_dim() != 2) {
    throw std::runtime_error("proposer weights do not fit the configured task");
  }
  return {std::move(cfg), std::move(task), eval, std::move(model), std::move(net)};
}

affordance::GridEvaluation evaluate(const LoadedRun& run, const proposer::AffordanceGrid& grid, double* area_out) {
  Rng area_rng(derive_seed(run.eval.seed, {kEvalArea}));
  const double area = affordance::reachable_area(*run.task, affordance::kReachableAreaSamples, area_rng);
  if (area_out != nullptr) *area_out = area;
  Rng rng(derive_seed(run.eval.seed, {kEvalRollout}));
  affordance::EvaluateOptions opt;
  opt.trials = run.eval.trials;
  opt.model = &run.model;
  const auto start = run.task->canonical_world();
  return affordance::evaluate_grid(run.net, *run.task, *start, grid, area, rng, opt);
}

double plot_extent(const env::Task& task, const proposer::OutcomeGrid& g) {
  double m = task.reach_scale();
  if (g.size() > 0) m = std::max(m, g.outcomes.cwiseAbs().maxCoeff());
  return 1.05 * m;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

std::string layers_text(const std::vector<diffnet::LayerSpec>& layers) {
  std::string s;
  for (const auto& l : layers) {
    if (!s.empty()) s += ',';
    s += std::string(diffnet::to_string(l.kind)) + "(" + std::to_string(l.in_dim) + "x" + std::to_string(l.out_dim) + ")";
  }
  return s;
}

template <typename F>
int guarded(const char* command, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << command << ": config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const trainer::CycleError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace

int cmd_train(const TrainArgs& args) {
  return guarded("train", [&] {
    if (!fs::exists(args.config)) throw ConfigError("config file " + args.config.string() + " not found");
    auto overrides = args.overrides;
    if (args.workers) overrides.push_back("trainer.workers=" + std::to_string(*args.workers));
    const RunConfig cfg = RunConfig::load(args.config, overrides);
    const auto task = cfg.make_task();
    const trainer::CycleConfig cc = cfg.cycle_config();

    fs::create_directories(args.run_dir);
    write_text(args.run_dir / "config.json", cfg.effective().dump(2) + "\n");
    std::cout << "run_dir=" << args.run_dir.string() << '\n';

    const auto result = trainer::run_cycles(*task, cc, &std::cout);

    persistence::save_predictor(args.run_dir / "predictor.weights", result.predictor, cc.seed);
    persistence::save_fused(args.run_dir / "proposer.weights", result.proposer, cc.seed, {{"role", "proposer"}});
    persistence::save_dataset(args.run_dir / "dataset.bin", result.dataset);
    write_text(args.run_dir / "report.json", result.report.to_json(false).dump(2) + "\n");
    write_text(args.run_dir / "timing.json", result.report.to_json(true).dump(2) + "\n");

    const auto& last = result.report.cycles.back();
    std::cout << "dataset_size=" << result.dataset.size() << '\n';
    std::cout << "reachable_area=" << result.report.reachable_area << '\n';
    affordance::write_metrics_kv(std::cout, last.metrics);
    return kOk;
  });
}

int cmd_eval(const fs::path& run_dir, std::optional<std::size_t>) {
  return guarded("eval", [&] {
    const LoadedRun run = load_run(run_dir);
    const proposer::AffordanceGrid grid(2, run.eval.grid_side);
    double area = 0.0;
    const auto ev = evaluate(run, grid, &area);
    std::ostringstream metrics, env_csv, pred_csv, svg;
    affordance::write_metrics_csv(metrics, ev.metrics);
    affordance::write_grid_csv(env_csv, grid, ev.rollout.grid);
    affordance::write_grid_svg(svg, grid, ev.rollout.grid, plot_extent(*run.task, ev.rollout.grid));
    write_text(run_dir / "metrics.csv", metrics.str());
    write_text(run_dir / "outcome_grid.csv", env_csv.str());
    write_text(run_dir / "outcome_grid.svg", svg.str());
    if (ev.predicted) {
      affordance::write_grid_csv(pred_csv, grid, *ev.predicted);
      write_text(run_dir / "predicted_grid.csv", pred_csv.str());
    }
    std::cout << "reachable_area=" << area << '\n';
    affordance::write_metrics_kv(std::cout, ev.metrics);
    return kOk;
  });
}

int cmd_reach(const ReachArgs& args) {
  return guarded("reach", [&] {
    std::vector<env::Point2> targets;
    if (!args.target.empty()) {
      if (args.target.size() != 2) throw ConfigError("--target takes exactly two numbers");
      targets.emplace_back(args.target[0], args.target[1]);
    } else {
      std::ifstream in(args.targets_file);
      if (!in) throw ConfigError("cannot read targets file " + args.targets_file.string());
      std::string line;
      while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x = 0, y = 0;
        if (ls >> x >> y) targets.emplace_back(x, y);
      }
      if (targets.empty()) throw ConfigError("targets file " + args.targets_file.string() + " holds no 'x y' pairs");
    }
    for (const auto& t : targets) {
      if (!t.allFinite()) throw ConfigError("reach targets must be finite");
    }

    const LoadedRun run = load_run(args.run_dir);
    const proposer::AffordanceGrid grid(2, run.eval.grid_side);
    const auto ev = evaluate(run, grid, nullptr);
    const auto start = run.task->canonical_world();

    const fs::path csv_path = args.run_dir / "reach_results.csv";
    const bool fresh = !fs::exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app);
    if (fresh) csv << "target_x,target_y,omega0,omega1,achieved_x,achieved_y,error,residual,fallback\n";
    csv.precision(17);

    std::vector<double> errors;
    std::size_t fallbacks = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      Rng rng(derive_seed(run.eval.seed, {kEvalReach, i}));
      const auto r = affordance::reach(targets[i], run.net, *run.task, *start, ev.rollout.grid, grid, run.eval.r_max, rng);
      const auto& ip = r.interpolation;
      csv << targets[i].x() << ',' << targets[i].y() << ',' << ip.omega.x() << ',' << ip.omega.y() << ','
          << r.achieved.x() << ',' << r.achieved.y() << ',' << r.error << ',' << ip.residual << ','
          << (ip.fallback ? 1 : 0) << '\n';
      errors.push_back(r.error);
      fallbacks += ip.fallback ? 1 : 0;
      if (targets.size() == 1) {
        std::cout << "omega0=" << ip.omega.x() << "\nomega1=" << ip.omega.y() << "\nachieved_x=" << r.achieved.x()
                  << "\nachieved_y=" << r.achieved.y() << "\nerror=" << r.error << "\nresidual=" << ip.residual
                  << "\nfallback=" << (ip.fallback ? 1 : 0) << '\n';
      }
    }
    if (targets.size() > 1) {
      std::vector<double> sorted = errors;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
      std::cout << "targets=" << n << "\nmedian_error=" << median << "\nmax_error=" << sorted.back()
                << "\nfallbacks=" << fallbacks << '\n';
    }
    return kOk;
  });
}

int cmd_plot(const fs::path& run_dir, const fs::path& out) {
  return guarded("plot", [&] {
    RunConfig cfg(read_json(run_dir / "config.json"));
    const auto task = cfg.make_task();
    const EvalSettings eval = cfg.eval(*task);
    const proposer::AffordanceGrid grid(2, eval.grid_side);
    const fs::path csv_path = run_dir / "outcome_grid.csv";
    require(csv_path);
    std::ifstream in(csv_path);
    std::string line;
    std::getline(in, line);  // header
    proposer::OutcomeGrid g;
    g.outcomes.resize(2, static_cast<Eigen::Index>(grid.size()));
    std::size_t row = 0;
    while (std::getline(in, line) && row < grid.size()) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (cells.size() < 4) throw std::runtime_error("malformed row in " + csv_path.string());
      g.outcomes(0, static_cast<Eigen::Index>(row)) = std::stod(cells[2]);
      g.outcomes(1, static_cast<Eigen::Index>(row)) = std::stod(cells[3]);
      ++row;
    }
    if (row != grid.size()) throw std::runtime_error(csv_path.string() + " has the wrong number of rows");
    std::ostringstream svg;
    affordance::write_grid_svg(svg, grid, g, plot_extent(*task, g));
    const fs::path target = out.empty() ? run_dir / "outcome_grid.svg" : out;
    write_text(target, svg.str());
    std::cout << "svg=" << target.string() << "\nmarkers=" << grid.size() << '\n';
    return kOk;
  });
}

int cmd_inspect(const fs::path& file, bool verify) {
  return guarded("inspect", [&] {
    require(file);
    std::ifstream in(file, std::ios::binary);
    std::string magic;
    std::getline(in, magic);
    if (magic == "affordmap-weights") {
      const auto m = persistence::read_weight_manifest(file);
      std::cout << "format=weights\nversion=" << m.version << "\nkind=" << m.kind << "\nparam_count=" << m.param_count
                << "\nseed=" << m.seed << "\ncrc32=" << m.crc32 << "\ntrunk=" << layers_text(m.trunk) << '\n';
      if (m.kind == "fused") std::cout << "head=" << layers_text(m.head) << "\nside_dim=" << m.side_dim << '\n';
      if (m.extra.contains("role")) std::cout << "role=" << m.extra["role"].get<std::string>() << '\n';
      if (verify) {
        if (m.kind == "fused") {
          (void)persistence::load_fused(file);
        } else {
          (void)persistence::load_network(file);
        }
        std::cout << "payload=ok\n";
      }
      return kOk;
    }
    if (magic == "affordmap-dataset") {
      const auto h = persistence::read_dataset_header(file);
      std::cout << "format=dataset\nversion=" << h.version << "\nsensor_dim=" << h.sensor_dim
                << "\naction_dim=" << h.action_dim << "\ncount=" << h.count << "\nrecord_bytes=" << h.record_bytes()
                << "\nvalidation_fraction=" << h.validation_fraction << "\nsplit_seed=" << h.split_seed << '\n';
      if (verify) {
        const auto d = persistence::load_dataset(file);
        std::cout << "random=" << d.count(predictor::Provenance::random)
                  << "\nproposer=" << d.count(predictor::Provenance::proposer) << "\npayload=ok\n";
      }
      return kOk;
    }
    throw std::runtime_error(file.string() + " is neither a weight file nor a dataset file");
  });
}

}  // namespace affordmap::cli
