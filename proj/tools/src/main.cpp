#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace affordmap::cli;
  CLI::App app{"affordmap: learn and use body-affordance grids"};
  app.require_subcommand(1);

  TrainArgs train;
  std::size_t train_workers = 0;
  auto* t = app.add_subcommand("train", "collect data and train predictor and proposer");
  t->add_option("-c,--config", train.config, "JSON config file")->required();
  t->add_option("-r,--run-dir", train.run_dir, "output run directory")->required();
  t->add_option("--set", train.overrides, "override section.key=value (repeatable)");
  t->add_option("--workers", train_workers, "parallel collection workers");

  std::filesystem::path eval_dir;
  std::size_t eval_workers = 0;
  auto* e = app.add_subcommand("eval", "evaluate the trained grid in the environment");
  e->add_option("-r,--run-dir", eval_dir, "trained run directory")->required();
  e->add_option("--workers", eval_workers, "accepted for symmetry; evaluation is sequential");

  ReachArgs reach;
  auto* r = app.add_subcommand("reach", "drive the arm or walker to a target point");
  r->add_option("-r,--run-dir", reach.run_dir, "trained run directory")->required();
  auto* one = r->add_option("--target", reach.target, "target x y")->expected(2);
  auto* many = r->add_option("--targets", reach.targets_file, "file with one 'x y' pair per line");
  one->excludes(many);

  std::filesystem::path plot_dir;
  std::filesystem::path plot_out;
  auto* p = app.add_subcommand("plot", "render outcome_grid.csv of a run as SVG");
  p->add_option("-r,--run-dir", plot_dir, "run directory")->required();
  p->add_option("-o,--out", plot_out, "output SVG (default <run-dir>/outcome_grid.svg)");

  std::filesystem::path inspect_file;
  bool verify = false;
  auto* i = app.add_subcommand("inspect", "print the header of a weight or dataset file");
  i->add_option("file", inspect_file, "file to inspect")->required();
  i->add_flag("--verify", verify, "also check payload length and checksum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kConfigError;
  }

  const auto workers = [](std::size_t w) { return w == 0 ? std::optional<std::size_t>{} : std::optional{w}; };
  if (*t) {
    train.workers = workers(train_workers);
    return cmd_train(train);
  }
  if (*e) return cmd_eval(eval_dir, workers(eval_workers));
  if (*r) {
    if (reach.target.empty() && reach.targets_file.empty()) {
      std::cerr << "reach: give --target x y or --targets file\n";
      return kConfigError;
    }
    return cmd_reach(reach);
  }
  if (*p) return cmd_plot(plot_dir, plot_out);
  return cmd_inspect(inspect_file, verify);
}
