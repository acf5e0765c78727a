#include <benchmark/benchmark.h>

#include "affordmap/affordance/interpolate.hpp"
#include "affordmap/affordance/metrics.hpp"
#include "affordmap/env/reacher.hpp"
#include "affordmap/env/task.hpp"
#include "affordmap/predictor/predictor.hpp"
#include "affordmap/proposer/proposer.hpp"
#include "affordmap/proposer/spread_loss.hpp"

using namespace affordmap;

namespace {

void BM_PredictorForwardBackward(benchmark::State& state) {
  env::ReacherTask task;
  Rng rng(1);
  const auto model = predictor::make_predictor(task, predictor::Architecture{}, true, rng);
  const auto batch = state.range(0);
  const Eigen::MatrixXf s = Eigen::MatrixXf::Random(72, batch);
  const Eigen::MatrixXf a = Eigen::MatrixXf::Random(8, batch);
  const Eigen::MatrixXf target = Eigen::MatrixXf::Random(10, batch);
  Eigen::MatrixXf dm, dl;
  for (auto _ : state) {
    const auto pass = predictor::predictor_forward(model, s, a);
    predictor::batch_loss(model.layout, pass.mean, pass.log_sigma, target, &dm, &dl);
    auto g = predictor::predictor_backward(model, pass, dm, &dl, diffnet::GradMode::params_and_input);
    benchmark::DoNotOptimize(g.params.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_PredictorForwardBackward)->Arg(64)->Arg(256);

void BM_ProposerChainStep(benchmark::State& state) {
  env::LocoTask task;
  Rng rng(2);
  const auto model = predictor::make_predictor(task, predictor::Architecture{}, true, rng);
  const auto net = proposer::make_proposer(task, predictor::Architecture{}, 2, rng);
  const proposer::AffordanceGrid grid(2, 9);
  const Eigen::MatrixXf w = grid.vertices().cast<float>();
  const Eigen::VectorXd s0 = task.canonical_world()->sensor();
  proposer::ProposerLossConfig cfg;
  for (auto _ : state) {
    const auto r = proposer::rollout_predictor(net, model, task, s0, w, task.horizon());
    const auto l = proposer::spread_loss(r.outcome_grid(true), grid.edges(), cfg);
    const Eigen::MatrixXf d = l.d_outcomes.cast<float>();
    const Eigen::VectorXf ds = l.d_sigma.cast<float>();
    auto g = proposer::rollout_backward(net, model, task, r, d, &ds);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_ProposerChainStep);

void BM_SpreadLoss(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const proposer::AffordanceGrid grid(2, k);
  proposer::OutcomeGrid og;
  og.outcomes = Eigen::MatrixXd::Random(2, static_cast<Eigen::Index>(grid.size()));
  proposer::ProposerLossConfig cfg;
  for (auto _ : state) {
    auto l = proposer::spread_loss(og, grid.edges(), cfg);
    benchmark::DoNotOptimize(l.value);
  }
}
BENCHMARK(BM_SpreadLoss)->Arg(9)->Arg(17);

void BM_Kinematics(benchmark::State& state) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  env::JointAngles q;
  for (auto& a : q) a = u(rng);
  for (auto _ : state) {
    q[0] = -q[0];
    benchmark::DoNotOptimize(env::reacher_kinematics(q));
  }
}
BENCHMARK(BM_Kinematics);

void BM_ReacherSweep(benchmark::State& state) {
  Rng rng(4);
  env::ReacherParams p;
  p.min_obstacles = 4;
  const env::Reacher2D arm = env::Reacher2D::generate(p, rng);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  env::JointAngles q;
  for (auto& a : q) a = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(arm.preview(q));
}
BENCHMARK(BM_ReacherSweep);

void BM_Interpolate(benchmark::State& state) {
  const proposer::AffordanceGrid grid(2, 9);
  proposer::OutcomeGrid og;
  og.outcomes = 2.0 * grid.vertices();
  og.outcomes.row(0) += 0.2 * grid.vertices().row(1).cwiseAbs2();
  const env::Point2 target(0.3, -0.7);
  for (auto _ : state) benchmark::DoNotOptimize(affordance::interpolate_affordance(target, og, grid, 0.4));
}
BENCHMARK(BM_Interpolate);

void BM_ReachableArea(benchmark::State& state) {
  env::ReacherTask task;
  for (auto _ : state) {
    Rng rng(5);
    benchmark::DoNotOptimize(affordance::reachable_area(task, 10000, rng));
  }
}
BENCHMARK(BM_ReachableArea)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
