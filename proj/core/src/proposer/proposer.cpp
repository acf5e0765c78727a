#include "affordmap/proposer/proposer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "affordmap/diffnet/optimizer.hpp"

namespace affordmap::proposer {

using diffnet::LayerSpec;

Proposer make_proposer(const env::Task& task, const predictor::Architecture& arch, std::size_t affordance_dim,
                       Rng& rng) {
  diffnet::Network trunk = predictor::make_trunk(task.sensor_dim(), arch);
  auto layers = diffnet::mlp_layers(trunk.output_dim() + affordance_dim, arch.head_hidden, task.action_dim(),
                                    arch.activation);
  const env::ActionBox& box = task.action_box();
  std::vector<double> scale(box.dim());
  std::vector<double> shift(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    scale[i] = 0.5 * (box.hi[ii] - box.lo[ii]);
    shift[i] = 0.5 * (box.hi[ii] + box.lo[ii]);
  }
  layers.push_back(LayerSpec::tanh(task.action_dim()));
  layers.push_back(LayerSpec::scale_shift(std::move(scale), std::move(shift)));
  Proposer net(std::move(trunk), diffnet::Network(std::move(layers)), affordance_dim);
  net.initialize(rng);
  return net;
}

Eigen::VectorXd propose(const Proposer& net, const Eigen::VectorXd& sensor, const Eigen::VectorXd& affordance) {
  if (static_cast<std::size_t>(affordance.size()) != net.side_dim()) {
    throw diffnet::ShapeError("affordance has dimension " + std::to_string(affordance.size()) + ", expected " +
                              std::to_string(net.side_dim()));
  }
  if (!affordance.allFinite() || affordance.cwiseAbs().maxCoeff() > 1.0) {
    throw AffordanceRangeError("affordance outside [-1, 1]^n");
  }
  const Eigen::MatrixXf s = sensor.cast<float>();
  const Eigen::MatrixXf w = affordance.cast<float>();
  return net.forward(s, w).output().col(0).cast<double>();
}

Eigen::MatrixXd propose_batch(const Proposer& net, const Eigen::MatrixXd& sensors, const Eigen::MatrixXd& affordances) {
  const Eigen::MatrixXf s = sensors.cast<float>();
  const Eigen::MatrixXf w = affordances.cast<float>();
  return net.forward(s, w).output().cast<double>();
}

EnvRollout rollout_environment(const Proposer& net, const env::Task& task, const env::World& start,
                               const Eigen::MatrixXd& affordances, Rng& rng, std::size_t trials, SensorView view) {
  const Eigen::Index v = affordances.cols();
  const std::size_t horizon = task.horizon();
  EnvRollout out;
  out.grid.outcomes = Eigen::MatrixXd::Zero(2, v);
  out.grid.source = OutcomeSource::environment;
  out.truncated.assign(static_cast<std::size_t>(v), false);
  trials = std::max<std::size_t>(trials, 1);

  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::vector<std::unique_ptr<env::World>> worlds;
    worlds.reserve(static_cast<std::size_t>(v));
    for (Eigen::Index c = 0; c < v; ++c) worlds.push_back(start.clone());
    for (std::size_t t = 0; t < horizon; ++t) {
      Eigen::MatrixXd sensors(static_cast<Eigen::Index>(task.sensor_dim()), v);
      for (Eigen::Index c = 0; c < v; ++c) {
        Eigen::VectorXd s = worlds[static_cast<std::size_t>(c)]->sensor();
        if (view == SensorView::obstacles_blanked) s = task.blank_obstacles(s);
        sensors.col(c) = s;
      }
      // column by column so results match single-vertex propose() bit for bit
      Eigen::MatrixXd actions(static_cast<Eigen::Index>(task.action_dim()), v);
      for (Eigen::Index c = 0; c < v; ++c) {
        actions.col(c) = propose_batch(net, sensors.col(c), affordances.col(c));
      }
      for (Eigen::Index c = 0; c < v; ++c) worlds[static_cast<std::size_t>(c)]->step(actions.col(c), rng);
      if (trial == 0) out.actions.push_back(actions);
    }
    for (Eigen::Index c = 0; c < v; ++c) {
      const auto& w = *worlds[static_cast<std::size_t>(c)];
      out.grid.outcomes.col(c) += w.outcome();
      if (trial == 0) {
        if (const auto* rw = dynamic_cast<const env::ReacherWorld*>(&w)) {
          out.truncated[static_cast<std::size_t>(c)] = rw->last_step().truncated;
        }
      }
    }
  }
  out.grid.outcomes /= static_cast<double>(trials);
  return out;
}

namespace {

// Columns of the chosen vertices plus the edges whose endpoints both survive,
// re-indexed into the subset.
struct VertexSubset {
  Eigen::MatrixXf affordances;
  std::vector<Edge> edges;
};

VertexSubset choose_vertices(const AffordanceGrid& grid, std::size_t count, Rng& rng) {
  VertexSubset sub;
  const std::size_t v = grid.size();
  std::vector<std::size_t> pick(v);
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  if (count > 0 && count < v) {
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(count);
    std::sort(pick.begin(), pick.end());
  }
  std::vector<std::size_t> where(v, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < pick.size(); ++i) where[pick[i]] = i;
  sub.affordances.resize(static_cast<Eigen::Index>(grid.dim()), static_cast<Eigen::Index>(pick.size()));
  for (std::size_t i = 0; i < pick.size(); ++i) {
    sub.affordances.col(static_cast<Eigen::Index>(i)) = grid.vertex(pick[i]).cast<float>();
  }
  for (const auto& [a, b] : grid.edges()) {
    if (where[a] != std::numeric_limits<std::size_t>::max() && where[b] != std::numeric_limits<std::size_t>::max()) {
      sub.edges.emplace_back(where[a], where[b]);
    }
  }
  return sub;
}

}  // namespace

ProposerTrainReport train_proposer(Proposer& net, const predictor::Predictor& model, const env::Task& task,
                                   const AffordanceGrid& grid, const ProposerTrainConfig& cfg) {
  cfg.loss.validate();
  if (net.side_dim() != grid.dim()) throw diffnet::ShapeError("proposer affordance input does not match grid dimension");

  const std::size_t trunk_count = net.trunk().param_count();
  if (cfg.tie_trunk) {
    if (net.trunk().layers() != model.net.trunk().layers()) {
      throw diffnet::ShapeError("tie_trunk requires identical proposer and predictor trunk architectures");
    }
    net.trunk().set_params(model.net.trunk().params());
  }

  Rng rng(derive_seed(cfg.seed, {0x70726f706fULL}));
  diffnet::Optimizer opt({diffnet::OptimizerKind::adam, cfg.learning_rate});
  ProposerTrainReport report;
  const VertexSubset full = choose_vertices(grid, 0, rng);

  double best = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_total = 0.0;
    for (std::size_t it = 0; it < cfg.iterations_per_epoch; ++it) {
      const auto world = task.sample_world(rng);
      const Eigen::VectorXd s0 = world->sensor();
      const VertexSubset sub = cfg.vertex_subsample > 0 ? choose_vertices(grid, cfg.vertex_subsample, rng) : full;

      const auto rollout = rollout_predictor(net, model, task, s0, sub.affordances, task.horizon());
      const OutcomeGrid og = rollout.outcome_grid(model.layout.gaussian);
      const SpreadLoss loss = spread_loss(og, sub.edges, cfg.loss);

      const Eigen::MatrixXf d_out = loss.d_outcomes.cast<float>();
      const Eigen::VectorXf d_sigma = loss.d_sigma.cast<float>();
      Eigen::VectorXf grad = rollout_backward(net, model, task, rollout, d_out, og.has_sigma() ? &d_sigma : nullptr);
      if (cfg.tie_trunk) grad.head(static_cast<Eigen::Index>(trunk_count)).setZero();
      opt.step(net, std::span<const float>(grad.data(), static_cast<std::size_t>(grad.size())));

      report.loss_trace.push_back(loss.value);
      report.min_pairwise_trace.push_back(loss.min_pairwise);
      epoch_total += loss.value;
      ++report.iterations;
    }
    const double epoch_loss = epoch_total / static_cast<double>(std::max<std::size_t>(cfg.iterations_per_epoch, 1));
    report.epoch_loss.push_back(epoch_loss);
    if (!std::isfinite(best) || epoch_loss < best - cfg.min_relative_improvement * std::abs(best)) {
      best = epoch_loss;
      stall = 0;
    } else if (++stall >= cfg.patience) {
      report.early_stopped = true;
      break;
    }
  }
  return report;
}

}  // namespace affordmap::proposer
