#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "affordmap/diffnet/fused.hpp"
#include "affordmap/env/task.hpp"
#include "affordmap/predictor/predictor.hpp"
#include "affordmap/proposer/grid.hpp"
#include "affordmap/proposer/spread_loss.hpp"
#include "affordmap/rng.hpp"

namespace affordmap::proposer {

/// Affordance-conditioned policy pi(s, omega) -> a. The head ends in tanh
/// followed by a fixed affine map into the task's action box, so every
/// output is admissible.
template <typename T>
using BasicProposer = diffnet::BasicFusedNet<T>;
using Proposer = BasicProposer<float>;

Proposer make_proposer(const env::Task& task, const predictor::Architecture& arch, std::size_t affordance_dim,
                       Rng& rng);

class AffordanceRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Rejects omega outside [-1, 1]^n.
Eigen::VectorXd propose(const Proposer& net, const Eigen::VectorXd& sensor, const Eigen::VectorXd& affordance);

/// Batched proposal; one column per (sensor, affordance) pair. No range check.
Eigen::MatrixXd propose_batch(const Proposer& net, const Eigen::MatrixXd& sensors, const Eigen::MatrixXd& affordances);

// ---- predictor-dynamics rollouts (differentiable) --------------------------

template <typename T>
struct ChainStep {
  diffnet::FusedTape<T> proposer_tape;
  predictor::PredictorPass<T> predictor_pass;
};

template <typename T>
struct PredictorRollout {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<ChainStep<T>> steps;
  Matrix outcomes;                           // 2 x V
  Eigen::Matrix<T, Eigen::Dynamic, 1> sigma;  // per-vertex mean over steps and dimensions
  Matrix final_mean;                         // prediction_dim x V

  OutcomeGrid outcome_grid(bool with_sigma) const {
    OutcomeGrid g;
    g.outcomes = outcomes.template cast<double>();
    if (with_sigma) g.sigma = sigma.template cast<double>();
    g.source = OutcomeSource::predictor;
    return g;
  }
};

/// Chains proposer and predictor `horizon` times from the common start
/// sensor s0 for every affordance column:
///   s <- mean(predictor(s, proposer(s, omega)))
/// The outcome is the target-space slice of the final predicted mean.
template <typename T>
PredictorRollout<T> rollout_predictor(const BasicProposer<T>& proposer, const predictor::BasicPredictor<T>& model,
                                      const env::Task& task, const Eigen::VectorXd& s0,
                                      const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& affordances,
                                      std::size_t horizon) {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  if (horizon == 0) throw std::invalid_argument("rollout horizon must be at least 1");
  if (horizon > 1 && !task.prediction_is_sensor()) {
    throw std::invalid_argument("multi-step predictor rollouts need predictions shaped like the sensor");
  }
  const Eigen::Index v = affordances.cols();
  const auto p = static_cast<Eigen::Index>(model.layout.prediction_dim);
  PredictorRollout<T> r;
  Matrix sensor = s0.cast<T>().replicate(1, v);
  Eigen::Matrix<T, Eigen::Dynamic, 1> sigma_acc = Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(v);
  for (std::size_t t = 0; t < horizon; ++t) {
    ChainStep<T> step;
    step.proposer_tape = proposer.forward(sensor, affordances);
    step.predictor_pass = predictor::predictor_forward(model, sensor, step.proposer_tape.output());
    sigma_acc += step.predictor_pass.log_sigma.array().exp().matrix().colwise().sum().transpose();
    sensor = step.predictor_pass.mean;
    r.steps.push_back(std::move(step));
  }
  r.final_mean = r.steps.back().predictor_pass.mean;
  r.outcomes = r.final_mean.middleRows(static_cast<Eigen::Index>(task.outcome_offset()), 2);
  r.sigma = sigma_acc / static_cast<T>(static_cast<double>(horizon) * static_cast<double>(p));
  return r;
}

/// Gradient of a scalar loss with respect to the proposer parameters, given
/// dL/d(outcomes) and dL/d(per-vertex sigma). The predictor is treated as
/// frozen: only input gradients flow through it.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> rollout_backward(const BasicProposer<T>& proposer,
                                                     const predictor::BasicPredictor<T>& model, const env::Task& task,
                                                     const PredictorRollout<T>& r,
                                                     const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& d_outcomes,
                                                     const Eigen::Matrix<T, Eigen::Dynamic, 1>* d_sigma) {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const auto p = static_cast<Eigen::Index>(model.layout.prediction_dim);
  const Eigen::Index v = d_outcomes.cols();
  const std::size_t horizon = r.steps.size();
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(proposer.param_count()));

  Matrix d_mean = Matrix::Zero(p, v);
  d_mean.middleRows(static_cast<Eigen::Index>(task.outcome_offset()), 2) = d_outcomes;
  const bool use_sigma = model.layout.gaussian && d_sigma != nullptr && d_sigma->size() == v;
  const T sigma_scale = T(1) / static_cast<T>(static_cast<double>(horizon) * static_cast<double>(p));

  for (std::size_t tt = horizon; tt-- > 0;) {
    const ChainStep<T>& step = r.steps[tt];
    Matrix d_log_sigma;
    if (use_sigma) {
      d_log_sigma = step.predictor_pass.log_sigma.array().exp().matrix();
      for (Eigen::Index c = 0; c < v; ++c) d_log_sigma.col(c) *= (*d_sigma)[c] * sigma_scale;
    }
    const auto pg = predictor::predictor_backward(model, step.predictor_pass, d_mean,
                                                  use_sigma ? &d_log_sigma : nullptr, diffnet::GradMode::input_only);
    const auto qg = proposer.backward(step.proposer_tape, pg.action, diffnet::GradMode::params_and_input);
    grad += qg.params;
    d_mean = pg.sensor + qg.sensor;  // gradient w.r.t. the sensor fed into this step
  }
  return grad;
}

// ---- environment rollouts --------------------------------------------------

enum class SensorView { full, obstacles_blanked };

struct EnvRollout {
  OutcomeGrid grid;                    // environment-sourced, averaged over trials
  std::vector<Eigen::MatrixXd> actions;  // per step, action_dim x V (first trial)
  std::vector<bool> truncated;           // reacher: per vertex, sweep stopped by an obstacle (first trial)
};

/// Rolls every affordance column through clones of `start` for the task
/// horizon, querying the proposer on each step. With obstacles_blanked the
/// proposer sees a sensor with occupancy zeroed while the world keeps its
/// obstacles.
EnvRollout rollout_environment(const Proposer& net, const env::Task& task, const env::World& start,
                               const Eigen::MatrixXd& affordances, Rng& rng, std::size_t trials = 1,
                               SensorView view = SensorView::full);

// ---- training --------------------------------------------------------------

struct ProposerTrainConfig {
  std::size_t epochs = 40;
  std::size_t iterations_per_epoch = 50;
  double learning_rate = 1e-4;
  std::size_t patience = 5;
  double min_relative_improvement = 1e-3;
  ProposerLossConfig loss;
  bool tie_trunk = false;          // reuse the predictor's trunk (frozen) in the proposer
  std::size_t vertex_subsample = 0;  // 0 = all vertices every iteration
  std::uint64_t seed = 0;
};

struct ProposerTrainReport {
  std::vector<double> loss_trace;          // per iteration
  std::vector<double> min_pairwise_trace;  // per iteration, predictor-sourced
  std::vector<double> epoch_loss;
  bool early_stopped = false;
  std::size_t iterations = 0;
};

/// Adam on the spread loss of predictor-sourced outcome grids, one freshly
/// sampled start state per iteration, gradients through the whole chain into
/// the proposer only.
ProposerTrainReport train_proposer(Proposer& net, const predictor::Predictor& model, const env::Task& task,
                                   const AffordanceGrid& grid, const ProposerTrainConfig& cfg);

}  // namespace affordmap::proposer
