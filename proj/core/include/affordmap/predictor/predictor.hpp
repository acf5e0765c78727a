#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "affordmap/diffnet/fused.hpp"
#include "affordmap/env/task.hpp"
#include "affordmap/predictor/dataset.hpp"
#include "affordmap/rng.hpp"

namespace affordmap::predictor {

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 ln(2 pi)

/// Hidden widths of the sensor trunk and of the fused head.
struct Architecture {
  std::vector<std::size_t> trunk_hidden{128, 128};
  std::vector<std::size_t> head_hidden{128};
  diffnet::LayerKind activation = diffnet::LayerKind::tanh;
};

/// Trunk with an activation after every dense layer, so its output is a
/// feature vector ready for fusion.
diffnet::Network make_trunk(std::size_t sensor_dim, const Architecture& arch);

struct PredictorLayout {
  std::size_t prediction_dim = 0;
  bool gaussian = false;  // head emits (mean, log sigma); otherwise sigma == 1
  bool residual = false;  // mean = sensor + head output (requires prediction_dim == sensor_dim)
};

template <typename T>
struct BasicPredictor {
  diffnet::BasicFusedNet<T> net;
  PredictorLayout layout;

  std::size_t sensor_dim() const { return net.sensor_dim(); }
  std::size_t action_dim() const { return net.side_dim(); }

  template <typename U>
  BasicPredictor<U> cast() const {
    return {net.template cast<U>(), layout};
  }
};

using Predictor = BasicPredictor<float>;

Predictor make_predictor(const env::Task& task, const Architecture& arch, bool gaussian, Rng& rng);

template <typename T>
struct PredictorPass {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  diffnet::FusedTape<T> tape;
  Matrix mean;
  Matrix log_sigma;  // zeros in point-estimate mode
};

template <typename T>
struct PredictorGradients {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::Matrix<T, Eigen::Dynamic, 1> params;
  Matrix sensor;
  Matrix action;
};

/// Batched forward; columns are samples.
template <typename T>
PredictorPass<T> predictor_forward(const BasicPredictor<T>& model,
                                   const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& sensor,
                                   const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& action) {
  PredictorPass<T> pass;
  pass.tape = model.net.forward(sensor, action);
  const auto& raw = pass.tape.output();
  const auto p = static_cast<Eigen::Index>(model.layout.prediction_dim);
  pass.mean = raw.topRows(p);
  if (model.layout.residual) pass.mean += sensor;
  if (model.layout.gaussian) {
    pass.log_sigma = raw.bottomRows(p);
  } else {
    pass.log_sigma.setZero(p, raw.cols());
  }
  return pass;
}

/// Reverse sweep given gradients of a scalar with respect to the mean and
/// (optionally) log sigma outputs.
template <typename T>
PredictorGradients<T> predictor_backward(const BasicPredictor<T>& model, const PredictorPass<T>& pass,
                                         const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& d_mean,
                                         const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>* d_log_sigma,
                                         diffnet::GradMode mode) {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  const auto p = static_cast<Eigen::Index>(model.layout.prediction_dim);
  Matrix d_raw = Matrix::Zero(static_cast<Eigen::Index>(model.net.output_dim()), d_mean.cols());
  d_raw.topRows(p) = d_mean;
  if (model.layout.gaussian && d_log_sigma != nullptr) d_raw.bottomRows(p) = *d_log_sigma;
  auto g = model.net.backward(pass.tape, d_raw, mode);
  PredictorGradients<T> out;
  out.params = std::move(g.params);
  out.sensor = std::move(g.sensor);
  if (model.layout.residual) out.sensor += d_mean;
  out.action = std::move(g.side);
  return out;
}

/// Predicted next-state distribution for one (s, a).
struct GaussianPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd sigma;
};

GaussianPrediction predict(const Predictor& model, const Eigen::VectorXd& s, const Eigen::VectorXd& a);

/// Mean over dimensions of 0.5 ln(2 pi) + ln sigma + (x - mu)^2 / (2 sigma^2).
double nll_loss(const GaussianPrediction& prediction, const Eigen::VectorXd& actual);

/// Batch objective used for training: mean squared error in point-estimate
/// mode, mean Gaussian NLL otherwise. Writes gradients w.r.t. mean and
/// log sigma when the output pointers are non-null.
double batch_loss(const PredictorLayout& layout, const Eigen::MatrixXf& mean, const Eigen::MatrixXf& log_sigma,
                  const Eigen::MatrixXf& target, Eigen::MatrixXf* d_mean, Eigen::MatrixXf* d_log_sigma);

struct TrainConfig {
  std::size_t epochs = 150;
  std::size_t batch_size = 64;
  std::size_t passes_per_epoch = 2;  // gradient steps per observation per epoch
  double learning_rate = 1e-3;
  double lr_decay = 1.0;  // multiplicative, applied after every epoch
  double sensor_noise = 0.0;
  double action_noise = 0.0;
  std::size_t patience = 5;
  double min_relative_improvement = 1e-3;
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch, on noise-injected inputs
  std::vector<double> validation_loss;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
  std::size_t gradient_steps = 0;
};

/// Stacked inputs and regression targets for a set of records.
struct DesignMatrices {
  Eigen::MatrixXf sensor;
  Eigen::MatrixXf action;
  Eigen::MatrixXf target;
};

DesignMatrices design_matrices(const ExperienceDataset& data, const env::Task& task,
                               std::span<const std::size_t> indices);

/// Adds N(0, sigma_s) to sensor inputs and N(0, sigma_a) to action inputs.
/// Regression targets are not an argument and cannot be touched.
void perturb_inputs(Eigen::MatrixXf& sensor, Eigen::MatrixXf& action, double sensor_noise, double action_noise,
                    Rng& rng);

/// Minibatch Adam on the batch loss with input-noise injection; early stops
/// when the validation loss (training loss if no validation records) fails
/// to improve by the relative tolerance for `patience` epochs, and restores
/// the best-epoch parameters.
TrainReport train_predictor(Predictor& model, const ExperienceDataset& data, const env::Task& task,
                            const TrainConfig& config);

double evaluate_loss(const Predictor& model, const DesignMatrices& m);

/// RMS Euclidean error of the 2D outcome slice of the predicted mean.
double outcome_rmse(const Predictor& model, const env::Task& task, const DesignMatrices& m);

}  // namespace affordmap::predictor
