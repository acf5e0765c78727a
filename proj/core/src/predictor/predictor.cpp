#include "affordmap/predictor/predictor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "affordmap/diffnet/optimizer.hpp"

namespace affordmap::predictor {

using diffnet::LayerSpec;

diffnet::Network make_trunk(std::size_t sensor_dim, const Architecture& arch) {
  std::vector<LayerSpec> layers;
  std::size_t prev = sensor_dim;
  for (std::size_t width : arch.trunk_hidden) {
    layers.push_back(LayerSpec::dense(prev, width));
    layers.push_back({arch.activation, width, width, {}, {}});
    prev = width;
  }
  if (layers.empty()) throw std::invalid_argument("sensor trunk needs at least one hidden layer");
  return diffnet::Network(std::move(layers));
}

Predictor make_predictor(const env::Task& task, const Architecture& arch, bool gaussian, Rng& rng) {
  diffnet::Network trunk = make_trunk(task.sensor_dim(), arch);
  const std::size_t p = task.prediction_dim();
  diffnet::Network head(
      diffnet::mlp_layers(trunk.output_dim() + task.action_dim(), arch.head_hidden, gaussian ? 2 * p : p, arch.activation));
  Predictor model{diffnet::FusedNet(std::move(trunk), std::move(head), task.action_dim()),
                  PredictorLayout{p, gaussian, task.prediction_is_sensor()}};
  model.net.initialize(rng);
  return model;
}

GaussianPrediction predict(const Predictor& model, const Eigen::VectorXd& s, const Eigen::VectorXd& a) {
  if (static_cast<std::size_t>(s.size()) != model.sensor_dim() ||
      static_cast<std::size_t>(a.size()) != model.action_dim()) {
    throw diffnet::ShapeError("predict: expected sensor " + std::to_string(model.sensor_dim()) + " and action " +
                              std::to_string(model.action_dim()) + ", got " + std::to_string(s.size()) + " and " +
                              std::to_string(a.size()));
  }
  const Eigen::MatrixXf sf = s.cast<float>();
  const Eigen::MatrixXf af = a.cast<float>();
  const auto pass = predictor_forward(model, sf, af);
  GaussianPrediction out;
  out.mean = pass.mean.col(0).cast<double>();
  out.sigma = pass.log_sigma.col(0).cast<double>().array().exp().matrix();
  return out;
}

double nll_loss(const GaussianPrediction& prediction, const Eigen::VectorXd& actual) {
  if (prediction.mean.size() != actual.size() || prediction.sigma.size() != actual.size()) {
    throw diffnet::ShapeError("nll_loss: prediction and target shapes differ");
  }
  double total = 0.0;
  for (Eigen::Index d = 0; d < actual.size(); ++d) {
    const double sigma = prediction.sigma[d];
    const double r = actual[d] - prediction.mean[d];
    total += kHalfLog2Pi + std::log(sigma) + r * r / (2.0 * sigma * sigma);
  }
  return total / static_cast<double>(actual.size());
}

double batch_loss(const PredictorLayout& layout, const Eigen::MatrixXf& mean, const Eigen::MatrixXf& log_sigma,
                  const Eigen::MatrixXf& target, Eigen::MatrixXf* d_mean, Eigen::MatrixXf* d_log_sigma) {
  const double count = static_cast<double>(mean.size());
  const Eigen::ArrayXXf r = (mean - target).array();
  if (!layout.gaussian) {
    if (d_mean) *d_mean = (r * static_cast<float>(2.0 / count)).matrix();
    if (d_log_sigma) d_log_sigma->setZero(mean.rows(), mean.cols());
    return r.cast<double>().square().sum() / count;
  }
  const Eigen::ArrayXXf inv_var = (-2.0f * log_sigma.array()).exp();
  const double loss =
      (kHalfLog2Pi + log_sigma.array().cast<double>() + 0.5 * (r.square() * inv_var).cast<double>()).sum() / count;
  const auto scale = static_cast<float>(1.0 / count);
  if (d_mean) *d_mean = (r * inv_var * scale).matrix();
  if (d_log_sigma) *d_log_sigma = ((1.0f - r.square() * inv_var) * scale).matrix();
  return loss;
}

DesignMatrices design_matrices(const ExperienceDataset& data, const env::Task& task,
                               std::span<const std::size_t> indices) {
  DesignMatrices m;
  const auto n = static_cast<Eigen::Index>(indices.size());
  m.sensor.resize(static_cast<Eigen::Index>(data.sensor_dim()), n);
  m.action.resize(static_cast<Eigen::Index>(data.action_dim()), n);
  m.target.resize(static_cast<Eigen::Index>(task.prediction_dim()), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Transition& t = data[indices[static_cast<std::size_t>(j)]];
    m.sensor.col(j) = t.s;
    m.action.col(j) = t.a;
    m.target.col(j) =
        task.regression_target(t.s.cast<double>(), t.a.cast<double>(), t.s_next.cast<double>()).cast<float>();
  }
  return m;
}

void perturb_inputs(Eigen::MatrixXf& sensor, Eigen::MatrixXf& action, double sensor_noise, double action_noise,
                    Rng& rng) {
  if (sensor_noise > 0.0) {
    std::normal_distribution<float> n(0.0f, static_cast<float>(sensor_noise));
    for (Eigen::Index i = 0; i < sensor.size(); ++i) sensor.data()[i] += n(rng);
  }
  if (action_noise > 0.0) {
    std::normal_distribution<float> n(0.0f, static_cast<float>(action_noise));
    for (Eigen::Index i = 0; i < action.size(); ++i) action.data()[i] += n(rng);
  }
}

namespace {

Eigen::MatrixXf gather(const Eigen::MatrixXf& m, std::span<const std::size_t> cols) {
  Eigen::MatrixXf out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  return out;
}

}  // namespace

double evaluate_loss(const Predictor& model, const DesignMatrices& m) {
  if (m.sensor.cols() == 0) return 0.0;
  constexpr Eigen::Index chunk = 4096;
  double total = 0.0;
  for (Eigen::Index start = 0; start < m.sensor.cols(); start += chunk) {
    const Eigen::Index n = std::min(chunk, m.sensor.cols() - start);
    const Eigen::MatrixXf s = m.sensor.middleCols(start, n);
    const Eigen::MatrixXf a = m.action.middleCols(start, n);
    const auto pass = predictor_forward(model, s, a);
    total += batch_loss(model.layout, pass.mean, pass.log_sigma, m.target.middleCols(start, n), nullptr, nullptr) *
             static_cast<double>(n);
  }
  return total / static_cast<double>(m.sensor.cols());
}

double outcome_rmse(const Predictor& model, const env::Task& task, const DesignMatrices& m) {
  if (m.sensor.cols() == 0) return 0.0;
  const auto pass = predictor_forward(model, m.sensor, m.action);
  const auto off = static_cast<Eigen::Index>(task.outcome_offset());
  const Eigen::MatrixXd diff = (pass.mean.middleRows(off, 2) - m.target.middleRows(off, 2)).cast<double>();
  return std::sqrt(diff.colwise().squaredNorm().mean());
}

TrainReport train_predictor(Predictor& model, const ExperienceDataset& data, const env::Task& task,
                            const TrainConfig& config) {
  if (data.empty()) throw std::invalid_argument("train_predictor: dataset is empty");
  if (config.batch_size == 0) throw std::invalid_argument("train_predictor: batch size must be positive");

  std::vector<std::size_t> train_idx = data.training_indices();
  const std::vector<std::size_t> val_idx = data.validation_indices();
  if (train_idx.empty()) {
    train_idx.resize(data.size());
    std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  }
  const DesignMatrices train = design_matrices(data, task, train_idx);
  const DesignMatrices val = design_matrices(data, task, val_idx);

  Rng rng(derive_seed(config.seed, {0x7072656469ULL}));
  diffnet::Optimizer opt({diffnet::OptimizerKind::adam, config.learning_rate});

  TrainReport report;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXf best_params = model.net.params();
  std::size_t stall = 0;

  std::vector<std::size_t> order(train_idx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Eigen::MatrixXf d_mean;
  Eigen::MatrixXf d_log_sigma;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t pass_i = 0; pass_i < std::max<std::size_t>(1, config.passes_per_epoch); ++pass_i) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t n = std::min(config.batch_size, order.size() - start);
        const std::span<const std::size_t> cols(order.data() + start, n);
        Eigen::MatrixXf s = gather(train.sensor, cols);
        Eigen::MatrixXf a = gather(train.action, cols);
        const Eigen::MatrixXf y = gather(train.target, cols);
        perturb_inputs(s, a, config.sensor_noise, config.action_noise, rng);
        const auto pass = predictor_forward(model, s, a);
        epoch_loss += batch_loss(model.layout, pass.mean, pass.log_sigma, y, &d_mean, &d_log_sigma);
        ++batches;
        const auto grads = predictor_backward(model, pass, d_mean, &d_log_sigma, diffnet::GradMode::params_and_input);
        opt.step(model.net, std::span<const float>(grads.params.data(), static_cast<std::size_t>(grads.params.size())));
        ++report.gradient_steps;
      }
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(batches, 1)));
    const double monitored = val_idx.empty() ? evaluate_loss(model, train) : evaluate_loss(model, val);
    report.validation_loss.push_back(val_idx.empty() ? std::numeric_limits<double>::quiet_NaN() : monitored);

    if (monitored < best - config.min_relative_improvement * std::abs(best) || !std::isfinite(best)) {
      best = monitored;
      best_params = model.net.params();
      report.best_epoch = epoch;
      stall = 0;
    } else if (++stall >= config.patience) {
      report.early_stopped = true;
      break;
    }
    opt.set_learning_rate(opt.config().learning_rate * config.lr_decay);
  }
  model.net.set_params(std::span<const float>(best_params.data(), static_cast<std::size_t>(best_params.size())));
  return report;
}

}  // namespace affordmap::predictor
