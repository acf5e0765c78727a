#include "affordmap/diffnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "affordmap/diffnet/optimizer.hpp"

namespace affordmap::diffnet {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::tanh: return "tanh";
    case LayerKind::relu: return "relu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::scale_shift: return "scale_shift";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
  if (name == "dense") return LayerKind::dense;
  if (name == "tanh") return LayerKind::tanh;
  if (name == "relu") return LayerKind::relu;
  if (name == "sigmoid") return LayerKind::sigmoid;
  if (name == "scale_shift") return LayerKind::scale_shift;
  throw std::invalid_argument("unknown layer kind '" + std::string(name) + "'");
}

std::vector<LayerSpec> mlp_layers(std::size_t in_dim, const std::vector<std::size_t>& hidden, std::size_t out_dim,
                                  LayerKind activation) {
  std::vector<LayerSpec> layers;
  std::size_t prev = in_dim;
  for (std::size_t width : hidden) {
    layers.push_back(LayerSpec::dense(prev, width));
    layers.push_back({activation, width, width, {}, {}});
    prev = width;
  }
  layers.push_back(LayerSpec::dense(prev, out_dim));
  return layers;
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  if (!(config_.learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
}

void Optimizer::begin_step(std::size_t param_count, std::span<const float> gradient) {
  if (gradient.size() != param_count) {
    throw ShapeError("gradient has " + std::to_string(gradient.size()) + " entries, network has " +
                     std::to_string(param_count) + " parameters");
  }
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    if (!std::isfinite(gradient[i])) {
      throw NonFiniteGradient("gradient entry " + std::to_string(i) + " is not finite; step refused");
    }
  }
  if (config_.kind == OptimizerKind::adam) {
    if (first_moment_.empty()) {
      first_moment_.assign(param_count, 0.0);
      second_moment_.assign(param_count, 0.0);
    } else if (first_moment_.size() != param_count) {
      throw ShapeError("optimizer state belongs to a network with " + std::to_string(first_moment_.size()) +
                       " parameters");
    }
  }
  ++steps_;
}

void Optimizer::update(std::span<float> params, std::span<const float> gradient, std::size_t offset) {
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] = static_cast<float>(params[i] - lr * gradient[i]);
    }
    return;
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = gradient[i];
    double& m = first_moment_[offset + i];
    double& v = second_moment_[offset + i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    params[i] = static_cast<float>(params[i] - lr * m_hat / (std::sqrt(v_hat) + config_.epsilon));
  }
}

void Optimizer::step(Network& net, std::span<const float> gradient) {
  begin_step(net.param_count(), gradient);
  update(net.mutable_params(), gradient, 0);
}

void Optimizer::step(FusedNet& net, std::span<const float> gradient) {
  begin_step(net.param_count(), gradient);
  const std::size_t trunk_count = net.trunk().param_count();
  update(net.trunk().mutable_params(), gradient.first(trunk_count), 0);
  update(net.head().mutable_params(), gradient.subspan(trunk_count), trunk_count);
}

}  // namespace affordmap::diffnet
