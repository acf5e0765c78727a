#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "affordmap/diffnet/fused.hpp"
#include "affordmap/diffnet/network.hpp"

namespace affordmap::diffnet {

enum class OptimizerKind { sgd, adam };

OptimizerKind optimizer_kind_from_string(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order optimizer over a flat parameter vector. Adam moment state is
/// sized lazily on the first step and is tied to one network thereafter.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  const OptimizerConfig& config() const { return config_; }
  std::size_t steps_taken() const { return steps_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  void step(Network& net, std::span<const float> gradient);
  void step(FusedNet& net, std::span<const float> gradient);

 private:
  void begin_step(std::size_t param_count, std::span<const float> gradient);
  void update(std::span<float> params, std::span<const float> gradient, std::size_t offset);

  OptimizerConfig config_;
  std::size_t steps_ = 0;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
};

}  // namespace affordmap::diffnet
