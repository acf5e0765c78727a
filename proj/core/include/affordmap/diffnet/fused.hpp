#pragma once

#include <string>
#include <utility>

#include "affordmap/diffnet/network.hpp"

namespace affordmap::diffnet {

template <typename T>
struct FusedTape {
  Tape<T> trunk;
  Tape<T> head;

  const typename Tape<T>::Matrix& output() const { return head.output(); }
};

template <typename T>
struct FusedGradients {
  Eigen::Matrix<T, Eigen::Dynamic, 1> params;  // trunk parameters, then head parameters
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> sensor;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> side;
};

/// Two-stream network: a sensor-processing trunk whose features are
/// concatenated with a side input (an action for the predictor, an affordance
/// for the proposer) and fed to the head.
///
///   sensor --trunk--> features --+
///                                +--concat--> head --> output
///   side  -----------------------+
template <typename T>
class BasicFusedNet {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  BasicFusedNet() = default;

  BasicFusedNet(BasicNetwork<T> trunk, BasicNetwork<T> head, std::size_t side_dim)
      : trunk_(std::move(trunk)), head_(std::move(head)), side_dim_(side_dim) {
    if (head_.input_dim() != trunk_.output_dim() + side_dim_) {
      throw ShapeError("head expects input dimension " + std::to_string(head_.input_dim()) + " but trunk features (" +
                       std::to_string(trunk_.output_dim()) + ") plus side input (" + std::to_string(side_dim_) +
                       ") give " + std::to_string(trunk_.output_dim() + side_dim_));
    }
  }

  std::size_t sensor_dim() const { return trunk_.input_dim(); }
  std::size_t side_dim() const { return side_dim_; }
  std::size_t output_dim() const { return head_.output_dim(); }
  std::size_t param_count() const { return trunk_.param_count() + head_.param_count(); }

  const BasicNetwork<T>& trunk() const { return trunk_; }
  const BasicNetwork<T>& head() const { return head_; }
  BasicNetwork<T>& trunk() { return trunk_; }
  BasicNetwork<T>& head() { return head_; }

  void initialize(std::mt19937_64& rng) {
    trunk_.initialize(rng);
    head_.initialize(rng);
  }

  Vector params() const {
    Vector out(static_cast<Eigen::Index>(param_count()));
    auto t = trunk_.params();
    auto h = head_.params();
    std::copy(t.begin(), t.end(), out.data());
    std::copy(h.begin(), h.end(), out.data() + t.size());
    return out;
  }

  void set_params(std::span<const T> values) {
    if (values.size() != param_count()) {
      throw ShapeError("set_params: expected " + std::to_string(param_count()) + " values, got " +
                       std::to_string(values.size()));
    }
    trunk_.set_params(values.first(trunk_.param_count()));
    head_.set_params(values.subspan(trunk_.param_count()));
  }

  FusedTape<T> forward(const Matrix& sensor, const Matrix& side) const {
    if (static_cast<std::size_t>(side.rows()) != side_dim_) {
      throw ShapeError("side input expects dimension " + std::to_string(side_dim_) + ", got " +
                       std::to_string(side.rows()));
    }
    if (side.cols() != sensor.cols()) throw ShapeError("sensor and side batch sizes differ");
    FusedTape<T> tape;
    tape.trunk = trunk_.forward(sensor);
    const Matrix& features = tape.trunk.output();
    Matrix joined(features.rows() + side.rows(), features.cols());
    joined.topRows(features.rows()) = features;
    joined.bottomRows(side.rows()) = side;
    tape.head = head_.forward(joined);
    return tape;
  }

  Vector operator()(const Vector& sensor, const Vector& side) const {
    return forward(Matrix(sensor), Matrix(side)).output().col(0);
  }

  FusedGradients<T> backward(const FusedTape<T>& tape, const Matrix& output_gradient,
                             GradMode mode = GradMode::params_and_input) const {
    Gradients<T> gh = head_.backward(tape.head, output_gradient, mode);
    const auto feature_rows = static_cast<Eigen::Index>(trunk_.output_dim());
    Matrix g_features = gh.input.topRows(feature_rows);
    Gradients<T> gt = trunk_.backward(tape.trunk, g_features, mode);
    FusedGradients<T> out;
    if (mode == GradMode::params_and_input) {
      out.params.resize(static_cast<Eigen::Index>(param_count()));
      out.params.head(gt.params.size()) = gt.params;
      out.params.tail(gh.params.size()) = gh.params;
    }
    out.sensor = std::move(gt.input);
    out.side = gh.input.bottomRows(static_cast<Eigen::Index>(side_dim_));
    return out;
  }

  template <typename U>
  BasicFusedNet<U> cast() const {
    return BasicFusedNet<U>(trunk_.template cast<U>(), head_.template cast<U>(), side_dim_);
  }

 private:
  BasicNetwork<T> trunk_;
  BasicNetwork<T> head_;
  std::size_t side_dim_ = 0;
};

using FusedNet = BasicFusedNet<float>;

}  // namespace affordmap::diffnet
