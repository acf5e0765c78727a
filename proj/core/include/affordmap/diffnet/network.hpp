#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "affordmap/diffnet/errors.hpp"

namespace affordmap::diffnet {

enum class LayerKind : std::uint8_t { dense, tanh, relu, sigmoid, scale_shift };

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

/// Static description of one layer. Dense layers own out_dim * in_dim weights
/// plus out_dim biases inside the network's flat parameter vector; all other
/// kinds are parameter-free. scale_shift applies a fixed elementwise affine
/// map y = scale * x + shift.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> scale;
  std::vector<double> shift;

  static LayerSpec dense(std::size_t in, std::size_t out) { return {LayerKind::dense, in, out, {}, {}}; }
  static LayerSpec tanh(std::size_t dim) { return {LayerKind::tanh, dim, dim, {}, {}}; }
  static LayerSpec relu(std::size_t dim) { return {LayerKind::relu, dim, dim, {}, {}}; }
  static LayerSpec sigmoid(std::size_t dim) { return {LayerKind::sigmoid, dim, dim, {}, {}}; }
  static LayerSpec scale_shift(std::vector<double> scale, std::vector<double> shift) {
    const std::size_t dim = scale.size();
    return {LayerKind::scale_shift, dim, dim, std::move(scale), std::move(shift)};
  }

  std::size_t param_count() const { return kind == LayerKind::dense ? out_dim * in_dim + out_dim : 0; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Builds dense/activation stacks: in -> hidden... -> out, with `activation`
/// after every hidden dense layer and nothing after the last one.
std::vector<LayerSpec> mlp_layers(std::size_t in_dim, const std::vector<std::size_t>& hidden,
                                  std::size_t out_dim, LayerKind activation = LayerKind::tanh);

namespace detail {
inline std::uint64_t next_network_identity() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

/// Forward intermediates of one batched pass. values[0] is the input and
/// values[j + 1] the output of layer j; columns are batch entries.
template <typename T>
struct Tape {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

  std::uint64_t network_identity = 0;
  std::uint64_t network_version = 0;
  std::vector<Matrix> values;

  const Matrix& output() const { return values.back(); }
  const Matrix& input() const { return values.front(); }
};

template <typename T>
struct Gradients {
  Eigen::Matrix<T, Eigen::Dynamic, 1> params;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> input;
};

/// Whether backward() should also accumulate parameter gradients. Frozen
/// networks inside a chain only need to pass input gradients through.
enum class GradMode { params_and_input, input_only };

template <typename T>
class BasicNetwork {
 public:
  using Scalar = T;
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using RowMajorMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  BasicNetwork() : identity_(detail::next_network_identity()) {}

  explicit BasicNetwork(std::vector<LayerSpec> layers)
      : layers_(std::move(layers)), identity_(detail::next_network_identity()) {
    if (layers_.empty()) throw ShapeError("network needs at least one layer");
    std::size_t offset = 0;
    for (std::size_t j = 0; j < layers_.size(); ++j) {
      const LayerSpec& l = layers_[j];
      if (l.in_dim == 0 || l.out_dim == 0) {
        throw ShapeError("layer " + std::to_string(j) + " has a zero dimension");
      }
      if (l.kind != LayerKind::dense && l.in_dim != l.out_dim) {
        throw ShapeError("activation layer " + std::to_string(j) + " must preserve its dimension");
      }
      if (l.kind == LayerKind::scale_shift && (l.scale.size() != l.in_dim || l.shift.size() != l.in_dim)) {
        throw ShapeError("scale_shift layer " + std::to_string(j) + " has mismatched scale/shift length");
      }
      if (j > 0 && layers_[j - 1].out_dim != l.in_dim) {
        throw ShapeError("layer " + std::to_string(j) + " expects input dimension " + std::to_string(l.in_dim) +
                         " but layer " + std::to_string(j - 1) + " produces " +
                         std::to_string(layers_[j - 1].out_dim));
      }
      offsets_.push_back(offset);
      offset += l.param_count();
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(offset));
  }

  BasicNetwork(const BasicNetwork& other)
      : layers_(other.layers_),
        offsets_(other.offsets_),
        params_(other.params_),
        identity_(detail::next_network_identity()) {}
  BasicNetwork& operator=(const BasicNetwork& other) {
    if (this != &other) {
      layers_ = other.layers_;
      offsets_ = other.offsets_;
      params_ = other.params_;
      identity_ = detail::next_network_identity();
      version_ = 0;
    }
    return *this;
  }
  BasicNetwork(BasicNetwork&&) noexcept = default;
  BasicNetwork& operator=(BasicNetwork&&) noexcept = default;

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t layer_count() const { return layers_.size(); }
  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim; }
  std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim; }
  std::size_t param_count() const { return static_cast<std::size_t>(params_.size()); }
  std::uint64_t identity() const { return identity_; }
  std::uint64_t version() const { return version_; }

  std::span<const T> params() const { return {params_.data(), param_count()}; }

  /// Mutable access invalidates every tape recorded so far.
  std::span<T> mutable_params() {
    ++version_;
    return {params_.data(), param_count()};
  }

  void set_params(std::span<const T> values) {
    if (values.size() != param_count()) {
      throw ShapeError("set_params: expected " + std::to_string(param_count()) + " values, got " +
                       std::to_string(values.size()));
    }
    auto dst = mutable_params();
    std::copy(values.begin(), values.end(), dst.begin());
  }

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)) for every dense weight; biases zero.
  void initialize(std::mt19937_64& rng) {
    auto p = mutable_params();
    for (std::size_t j = 0; j < layers_.size(); ++j) {
      const LayerSpec& l = layers_[j];
      if (l.kind != LayerKind::dense) continue;
      const double limit = std::sqrt(6.0 / static_cast<double>(l.in_dim + l.out_dim));
      std::uniform_real_distribution<double> dist(-limit, limit);
      T* w = p.data() + offsets_[j];
      for (std::size_t i = 0; i < l.out_dim * l.in_dim; ++i) w[i] = static_cast<T>(dist(rng));
      for (std::size_t i = 0; i < l.out_dim; ++i) w[l.out_dim * l.in_dim + i] = T(0);
    }
  }

  RowMajorMap weight(std::size_t j) const {
    const LayerSpec& l = layers_.at(j);
    return RowMajorMap(params_.data() + offsets_[j], static_cast<Eigen::Index>(l.out_dim),
                       static_cast<Eigen::Index>(l.in_dim));
  }
  Eigen::Map<const Vector> bias(std::size_t j) const {
    const LayerSpec& l = layers_.at(j);
    return Eigen::Map<const Vector>(params_.data() + offsets_[j] + l.out_dim * l.in_dim,
                                    static_cast<Eigen::Index>(l.out_dim));
  }
  std::size_t param_offset(std::size_t j) const { return offsets_.at(j); }

  /// Batched forward pass; each column of `input` is one sample.
  Tape<T> forward(const Matrix& input) const {
    if (static_cast<std::size_t>(input.rows()) != input_dim()) {
      throw ShapeError("layer 0 (" + std::string(to_string(layers_.front().kind)) + ") expects input dimension " +
                       std::to_string(input_dim()) + ", got " + std::to_string(input.rows()));
    }
    Tape<T> tape;
    tape.network_identity = identity_;
    tape.network_version = version_;
    tape.values.reserve(layers_.size() + 1);
    tape.values.push_back(input);
    for (std::size_t j = 0; j < layers_.size(); ++j) {
      tape.values.push_back(apply_layer(j, tape.values.back()));
    }
    return tape;
  }

  Vector operator()(const Vector& input) const { return forward(Matrix(input)).output().col(0); }

  /// Reverse sweep for the scalar <output, output_gradient>, summed over the batch.
  Gradients<T> backward(const Tape<T>& tape, const Matrix& output_gradient,
                        GradMode mode = GradMode::params_and_input) const {
    if (tape.network_identity != identity_) throw TapeError("tape was recorded on a different network");
    if (tape.network_version != version_) throw TapeError("tape is stale: parameters changed after forward");
    if (tape.values.size() != layers_.size() + 1) throw TapeError("tape depth does not match network");
    const Matrix& out = tape.output();
    if (output_gradient.rows() != out.rows() || output_gradient.cols() != out.cols()) {
      throw ShapeError("output gradient is " + std::to_string(output_gradient.rows()) + "x" +
                       std::to_string(output_gradient.cols()) + ", output is " + std::to_string(out.rows()) + "x" +
                       std::to_string(out.cols()));
    }
    Gradients<T> grads;
    if (mode == GradMode::params_and_input) grads.params = Vector::Zero(params_.size());
    Matrix g = output_gradient;
    for (std::size_t jj = layers_.size(); jj-- > 0;) {
      const LayerSpec& l = layers_[jj];
      const Matrix& x = tape.values[jj];
      const Matrix& y = tape.values[jj + 1];
      switch (l.kind) {
        case LayerKind::dense: {
          if (mode == GradMode::params_and_input) {
            T* dst = grads.params.data() + offsets_[jj];
            Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> dw(
                dst, static_cast<Eigen::Index>(l.out_dim), static_cast<Eigen::Index>(l.in_dim));
            dw.noalias() = g * x.transpose();
            Eigen::Map<Vector>(dst + l.out_dim * l.in_dim, static_cast<Eigen::Index>(l.out_dim)) =
                g.rowwise().sum();
          }
          Matrix gx = weight(jj).transpose() * g;
          g = std::move(gx);
          break;
        }
        case LayerKind::tanh:
          g.array() *= (T(1) - y.array().square());
          break;
        case LayerKind::sigmoid:
          g.array() *= y.array() * (T(1) - y.array());
          break;
        case LayerKind::relu:
          g.array() *= (x.array() > T(0)).template cast<T>();
          break;
        case LayerKind::scale_shift:
          for (std::size_t r = 0; r < l.in_dim; ++r) g.row(static_cast<Eigen::Index>(r)) *= static_cast<T>(l.scale[r]);
          break;
      }
    }
    grads.input = std::move(g);
    return grads;
  }

  template <typename U>
  BasicNetwork<U> cast() const {
    BasicNetwork<U> out(layers_);
    auto dst = out.mutable_params();
    for (std::size_t i = 0; i < param_count(); ++i) dst[i] = static_cast<U>(params_[static_cast<Eigen::Index>(i)]);
    return out;
  }

 private:
  Matrix apply_layer(std::size_t j, const Matrix& x) const {
    const LayerSpec& l = layers_[j];
    switch (l.kind) {
      case LayerKind::dense: {
        Matrix y = weight(j) * x;
        y.colwise() += bias(j);
        return y;
      }
      case LayerKind::tanh:
        return x.array().tanh().matrix();
      case LayerKind::sigmoid:
        return (T(1) / (T(1) + (-x.array()).exp())).matrix();
      case LayerKind::relu:
        return x.cwiseMax(T(0));
      case LayerKind::scale_shift: {
        Matrix y(x.rows(), x.cols());
        for (std::size_t r = 0; r < l.in_dim; ++r) {
          const auto ri = static_cast<Eigen::Index>(r);
          y.row(ri) = x.row(ri).array() * static_cast<T>(l.scale[r]) + static_cast<T>(l.shift[r]);
        }
        return y;
      }
    }
    return x;
  }

  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  Vector params_;
  std::uint64_t identity_ = 0;
  std::uint64_t version_ = 0;
};

using Network = BasicNetwork<float>;

}  // namespace affordmap::diffnet
