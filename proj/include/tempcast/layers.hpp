#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tempcast/tensor.hpp"

namespace tempcast {

// Layer hyperparameters. Shapes below are per sample; every layer also
// carries a leading batch dimension at runtime.

struct Conv1DSpec {
  std::size_t in_channels = 1;
  std::size_t filters = 60;
  std::size_t kernel_size = 5;
  Activation activation = Activation::relu;
  friend bool operator==(const Conv1DSpec&, const Conv1DSpec&) = default;
};

struct LstmSpec {
  std::size_t inputs = 60;
  std::size_t units = 60;
  bool return_sequences = true;
  friend bool operator==(const LstmSpec&, const LstmSpec&) = default;
};

struct DenseSpec {
  std::size_t inputs = 60;
  std::size_t units = 30;
  Activation activation = Activation::relu;
  friend bool operator==(const DenseSpec&, const DenseSpec&) = default;
};

/// Fixed affine map `scale·x + offset`; used to denormalize predictions.
struct LambdaScaleSpec {
  double scale = 1.0;
  double offset = 0.0;
  friend bool operator==(const LambdaScaleSpec&, const LambdaScaleSpec&) = default;
};

/// Mean over the time axis: [T×C] → [C].
struct GlobalAvgPoolSpec {
  friend bool operator==(const GlobalAvgPoolSpec&, const GlobalAvgPoolSpec&) = default;
};

/// Collapse all per-sample axes: [d0×d1×…] → [d0·d1·…].
struct FlattenSpec {
  friend bool operator==(const FlattenSpec&, const FlattenSpec&) = default;
};

using LayerSpec =
    std::variant<Conv1DSpec, LstmSpec, DenseSpec, LambdaScaleSpec, GlobalAvgPoolSpec, FlattenSpec>;

std::string layer_kind(const LayerSpec& spec);

/// Parameter count implied by a spec, without instantiating it.
std::size_t parameter_count(const LayerSpec& spec);

/// Per-sample output shape for a per-sample input shape; throws
/// ErrorCode::shape_mismatch (or window_too_long) when the layer cannot accept it.
Shape output_shape(const LayerSpec& spec, const Shape& input);

struct LayerGradients {
  Tensor input;
  std::vector<Tensor> params;  // same order and shapes as Layer::parameters()
};

/// A layer owns its parameters plus the activations cached by the most recent
/// forward call. backward() reads that cache and is only valid after forward().
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerSpec spec() const = 0;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual LayerGradients backward(const Tensor& grad_out) const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  std::span<Tensor> parameters() noexcept { return params_; }
  std::span<const Tensor> parameters() const noexcept { return params_; }
  std::size_t parameter_count() const;

  bool has_cache() const noexcept { return cached_; }
  virtual void clear_cache() { cached_ = false; }

 protected:
  void require_cache(const char* name, const Shape& grad_shape) const;

  std::vector<Tensor> params_;
  bool cached_ = false;
  Shape cached_out_shape_;
};

/// Builds a layer with Glorot-uniform weights, zero biases and LSTM forget
/// gate bias 1. The same (spec, seed) pair always yields identical parameters.
std::unique_ptr<Layer> init_layer(const LayerSpec& spec, std::uint64_t seed);

class Conv1DLayer final : public Layer {
 public:
  /// kernels [K×C_in×F], bias [F]
  Conv1DLayer(Tensor kernels, Tensor bias, Activation act = Activation::relu);

  LayerSpec spec() const override;
  Tensor forward(const Tensor& x) override;
  LayerGradients backward(const Tensor& grad_out) const override;
  std::unique_ptr<Layer> clone() const override;
  void clear_cache() override;

 private:
  Activation act_;
  Tensor input_;
  Tensor output_;
};

/// Forget-gate LSTM, gate blocks ordered [input, forget, candidate, output]
/// along the 4U axis of every parameter.
class LstmLayer final : public Layer {
 public:
  /// input_weights [in×4U], recurrent_weights [U×4U], bias [4U]
  LstmLayer(Tensor input_weights, Tensor recurrent_weights, Tensor bias, bool return_sequences);

  LayerSpec spec() const override;
  Tensor forward(const Tensor& x) override;
  LayerGradients backward(const Tensor& grad_out) const override;
  std::unique_ptr<Layer> clone() const override;
  void clear_cache() override;

  std::size_t units() const noexcept { return units_; }

 private:
  std::size_t inputs_;
  std::size_t units_;
  bool return_sequences_;
  // Cache, batch-major: gates_[b][t][4U] post-activation, cells_/cell_tanh_/hidden_ [b][t][U].
  Tensor input_;
  std::vector<double> gates_;
  std::vector<double> cells_;
  std::vector<double> cell_tanh_;
  std::vector<double> hidden_;
  std::size_t batch_ = 0;
  std::size_t steps_ = 0;
};

class DenseLayer final : public Layer {
 public:
  /// weights [in×out], bias [out]
  DenseLayer(Tensor weights, Tensor bias, Activation act);

  LayerSpec spec() const override;
  Tensor forward(const Tensor& x) override;
  LayerGradients backward(const Tensor& grad_out) const override;
  std::unique_ptr<Layer> clone() const override;
  void clear_cache() override;

 private:
  Activation act_;
  Tensor input_;
  Tensor output_;
};

class LambdaScaleLayer final : public Layer {
 public:
  LambdaScaleLayer(double scale, double offset);

  LayerSpec spec() const override;
  Tensor forward(const Tensor& x) override;
  LayerGradients backward(const Tensor& grad_out) const override;
  std::unique_ptr<Layer> clone() const override;

  double scale() const noexcept { return scale_; }
  double offset() const noexcept { return offset_; }
  /// (y − offset) / scale
  Tensor inverse(const Tensor& y) const;

 private:
  double scale_;
  double offset_;
};

class GlobalAvgPoolLayer final : public Layer {
 public:
  LayerSpec spec() const override;
  Tensor forward(const Tensor& x) override;
  LayerGradients backward(const Tensor& grad_out) const override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Shape input_shape_;
};

class FlattenLayer final : public Layer {
 public:
  LayerSpec spec() const override;
  Tensor forward(const Tensor& x) override;
  LayerGradients backward(const Tensor& grad_out) const override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Shape input_shape_;
};

}  // namespace tempcast
