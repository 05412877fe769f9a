#include "tempcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "kernels.hpp"
#include "tempcast/error.hpp"

namespace tempcast {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "×";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

static void check_dims(const Shape& shape) {
  if (shape.empty()) fail(ErrorCode::invalid_dimension, "tensor shape must have rank >= 1");
  for (auto d : shape)
    if (d == 0)
      fail(ErrorCode::invalid_dimension,
           "tensor dimensions must be positive, got " + shape_string(shape));
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_dims(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_dims(shape_);
  if (shape_size(shape_) != data_.size())
    fail(ErrorCode::shape_mismatch, "shape " + shape_string(shape_) + " needs " +
                                        std::to_string(shape_size(shape_)) +
                                        " values, got " + std::to_string(data_.size()));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) fail(ErrorCode::shape_mismatch, "ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const Tensor& x, const char* where) {
  if (!x.all_finite())
    fail(ErrorCode::non_finite, std::string("non-finite value produced by ") + where);
}

std::string to_string(Activation kind) {
  switch (kind) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "linear") return Activation::linear;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  fail(ErrorCode::malformed_file, "unknown activation '" + name + "'");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    fail(ErrorCode::shape_mismatch, "matmul: cannot multiply " + shape_string(a.shape()) +
                                        " by " + shape_string(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  // Plain i-j-p order: every element sums its k products left to right.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      out[i * n + j] = acc;
    }
  require_finite(out, "matmul");
  return out;
}

Tensor conv1d_valid(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  if (input.rank() != 2 || kernels.rank() != 3 || bias.rank() != 1)
    fail(ErrorCode::shape_mismatch,
         "conv1d_valid: expected input [T×C_in], kernels [K×C_in×C_out], bias [C_out]; got " +
             shape_string(input.shape()) + ", " + shape_string(kernels.shape()) + ", " +
             shape_string(bias.shape()));
  const std::size_t steps = input.dim(0), channels = input.dim(1);
  const std::size_t width = kernels.dim(0), filters = kernels.dim(2);
  if (kernels.dim(1) != channels || bias.dim(0) != filters)
    fail(ErrorCode::shape_mismatch, "conv1d_valid: channel counts disagree between input " +
                                        shape_string(input.shape()) + " and kernels " +
                                        shape_string(kernels.shape()));
  if (steps < width)
    fail(ErrorCode::window_too_long, "conv1d_valid: kernel width " + std::to_string(width) +
                                         " exceeds sequence length " + std::to_string(steps));
  const std::size_t out_steps = steps - width + 1;
  Tensor out({out_steps, filters});
  for (std::size_t t = 0; t < out_steps; ++t)
    for (std::size_t f = 0; f < filters; ++f) {
      double acc = bias[f];
      for (std::size_t k = 0; k < width; ++k)
        for (std::size_t c = 0; c < channels; ++c)
          acc += input.at(t + k, c) * kernels.at(k, c, f);
      out.at(t, f) = acc;
    }
  require_finite(out, "conv1d_valid");
  return out;
}

Tensor activation(const Tensor& x, Activation kind) {
  Tensor out = x;
  for (double& v : out.values()) {
    switch (kind) {
      case Activation::linear: break;
      case Activation::relu: v = v > 0.0 ? v : 0.0; break;
      case Activation::sigmoid: v = kernels::sigmoid(v); break;
      case Activation::tanh: v = std::tanh(v); break;
    }
  }
  require_finite(out, "activation");
  return out;
}

double reduce_mean(const Tensor& x) {
  if (x.empty()) fail(ErrorCode::empty_tensor, "reduce_mean of an empty tensor");
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  const double mean = acc / static_cast<double>(x.size());
  if (!std::isfinite(mean)) fail(ErrorCode::non_finite, "reduce_mean produced a non-finite value");
  return mean;
}

}  // namespace tempcast
