#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tempcast {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles with an explicit shape.
///
/// A Tensor is a plain value: copying copies the storage. Every dimension is
/// positive and `size() == shape_size(shape())` always holds.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  /// Rank-2 literal, handy in tests: Tensor::matrix({{1, 2}, {3, 4}}).
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }
  const double* data() const noexcept { return data_.data(); }
  double* data() noexcept { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  /// Same storage, new shape with equal element count.
  Tensor reshaped(Shape shape) const;

  void fill(double value);
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

enum class Activation { linear, relu, sigmoid, tanh };

std::string to_string(Activation kind);
Activation activation_from_string(const std::string& name);

/// a[m×k] · b[k×n]; each output element accumulates k in ascending order.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Valid (unpadded, stride 1) cross-correlation of input[T×C_in] with
/// kernels[K×C_in×C_out]; returns [(T−K+1)×C_out].
Tensor conv1d_valid(const Tensor& input, const Tensor& kernels, const Tensor& bias);

Tensor activation(const Tensor& x, Activation kind);

double reduce_mean(const Tensor& x);

/// Throws ErrorCode::non_finite naming `where` when any element is NaN/Inf.
void require_finite(const Tensor& x, const char* where);

}  // namespace tempcast
