#pragma once

// Independent reference computations shared by the unit and acceptance
// tests. Nothing here calls into the library's kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tempcast/layers.hpp"
#include "tempcast/model.hpp"
#include "tempcast/tensor.hpp"

namespace oracle {

using tempcast::Layer;
using tempcast::Model;
using tempcast::Shape;
using tempcast::Tensor;

inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdTolerance = 1e-6;

inline double rel_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Tensor t(shape);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct GradCheck {
  double max_rel = 0.0;
  // Worst |analytic − fd| relative to kFdTolerance·scale plus the error the
  // difference quotient itself can carry from rounding L; below 1 is a pass.
  double max_excess = 0.0;
  std::size_t checked = 0;
};

// Ulps of the objective a central difference may lose to rounding in the two
// forward passes.
inline constexpr double kObjectiveUlps = 128.0;

// Probes the scalar objective L = Σ w ⊙ f(x) by central differences for
// every input element and every parameter element, and compares against the
// analytic gradients from one backward pass with grad_out = w.
inline GradCheck check_gradients(const std::function<Tensor(const Tensor&)>& forward,
                                 const std::function<std::pair<Tensor, std::vector<Tensor>>(
                                     const Tensor&)>& backward,
                                 std::vector<Tensor*> params, Tensor x, std::mt19937_64& rng) {
  const Tensor y = forward(x);
  const Tensor w = random_tensor(y.shape(), rng);
  const auto [grad_x, grad_p] = backward(w);
  auto objective = [&](const Tensor& in) { return dot(forward(in), w); };
  double magnitude = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) magnitude += std::abs(w[i] * y[i]);
  const double roundoff =
      kObjectiveUlps * std::numeric_limits<double>::epsilon() * magnitude / (2.0 * kFdStep);

  GradCheck r;
  auto probe = [&](double& slot, double analytic, const Tensor& in) {
    const double saved = slot;
    slot = saved + kFdStep;
    const double up = objective(in);
    slot = saved - kFdStep;
    const double down = objective(in);
    slot = saved;
    const double fd = (up - down) / (2.0 * kFdStep);
    r.max_rel = std::max(r.max_rel, rel_error(analytic, fd));
    const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-8});
    r.max_excess = std::max(r.max_excess,
                            std::abs(analytic - fd) / (kFdTolerance * scale + roundoff));
    ++r.checked;
  };
  for (std::size_t i = 0; i < x.size(); ++i) probe(x[i], grad_x[i], x);
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t i = 0; i < params[p]->size(); ++i) probe((*params[p])[i], grad_p[p][i], x);
  return r;
}

inline GradCheck check_layer(Layer& layer, const Tensor& x, std::mt19937_64& rng) {
  std::vector<Tensor*> params;
  for (auto& p : layer.parameters()) params.push_back(&p);
  return check_gradients(
      [&](const Tensor& in) { return layer.forward(in); },
      [&](const Tensor& g) {
        auto lg = layer.backward(g);
        return std::pair{lg.input, lg.params};
      },
      params, x, rng);
}

inline GradCheck check_model(Model& model, const Tensor& x, std::mt19937_64& rng) {
  return check_gradients(
      [&](const Tensor& in) { return model.forward(in); },
      [&](const Tensor& g) {
        auto mg = model.backward(g);
        std::vector<Tensor> flat;
        for (auto& layer : mg.layers)
          for (auto& t : layer) flat.push_back(t);
        return std::pair{mg.input, flat};
      },
      model.parameters(), x, rng);
}

// Random non-trivial parameters; Glorot init alone leaves biases at zero.
inline void randomize(Model& model, std::mt19937_64& rng, double scale = 0.5) {
  std::normal_distribution<double> dist(0.0, scale);
  for (Tensor* p : model.parameters())
    for (auto& v : p->values()) v = dist(rng);
}

// Window 8, K=3, units 4: the CNN-LSTM stack at toy size.
inline tempcast::ModelSpec tiny_cnn_lstm(double scale = 1.7, double offset = -0.4) {
  using namespace tempcast;
  ModelSpec s;
  s.name = "tiny_cnn_lstm";
  s.input_window = 8;
  s.layers = {Conv1DSpec{1, 4, 3, Activation::relu},
              LstmSpec{4, 4, true},
              LstmSpec{4, 4, false},
              DenseSpec{4, 3, Activation::relu},
              DenseSpec{3, 2, Activation::relu},
              DenseSpec{2, 1, Activation::linear},
              LambdaScaleSpec{scale, offset}};
  return s;
}

inline tempcast::ModelSpec tiny_cnn() {
  using namespace tempcast;
  ModelSpec s;
  s.name = "tiny_cnn";
  s.input_window = 8;
  s.layers = {Conv1DSpec{1, 4, 3, Activation::relu}, GlobalAvgPoolSpec{},
              DenseSpec{4, 3, Activation::relu},     DenseSpec{3, 2, Activation::relu},
              DenseSpec{2, 1, Activation::linear},   LambdaScaleSpec{2.0, 0.0}};
  return s;
}

inline tempcast::ModelSpec tiny_lstm() {
  using namespace tempcast;
  ModelSpec s;
  s.name = "tiny_lstm";
  s.input_window = 8;
  s.layers = {LstmSpec{1, 4, true},
              LstmSpec{4, 4, false},
              DenseSpec{4, 3, Activation::relu},
              DenseSpec{3, 2, Activation::relu},
              DenseSpec{2, 1, Activation::linear},
              LambdaScaleSpec{0.8, 0.0}};
  return s;
}

// Scalar (U=1, in=1) LSTM written out longhand.
struct ScalarLstm {
  double wi, wf, wg, wo;  // input weights
  double ri, rf, rg, ro;  // recurrent weights
  double bi, bf, bg, bo;

  double run(const std::vector<double>& xs) const {
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    double h = 0.0, c = 0.0;
    for (double x : xs) {
      const double i = sig(wi * x + ri * h + bi);
      const double f = sig(wf * x + rf * h + bf);
      const double g = std::tanh(wg * x + rg * h + bg);
      const double o = sig(wo * x + ro * h + bo);
      c = f * c + i * g;
      h = o * std::tanh(c);
    }
    return h;
  }
};

// Two-pass population variance.
inline double variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size());
}

inline double r2(const std::vector<double>& pred, const std::vector<double>& target) {
  double mean = 0.0;
  for (double t : target) mean += t;
  mean /= static_cast<double>(target.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    ss_res += (target[i] - pred[i]) * (target[i] - pred[i]);
    ss_tot += (target[i] - mean) * (target[i] - mean);
  }
  return 1.0 - ss_res / ss_tot;
}

inline double explained_variance(const std::vector<double>& pred,
                                 const std::vector<double>& target) {
  std::vector<double> resid(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) resid[i] = target[i] - pred[i];
  return 1.0 - variance(resid) / variance(target);
}

// Least squares with intercept via the SVD pseudo-inverse of [X | 1].
// Returns coefficients followed by the intercept.
inline std::vector<double> pinv_lstsq(const std::vector<std::vector<double>>& rows,
                                      const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd a(n, d + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    a(i, d) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const double cutoff = 1e-12 * s(0);
  Eigen::VectorXd inv = s;
  for (Eigen::Index i = 0; i < s.size(); ++i) inv(i) = s(i) > cutoff ? 1.0 / s(i) : 0.0;
  const Eigen::VectorXd x = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * b;
  return {x.data(), x.data() + x.size()};
}

}  // namespace oracle
