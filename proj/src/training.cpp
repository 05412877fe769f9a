#include "tempcast/training.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "tempcast/error.hpp"

namespace tempcast {

namespace {

constexpr std::size_t kPredictChunk = 256;

void validate(const TrainConfig& c, std::size_t dataset_size) {
  if (c.epochs < 1) fail(ErrorCode::invalid_config, "epochs must be at least 1");
  if (!(c.adam.learning_rate >= 0.0) || !std::isfinite(c.adam.learning_rate))
    fail(ErrorCode::invalid_config, "learning rate must be finite and non-negative");
  if (!(c.adam.beta1 >= 0.0 && c.adam.beta1 < 1.0 && c.adam.beta2 >= 0.0 && c.adam.beta2 < 1.0))
    fail(ErrorCode::invalid_config, "Adam betas must lie in [0, 1)");
  if (!(c.adam.epsilon > 0.0)) fail(ErrorCode::invalid_config, "Adam epsilon must be positive");
  if (c.batch_size < 1 || c.batch_size > dataset_size)
    fail(ErrorCode::invalid_config, "batch size " + std::to_string(c.batch_size) +
                                        " must lie in [1, " + std::to_string(dataset_size) + "]");
  if (c.patience && *c.patience == 0)
    fail(ErrorCode::invalid_config, "early-stop patience must be at least 1");
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

LossResult mae_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape() || pred.rank() != 2 || pred.dim(1) != 1)
    fail(ErrorCode::shape_mismatch, "mae_loss needs matching [B×1] tensors, got " +
                                        shape_string(pred.shape()) + " and " +
                                        shape_string(target.shape()));
  const std::size_t n = pred.dim(0);
  LossResult r{mae(pred.values(), target.values()), Tensor(pred.shape())};
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - target[i];
    r.grad[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
  }
  return r;
}

AdamState make_adam_state(std::span<const Tensor* const> params) {
  AdamState s;
  for (const Tensor* p : params) {
    s.m.emplace_back(p->shape());
    s.v.emplace_back(p->shape());
  }
  return s;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state, std::size_t t, const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
    fail(ErrorCode::layout_mismatch, "adam_step: parameter, gradient and moment lists differ in length");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i]->shape() != grads[i]->shape() || params[i]->shape() != state.m[i].shape() ||
        params[i]->shape() != state.v[i].shape())
      fail(ErrorCode::layout_mismatch, "adam_step: tensor " + std::to_string(i) +
                                           " has shape " + shape_string(params[i]->shape()) +
                                           " but its gradient is " +
                                           shape_string(grads[i]->shape()));
  if (t < 1) fail(ErrorCode::invalid_config, "adam_step: step index starts at 1");

  const double b1 = config.beta1, b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data();
    const double* g = grads[i]->data();
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    for (std::size_t k = 0; k < params[i]->size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

std::vector<double> predict(Model& model, const WindowedDataset& ds) {
  if (ds.window() != model.window())
    fail(ErrorCode::shape_mismatch, "dataset window " + std::to_string(ds.window()) +
                                        " does not match model window " +
                                        std::to_string(model.window()));
  std::vector<double> out;
  out.reserve(ds.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < ds.size(); start += kPredictChunk) {
    const std::size_t end = std::min(ds.size(), start + kPredictChunk);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor y = model.forward(subset(ds, idx).inputs);
    if (y.rank() != 2 || y.dim(1) != 1)
      fail(ErrorCode::shape_mismatch, "forecasting model must emit [B×1], got " + shape_string(y.shape()));
    out.insert(out.end(), y.values().begin(), y.values().end());
  }
  model.clear_caches();
  return out;
}

EvalReport evaluate(Model& model, const WindowedDataset& ds) {
  const auto pred = predict(model, ds);
  return score(pred, ds.targets_in_data_units());
}

TrainHistory train(Model& model, const WindowedDataset& train_ds, const WindowedDataset& val_ds,
                   const TrainConfig& config, const EpochCallback& on_epoch) {
  validate(config, train_ds.size());
  if (train_ds.window() != model.window() || val_ds.window() != model.window())
    fail(ErrorCode::shape_mismatch, "dataset windows must match the model input window " +
                                        std::to_string(model.window()));

  const auto params = model.parameters();
  AdamState state = make_adam_state(std::vector<const Tensor*>(params.begin(), params.end()));
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_ds.size());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  const auto started = std::chrono::steady_clock::now();
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    auto numeric_failure = [&](const std::string& what) {
      fail(ErrorCode::non_finite_loss, "non-finite " + what + " in epoch " + std::to_string(epoch));
    };
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double abs_error_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const WindowedDataset batch = subset(train_ds, idx);
      Tensor target(batch.targets.shape());
      const auto target_units = batch.targets_in_data_units();
      std::copy(target_units.begin(), target_units.end(), target.data());

      Tensor pred;
      try {
        pred = model.forward(batch.inputs);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::non_finite) numeric_failure("model output");
        throw;
      }
      const LossResult loss = mae_loss(pred, target);
      if (!std::isfinite(loss.loss)) numeric_failure("training loss");
      const ModelGradients grads = model.backward(loss.grad);

      std::vector<const Tensor*> flat;
      for (const auto& layer : grads.layers)
        for (const auto& g : layer) flat.push_back(&g);
      ++history.optimizer_steps;
      adam_step(params, flat, state, history.optimizer_steps, config.adam);
      abs_error_sum += loss.loss * static_cast<double>(idx.size());
    }
    model.clear_caches();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mae = abs_error_sum / static_cast<double>(order.size());
    try {
      rec.val_mae = evaluate(model, val_ds).mae;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::non_finite) numeric_failure("validation output");
      throw;
    }
    if (!std::isfinite(rec.train_mae) || !std::isfinite(rec.val_mae))
      numeric_failure("epoch loss");
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (config.patience) {
      if (rec.val_mae < best_val) {
        best_val = rec.val_mae;
        since_best = 0;
      } else if (++since_best >= *config.patience) {
        history.stopped_early = true;
        break;
      }
    }
  }
  return history;
}

CurveWriter::CurveWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) fail(ErrorCode::io_error, "cannot write curve file " + path.string());
  out_ << "epoch,train_mae,val_mae\n" << std::flush;
}

void CurveWriter::append(const EpochRecord& r) {
  out_ << r.epoch << ',' << format_double(r.train_mae) << ',' << format_double(r.val_mae) << '\n'
       << std::flush;
}

}  // namespace tempcast
