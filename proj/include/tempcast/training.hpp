#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tempcast/data.hpp"
#include "tempcast/metrics.hpp"
#include "tempcast/model.hpp"
#include "tempcast/tensor.hpp"

namespace tempcast {

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d pred
};

/// Mean absolute error over a [B×1] batch. The subgradient of |x| at 0 is 0.
LossResult mae_loss(const Tensor& pred, const Tensor& target);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// Zero moments laid out like `params`.
AdamState make_adam_state(std::span<const Tensor* const> params);

/// One bias-corrected Adam update at step `t` (1-based).
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state, std::size_t t, const AdamConfig& config);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  AdamConfig adam;
  std::uint64_t seed = 0;
  bool shuffle = true;
  std::optional<std::size_t> patience;  // early stop after this many epochs without val gain
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_mae = 0.0;
  double val_mae = 0.0;
  double wall_time = 0.0;  // seconds since training started
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t optimizer_steps = 0;
  bool stopped_early = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam on the MAE loss. Losses are measured in data units: the
/// model's LambdaScale output is compared with denormalized targets. The
/// callback fires after every completed epoch.
TrainHistory train(Model& model, const WindowedDataset& train_ds, const WindowedDataset& val_ds,
                   const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Model outputs for every window, in data units.
std::vector<double> predict(Model& model, const WindowedDataset& ds);

EvalReport evaluate(Model& model, const WindowedDataset& ds);

/// Appends `epoch,train_mae,val_mae` rows, flushing each so the file can be tailed.
class CurveWriter {
 public:
  explicit CurveWriter(const std::filesystem::path& path);
  void append(const EpochRecord& record);

 private:
  std::ofstream out_;
};

}  // namespace tempcast
