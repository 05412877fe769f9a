#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tempcast/data.hpp"
#include "tempcast/metrics.hpp"
#include "tempcast/model.hpp"
#include "tempcast/training.hpp"

namespace tempcast {

struct LinRegModel {
  std::vector<double> coefficients;  // one per window position
  double intercept = 0.0;
  Normalization normalization;
};

/// Least squares on the flattened (normalized) windows via the normal
/// equations with a small ridge term on the coefficients (not the intercept).
LinRegModel linreg_fit(const WindowedDataset& ds, double ridge_lambda = 1e-8);

/// Predictions in data units.
std::vector<double> linreg_predict(const LinRegModel& model, const WindowedDataset& ds);

/// Equivalent sequential model: Flatten → Dense(window→1, linear) → LambdaScale.
Model linreg_to_model(const LinRegModel& model);

/// Input → Conv1D(60, K=5, relu) → global average over time → Dense(30, relu)
/// → Dense(10, relu) → Dense(1) → LambdaScale.
ModelSpec cnn_only_spec(double scale = 1.0, double offset = 0.0, std::size_t window = 60);
Model build_cnn_only(std::uint64_t seed, double scale = 1.0, double offset = 0.0,
                     std::size_t window = 60);

/// Input → LSTM(60, seq) → LSTM(60) → Dense(30, relu) → Dense(10, relu) →
/// Dense(1) → LambdaScale.
ModelSpec lstm_only_spec(double scale = 1.0, double offset = 0.0, std::size_t window = 60);
Model build_lstm_only(std::uint64_t seed, double scale = 1.0, double offset = 0.0,
                      std::size_t window = 60);

enum class ModelKind { linreg, cnn, lstm, cnn_lstm };

std::string display_name(ModelKind kind);
std::string key_name(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Builds any of the three neural architectures.
Model build_model(ModelKind kind, std::uint64_t seed, const Normalization& norm,
                  std::size_t window = 60);

struct ComparisonRow {
  ModelKind kind = ModelKind::linreg;
  std::string model;
  std::vector<std::uint64_t> seeds;
  std::vector<EvalReport> runs;  // one per seed that completed
  EvalReport mean;
  EvalReport spread;  // population std over runs
  bool ok = false;
  std::string error;  // first failure, when any run failed
  std::string split_hash;
};

using CompareProgress =
    std::function<void(ModelKind kind, std::uint64_t seed, const EpochRecord& record)>;

struct CompareConfig {
  TrainConfig train;  // its seed field is replaced by each entry of `seeds`
  std::vector<std::uint64_t> seeds{0};
  double ridge_lambda = 1e-8;
  std::vector<ModelKind> models{ModelKind::linreg, ModelKind::cnn, ModelKind::lstm,
                                ModelKind::cnn_lstm};
  CompareProgress progress;
};

/// Fits or trains every requested model on `train_ds`, scores each on
/// `test_ds`, and returns rows in the order of `config.models`. A model that
/// throws is reported as failed without affecting the others.
std::vector<ComparisonRow> compare_models(const WindowedDataset& train_ds,
                                          const WindowedDataset& test_ds,
                                          const CompareConfig& config);

std::string comparison_to_json(const std::vector<ComparisonRow>& rows);

/// Aligned text table with columns Model, Variance, R2 Score, MAE.
std::string render_table(const std::vector<ComparisonRow>& rows);

}  // namespace tempcast
