#include "tempcast/baselines.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tempcast/error.hpp"
#include "tempcast/hash.hpp"

namespace tempcast {

LinRegModel linreg_fit(const WindowedDataset& ds, double ridge_lambda) {
  const std::size_t rows = ds.size(), features = ds.window();
  if (rows <= features)
    fail(ErrorCode::underdetermined_system,
         "linear regression needs more windows than features: have " + std::to_string(rows) +
             " windows for " + std::to_string(features) + " features");
  if (!(ridge_lambda >= 0.0)) fail(ErrorCode::invalid_config, "ridge lambda must be non-negative");

  const auto n = static_cast<Eigen::Index>(rows);
  const auto p = static_cast<Eigen::Index>(features);
  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j)
      x(i, j) = ds.inputs[static_cast<std::size_t>(i * p + j)];
    x(i, p) = 1.0;
    y(i) = ds.targets[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().head(p).array() += ridge_lambda;
  const Eigen::VectorXd rhs = x.transpose() * y;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    fail(ErrorCode::underdetermined_system, "normal equations could not be factorized");
  const Eigen::VectorXd beta = ldlt.solve(rhs);
  if (!beta.allFinite())
    fail(ErrorCode::underdetermined_system, "normal equations are singular");

  LinRegModel m;
  m.coefficients.assign(beta.data(), beta.data() + p);
  m.intercept = beta(p);
  m.normalization = ds.normalization;
  return m;
}

std::vector<double> linreg_predict(const LinRegModel& model, const WindowedDataset& ds) {
  const std::size_t w = model.coefficients.size();
  if (ds.window() != w)
    fail(ErrorCode::shape_mismatch, "dataset window " + std::to_string(ds.window()) +
                                        " does not match regression width " + std::to_string(w));
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double acc = model.intercept;
    for (std::size_t j = 0; j < w; ++j) acc += ds.inputs[i * w + j] * model.coefficients[j];
    out[i] = acc * model.normalization.std + model.normalization.mean;
  }
  return out;
}

Model linreg_to_model(const LinRegModel& lr) {
  const std::size_t w = lr.coefficients.size();
  ModelSpec spec;
  spec.name = "linreg";
  spec.input_window = w;
  spec.input_features = 1;
  spec.layers = {FlattenSpec{}, DenseSpec{w, 1, Activation::linear},
                 LambdaScaleSpec{lr.normalization.std, lr.normalization.mean}};
  std::vector<std::unique_ptr<Layer>> layers;
  layers.push_back(std::make_unique<FlattenLayer>());
  layers.push_back(std::make_unique<DenseLayer>(Tensor({w, 1}, lr.coefficients),
                                                Tensor({1}, {lr.intercept}), Activation::linear));
  layers.push_back(
      std::make_unique<LambdaScaleLayer>(lr.normalization.std, lr.normalization.mean));
  Model m(std::move(spec), std::move(layers), 0, lr.normalization);
  m.metadata()["builder"] = "linreg";
  return m;
}

ModelSpec cnn_only_spec(double scale, double offset, std::size_t window) {
  ModelSpec spec;
  spec.name = "cnn";
  spec.input_window = window;
  spec.layers = {
      Conv1DSpec{1, 60, 5, Activation::relu},
      GlobalAvgPoolSpec{},
      DenseSpec{60, 30, Activation::relu},
      DenseSpec{30, 10, Activation::relu},
      DenseSpec{10, 1, Activation::linear},
      LambdaScaleSpec{scale, offset},
  };
  return spec;
}

Model build_cnn_only(std::uint64_t seed, double scale, double offset, std::size_t window) {
  Model m(cnn_only_spec(scale, offset, window), seed, Normalization{offset, scale});
  m.metadata()["builder"] = "cnn";
  return m;
}

ModelSpec lstm_only_spec(double scale, double offset, std::size_t window) {
  ModelSpec spec;
  spec.name = "lstm";
  spec.input_window = window;
  spec.layers = {
      LstmSpec{1, 60, true},
      LstmSpec{60, 60, false},
      DenseSpec{60, 30, Activation::relu},
      DenseSpec{30, 10, Activation::relu},
      DenseSpec{10, 1, Activation::linear},
      LambdaScaleSpec{scale, offset},
  };
  return spec;
}

Model build_lstm_only(std::uint64_t seed, double scale, double offset, std::size_t window) {
  Model m(lstm_only_spec(scale, offset, window), seed, Normalization{offset, scale});
  m.metadata()["builder"] = "lstm";
  return m;
}

std::string display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::linreg: return "Linear Regression";
    case ModelKind::cnn: return "CNN";
    case ModelKind::lstm: return "LSTM";
    case ModelKind::cnn_lstm: return "CNN-LSTM";
  }
  return "?";
}

std::string key_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::linreg: return "linreg";
    case ModelKind::cnn: return "cnn";
    case ModelKind::lstm: return "lstm";
    case ModelKind::cnn_lstm: return "cnn-lstm";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (auto k : {ModelKind::linreg, ModelKind::cnn, ModelKind::lstm, ModelKind::cnn_lstm})
    if (name == key_name(k)) return k;
  if (name == "cnn_lstm") return ModelKind::cnn_lstm;
  fail(ErrorCode::invalid_config, "unknown model '" + name + "' (expected linreg, cnn, lstm or cnn-lstm)");
}

Model build_model(ModelKind kind, std::uint64_t seed, const Normalization& norm,
                  std::size_t window) {
  switch (kind) {
    case ModelKind::cnn: return build_cnn_only(seed, norm.std, norm.mean, window);
    case ModelKind::lstm: return build_lstm_only(seed, norm.std, norm.mean, window);
    case ModelKind::cnn_lstm: return build_cnn_lstm(seed, norm.std, norm.mean, window);
    case ModelKind::linreg: break;
  }
  fail(ErrorCode::invalid_config, "linear regression is fitted, not built; use linreg_fit");
}

namespace {

void summarize(ComparisonRow& row) {
  const double n = static_cast<double>(row.runs.size());
  if (row.runs.empty()) return;
  EvalReport mean{}, spread{};
  for (const auto& r : row.runs) {
    mean.variance += r.variance;
    mean.r2 += r.r2;
    mean.mae += r.mae;
  }
  mean.variance /= n;
  mean.r2 /= n;
  mean.mae /= n;
  for (const auto& r : row.runs) {
    spread.variance += (r.variance - mean.variance) * (r.variance - mean.variance);
    spread.r2 += (r.r2 - mean.r2) * (r.r2 - mean.r2);
    spread.mae += (r.mae - mean.mae) * (r.mae - mean.mae);
  }
  spread.variance = std::sqrt(spread.variance / n);
  spread.r2 = std::sqrt(spread.r2 / n);
  spread.mae = std::sqrt(spread.mae / n);
  row.mean = mean;
  row.spread = spread;
}

}  // namespace

std::vector<ComparisonRow> compare_models(const WindowedDataset& train_ds,
                                          const WindowedDataset& test_ds,
                                          const CompareConfig& config) {
  if (config.seeds.empty()) fail(ErrorCode::invalid_config, "at least one seed is required");
  if (!(train_ds.normalization == test_ds.normalization))
    fail(ErrorCode::invalid_config, "train and test windows must share normalization statistics");
  const std::string split_hash = sha256_hex(train_ds.content_hash() + test_ds.content_hash());

  std::vector<ComparisonRow> rows;
  for (ModelKind kind : config.models) {
    ComparisonRow row;
    row.kind = kind;
    row.model = display_name(kind);
    row.split_hash = split_hash;
    // The regression fit is deterministic, so it is scored once.
    const std::vector<std::uint64_t> seeds =
        kind == ModelKind::linreg ? std::vector<std::uint64_t>{config.seeds.front()} : config.seeds;
    for (std::uint64_t seed : seeds) {
      try {
        Model model = kind == ModelKind::linreg
                          ? linreg_to_model(linreg_fit(train_ds, config.ridge_lambda))
                          : build_model(kind, seed, train_ds.normalization, train_ds.window());
        if (kind != ModelKind::linreg) {
          TrainConfig tc = config.train;
          tc.seed = seed;
          EpochCallback cb;
          if (config.progress)
            cb = [&](const EpochRecord& r) { config.progress(kind, seed, r); };
          train(model, train_ds, test_ds, tc, cb);
        }
        row.runs.push_back(evaluate(model, test_ds));
        row.seeds.push_back(seed);
      } catch (const std::exception& e) {
        if (row.error.empty()) row.error = "seed " + std::to_string(seed) + ": " + e.what();
      }
    }
    row.ok = !row.runs.empty();
    summarize(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comparison_to_json(const std::vector<ComparisonRow>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["model"] = r.model;
    j["status"] = r.ok ? "ok" : "failed";
    j["variance"] = r.ok ? nlohmann::ordered_json(r.mean.variance) : nlohmann::ordered_json(nullptr);
    j["r2"] = r.ok ? nlohmann::ordered_json(r.mean.r2) : nlohmann::ordered_json(nullptr);
    j["mae"] = r.ok ? nlohmann::ordered_json(r.mean.mae) : nlohmann::ordered_json(nullptr);
    if (r.runs.size() > 1) {
      j["variance_spread"] = r.spread.variance;
      j["r2_spread"] = r.spread.r2;
      j["mae_spread"] = r.spread.mae;
    }
    j["seeds"] = r.seeds;
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& run : r.runs)
      runs.push_back({{"variance", run.variance}, {"r2", run.r2}, {"mae", run.mae}});
    j["runs"] = runs;
    if (!r.error.empty()) j["error"] = r.error;
    j["split_hash"] = r.split_hash;
    out.push_back(std::move(j));
  }
  return out.dump(2);
}

std::string render_table(const std::vector<ComparisonRow>& rows) {
  bool multi = false;
  for (const auto& r : rows) multi = multi || r.runs.size() > 1;
  auto cell = [&](const ComparisonRow& r, double mean, double spread) {
    char buf[64];
    if (!r.ok) return std::string("failed");
    if (multi && r.runs.size() > 1)
      std::snprintf(buf, sizeof buf, "%.3f ± %.3f", mean, spread);
    else
      std::snprintf(buf, sizeof buf, "%.3f", mean);
    return std::string(buf);
  };
  std::vector<std::array<std::string, 4>> table{{"Model", "Variance", "R2 Score", "MAE"}};
  for (const auto& r : rows)
    table.push_back({r.model, cell(r, r.mean.variance, r.spread.variance),
                     cell(r, r.mean.r2, r.spread.r2), cell(r, r.mean.mae, r.spread.mae)});

  // Display width: count UTF-8 code points, not bytes ("±" is two bytes).
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::array<std::size_t, 4> widths{};
  for (const auto& row : table)
    for (std::size_t c = 0; c < 4; ++c) widths[c] = std::max(widths[c], width(row[c]));
  std::string out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) {
      const auto& s = table[i][c];
      const std::string pad(widths[c] - width(s), ' ');
      out += c == 0 ? s + pad : "  " + pad + s;
    }
    out += '\n';
    if (i == 0) {
      std::size_t total = widths[0];
      for (std::size_t c = 1; c < 4; ++c) total += 2 + widths[c];
      out += std::string(total, '-') + '\n';
    }
  }
  for (const auto& r : rows)
    if (!r.ok) out += r.model + " failed: " + r.error + '\n';
  return out;
}

}  // namespace tempcast
