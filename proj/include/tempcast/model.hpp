#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tempcast/layers.hpp"
#include "tempcast/tensor.hpp"

namespace tempcast {

/// z-score statistics; LambdaScale layers map model space back with
/// scale = std and offset = mean.
struct Normalization {
  double mean = 0.0;
  double std = 1.0;
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

/// Declarative sequential architecture over inputs of [window×features].
struct ModelSpec {
  std::string name = "custom";
  std::size_t input_window = 60;
  std::size_t input_features = 1;
  std::vector<LayerSpec> layers;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Checks that every layer accepts its predecessor's output. Returns the
/// per-sample output shape, throws ErrorCode::shape_mismatch otherwise.
Shape validate_spec(const ModelSpec& spec);

/// Input(60,1) → Conv1D(60, K=5, relu) → LSTM(60, seq) → LSTM(60) →
/// Dense(30, relu) → Dense(10, relu) → Dense(1) → LambdaScale.
ModelSpec cnn_lstm_spec(double scale = 1.0, double offset = 0.0, std::size_t window = 60);

struct LayerCount {
  std::string kind;
  Shape output_shape;  // per sample
  std::size_t params = 0;
  std::string note;
};

struct ParameterReport {
  std::vector<LayerCount> layers;
  std::size_t total = 0;
};

struct ModelGradients {
  Tensor input;
  std::vector<std::vector<Tensor>> layers;  // mirrors Model::layer(i).parameters()
};

class Model {
 public:
  /// Instantiates every layer of `spec` from `seed`; each layer gets its own
  /// derived stream so a layer's parameters do not depend on its neighbours.
  Model(ModelSpec spec, std::uint64_t seed, Normalization norm = {});
  /// Adopts already-built layers (used by deserialization and tests).
  Model(ModelSpec spec, std::vector<std::unique_ptr<Layer>> layers, std::uint64_t seed,
        Normalization norm);

  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  ~Model() = default;

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t window() const noexcept { return spec_.input_window; }
  std::uint64_t seed() const noexcept { return seed_; }
  const Normalization& normalization() const noexcept { return norm_; }
  /// Updates the stored statistics and every LambdaScale layer to match.
  void set_normalization(const Normalization& norm);

  std::map<std::string, std::string>& metadata() noexcept { return metadata_; }
  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

  std::size_t layer_count() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  /// x: [B×window×features] → [B×out]; caches activations for backward().
  Tensor forward(const Tensor& x);
  /// Reverse-mode pass through the caches of the latest forward().
  ModelGradients backward(const Tensor& grad_out) const;

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  ParameterReport count_parameters() const;
  void clear_caches();

 private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::uint64_t seed_ = 0;
  Normalization norm_;
  std::map<std::string, std::string> metadata_;
};

Model build_cnn_lstm(std::uint64_t seed, double scale = 1.0, double offset = 0.0,
                     std::size_t window = 60);

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelExtension = ".sfmodel.json";

/// Versioned JSON document with a whole-file checksum. Parameters are written
/// with shortest round-trip formatting, so a reload is bit-exact.
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace tempcast
