#include "tempcast/model.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tempcast/error.hpp"
#include "tempcast/hash.hpp"

namespace tempcast {

using json = nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// splitmix64 finalizer; gives each layer an independent, reproducible stream.
std::uint64_t layer_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Shape input_shape(const ModelSpec& spec) { return {spec.input_window, spec.input_features}; }

}  // namespace

Shape validate_spec(const ModelSpec& spec) {
  if (spec.input_window == 0 || spec.input_features == 0)
    fail(ErrorCode::invalid_dimension, "model input window and feature count must be positive");
  if (spec.layers.empty()) fail(ErrorCode::invalid_dimension, "model spec has no layers");
  Shape shape = input_shape(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    try {
      shape = output_shape(spec.layers[i], shape);
    } catch (const Error& e) {
      fail(e.code(), "layer " + std::to_string(i) + ": " + e.what());
    }
  }
  return shape;
}

ModelSpec cnn_lstm_spec(double scale, double offset, std::size_t window) {
  ModelSpec spec;
  spec.name = "cnn_lstm";
  spec.input_window = window;
  spec.input_features = 1;
  spec.layers = {
      Conv1DSpec{1, 60, 5, Activation::relu},
      LstmSpec{60, 60, true},
      LstmSpec{60, 60, false},
      DenseSpec{60, 30, Activation::relu},
      DenseSpec{30, 10, Activation::relu},
      DenseSpec{10, 1, Activation::linear},
      LambdaScaleSpec{scale, offset},
  };
  return spec;
}

Model::Model(ModelSpec spec, std::uint64_t seed, Normalization norm)
    : spec_(std::move(spec)), seed_(seed), norm_(norm) {
  validate_spec(spec_);
  layers_.reserve(spec_.layers.size());
  for (std::size_t i = 0; i < spec_.layers.size(); ++i)
    layers_.push_back(init_layer(spec_.layers[i], layer_seed(seed, i)));
}

Model::Model(ModelSpec spec, std::vector<std::unique_ptr<Layer>> layers, std::uint64_t seed,
             Normalization norm)
    : spec_(std::move(spec)), layers_(std::move(layers)), seed_(seed), norm_(norm) {
  validate_spec(spec_);
  if (layers_.size() != spec_.layers.size())
    fail(ErrorCode::layout_mismatch, "model has " + std::to_string(layers_.size()) +
                                         " layers but its spec lists " +
                                         std::to_string(spec_.layers.size()));
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (!(layers_[i]->spec() == spec_.layers[i]))
      fail(ErrorCode::layout_mismatch, "layer " + std::to_string(i) + " (" +
                                           layer_kind(layers_[i]->spec()) +
                                           ") does not match its spec entry");
}

Model::Model(const Model& other)
    : spec_(other.spec_), seed_(other.seed_), norm_(other.norm_), metadata_(other.metadata_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    Model copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Model::set_normalization(const Normalization& norm) {
  norm_ = norm;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (std::holds_alternative<LambdaScaleSpec>(spec_.layers[i])) {
      LambdaScaleSpec s{norm.std, norm.mean};
      layers_[i] = std::make_unique<LambdaScaleLayer>(s.scale, s.offset);
      spec_.layers[i] = s;
    }
  }
}

Tensor Model::forward(const Tensor& x) {
  if (x.rank() != 3 || x.dim(1) != spec_.input_window || x.dim(2) != spec_.input_features)
    fail(ErrorCode::shape_mismatch,
         "model expects input [B×" + std::to_string(spec_.input_window) + "×" +
             std::to_string(spec_.input_features) + "], got " + shape_string(x.shape()));
  Tensor h = layers_.front()->forward(x);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h);
  require_finite(h, "model forward");
  return h;
}

ModelGradients Model::backward(const Tensor& grad_out) const {
  ModelGradients grads;
  grads.layers.resize(layers_.size());
  Tensor g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    LayerGradients lg = layers_[i]->backward(g);
    grads.layers[i] = std::move(lg.params);
    g = std::move(lg.input);
  }
  grads.input = std::move(g);
  return grads;
}

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (auto& p : l->parameters()) out.push_back(&p);
  return out;
}

std::vector<const Tensor*> Model::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_)
    for (const auto& p : l->parameters()) out.push_back(&p);
  return out;
}

ParameterReport Model::count_parameters() const {
  ParameterReport report;
  Shape shape = input_shape(spec_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    LayerCount row;
    row.kind = layer_kind(spec_.layers[i]);
    shape = output_shape(spec_.layers[i], shape);
    row.output_shape = shape;
    row.params = layers_[i]->parameter_count();
    if (const auto* lstm = std::get_if<LstmSpec>(&spec_.layers[i]);
        lstm && lstm->inputs == 60 && lstm->units == 60) {
      row.note =
          "4*(in*U + U*U + U) = 29040 for the standard four-gate cell; the often quoted "
          "24840 for this layer is not produced by any standard LSTM over these dimensions";
    }
    report.total += row.params;
    report.layers.push_back(std::move(row));
  }
  return report;
}

void Model::clear_caches() {
  for (auto& l : layers_) l->clear_cache();
}

Model build_cnn_lstm(std::uint64_t seed, double scale, double offset, std::size_t window) {
  Model m(cnn_lstm_spec(scale, offset, window), seed, Normalization{offset, scale});
  m.metadata()["builder"] = "cnn_lstm";
  return m;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json layer_to_json(const LayerSpec& spec) {
  json j = std::visit(
      overloaded{
          [](const Conv1DSpec& s) {
            return json{{"in_channels", s.in_channels},
                        {"filters", s.filters},
                        {"kernel_size", s.kernel_size},
                        {"activation", to_string(s.activation)}};
          },
          [](const LstmSpec& s) {
            return json{{"inputs", s.inputs},
                        {"units", s.units},
                        {"return_sequences", s.return_sequences}};
          },
          [](const DenseSpec& s) {
            return json{{"inputs", s.inputs},
                        {"units", s.units},
                        {"activation", to_string(s.activation)}};
          },
          [](const LambdaScaleSpec& s) { return json{{"scale", s.scale}, {"offset", s.offset}}; },
          [](const auto&) { return json::object(); },
      },
      spec);
  j["kind"] = layer_kind(spec);
  return j;
}

LayerSpec layer_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "conv1d")
    return Conv1DSpec{j.at("in_channels").get<std::size_t>(), j.at("filters").get<std::size_t>(),
                      j.at("kernel_size").get<std::size_t>(),
                      activation_from_string(j.at("activation").get<std::string>())};
  if (kind == "lstm")
    return LstmSpec{j.at("inputs").get<std::size_t>(), j.at("units").get<std::size_t>(),
                    j.at("return_sequences").get<bool>()};
  if (kind == "dense")
    return DenseSpec{j.at("inputs").get<std::size_t>(), j.at("units").get<std::size_t>(),
                     activation_from_string(j.at("activation").get<std::string>())};
  if (kind == "lambda_scale")
    return LambdaScaleSpec{j.at("scale").get<double>(), j.at("offset").get<double>()};
  if (kind == "global_avg_pool") return GlobalAvgPoolSpec{};
  if (kind == "flatten") return FlattenSpec{};
  fail(ErrorCode::malformed_file, "unknown layer kind '" + kind + "'");
}

json tensor_to_json(const Tensor& t) {
  return json{{"shape", t.shape()},
              {"data", std::vector<double>(t.values().begin(), t.values().end())}};
}

Tensor tensor_from_json(const json& j) {
  return Tensor(j.at("shape").get<Shape>(), j.at("data").get<std::vector<double>>());
}

std::unique_ptr<Layer> layer_with_params(const LayerSpec& spec, std::vector<Tensor> params) {
  auto expect = [&](std::size_t n) {
    if (params.size() != n)
      fail(ErrorCode::malformed_file, layer_kind(spec) + " layer needs " + std::to_string(n) +
                                          " parameter tensors, file has " +
                                          std::to_string(params.size()));
  };
  return std::visit(
      overloaded{
          [&](const Conv1DSpec& s) -> std::unique_ptr<Layer> {
            expect(2);
            return std::make_unique<Conv1DLayer>(std::move(params[0]), std::move(params[1]),
                                                 s.activation);
          },
          [&](const LstmSpec& s) -> std::unique_ptr<Layer> {
            expect(3);
            return std::make_unique<LstmLayer>(std::move(params[0]), std::move(params[1]),
                                               std::move(params[2]), s.return_sequences);
          },
          [&](const DenseSpec& s) -> std::unique_ptr<Layer> {
            expect(2);
            return std::make_unique<DenseLayer>(std::move(params[0]), std::move(params[1]),
                                                s.activation);
          },
          [&](const LambdaScaleSpec& s) -> std::unique_ptr<Layer> {
            expect(0);
            return std::make_unique<LambdaScaleLayer>(s.scale, s.offset);
          },
          [&](const GlobalAvgPoolSpec&) -> std::unique_ptr<Layer> {
            expect(0);
            return std::make_unique<GlobalAvgPoolLayer>();
          },
          [&](const FlattenSpec&) -> std::unique_ptr<Layer> {
            expect(0);
            return std::make_unique<FlattenLayer>();
          },
      },
      spec);
}

std::string checksum_of(const json& doc_without_checksum) {
  return "sha256:" + sha256_hex(doc_without_checksum.dump());
}

}  // namespace

std::string model_to_json(const Model& model) {
  json layers = json::array();
  for (const auto& l : model.spec().layers) layers.push_back(layer_to_json(l));
  json params = json::array();
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    json per_layer = json::array();
    for (const auto& p : model.layer(i).parameters()) per_layer.push_back(tensor_to_json(p));
    params.push_back(std::move(per_layer));
  }
  json doc{
      {"format", "tempcast-model"},
      {"format_version", kModelFormatVersion},
      {"spec",
       {{"name", model.spec().name},
        {"input_window", model.spec().input_window},
        {"input_features", model.spec().input_features},
        {"layers", std::move(layers)}}},
      {"normalization", {{"mean", model.normalization().mean}, {"std", model.normalization().std}}},
      {"seed", model.seed()},
      {"metadata", model.metadata()},
      {"parameters", std::move(params)},
  };
  doc["checksum"] = checksum_of(doc);
  return doc.dump(1) + "\n";
}

Model model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::malformed_file, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version"))
    fail(ErrorCode::malformed_file, "model file lacks a format_version field");
  if (!doc["format_version"].is_number_integer() ||
      doc["format_version"].get<long long>() != kModelFormatVersion)
    fail(ErrorCode::version_mismatch, "unsupported model format_version " +
                                          doc["format_version"].dump() + " (this build reads " +
                                          std::to_string(kModelFormatVersion) + ")");
  if (!doc.contains("checksum") || !doc["checksum"].is_string())
    fail(ErrorCode::malformed_file, "model file lacks a checksum field");
  const std::string stored = doc["checksum"].get<std::string>();
  doc.erase("checksum");
  if (checksum_of(doc) != stored)
    fail(ErrorCode::checksum_failure, "model file checksum does not match its contents");

  try {
    ModelSpec spec;
    const json& js = doc.at("spec");
    spec.name = js.at("name").get<std::string>();
    spec.input_window = js.at("input_window").get<std::size_t>();
    spec.input_features = js.at("input_features").get<std::size_t>();
    for (const auto& l : js.at("layers")) spec.layers.push_back(layer_from_json(l));

    const json& jp = doc.at("parameters");
    if (!jp.is_array() || jp.size() != spec.layers.size())
      fail(ErrorCode::malformed_file, "parameter list does not match the layer list");
    std::vector<std::unique_ptr<Layer>> layers;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      std::vector<Tensor> params;
      for (const auto& t : jp[i]) params.push_back(tensor_from_json(t));
      layers.push_back(layer_with_params(spec.layers[i], std::move(params)));
    }
    Normalization norm{doc.at("normalization").at("mean").get<double>(),
                       doc.at("normalization").at("std").get<double>()};
    Model model(std::move(spec), std::move(layers), doc.at("seed").get<std::uint64_t>(), norm);
    model.metadata() = doc.at("metadata").get<std::map<std::string, std::string>>();
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::malformed_file, std::string("model file has an invalid structure: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::malformed_file) throw;
    fail(ErrorCode::malformed_file, std::string("model file is inconsistent: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const std::string text = model_to_json(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write model file " + path.string());
  out << text;
  if (!out) fail(ErrorCode::io_error, "failed while writing model file " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace tempcast
