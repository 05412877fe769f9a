#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "error_code.hpp"
#include "oracles.hpp"
#include "tempcast/baselines.hpp"
#include "tempcast/error.hpp"
#include "tempcast/model.hpp"

using namespace tempcast;

namespace {

Tensor sine_batch(std::size_t batch, std::size_t window, double phase = 0.0) {
  Tensor x({batch, window, 1});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < window; ++t)
      x.at(b, t, 0) = std::sin(0.21 * static_cast<double>(t + 3 * b) + phase);
  return x;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tempcast_test_" + name);
}

}  // namespace

TEST_CASE("cnn-lstm stack matches the published table") {
  Model m = build_cnn_lstm(3);
  const ParameterReport report = m.count_parameters();
  REQUIRE(report.layers.size() == 7);
  CHECK(report.layers[0].kind == "conv1d");
  CHECK(report.layers[0].params == 360);
  CHECK(report.layers[0].output_shape == Shape{56, 60});
  CHECK(report.layers[1].params == 29040);
  CHECK(report.layers[1].output_shape == Shape{56, 60});
  CHECK(report.layers[2].params == 29040);
  CHECK(report.layers[2].output_shape == Shape{60});
  CHECK(report.layers[1].note.find("24840") != std::string::npos);
  CHECK(report.layers[3].params == 1830);
  CHECK(report.layers[4].params == 310);
  CHECK(report.layers[5].params == 11);
  CHECK(report.layers[6].kind == "lambda_scale");
  CHECK(report.layers[6].params == 0);
  CHECK(report.total == 360 + 2 * 29040 + 1830 + 310 + 11);

  CHECK(m.forward(sine_batch(5, 60)).shape() == Shape{5, 1});
}

TEST_CASE("same seed, same parameters") {
  Model a = build_cnn_lstm(42), b = build_cnn_lstm(42), c = build_cnn_lstm(43);
  const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  REQUIRE(pa.size() == pb.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(*pa[i] == *pb[i]);
    any_diff = any_diff || *pa[i] != *pc[i];
  }
  CHECK(any_diff);
}

TEST_CASE("spec validation") {
  CHECK(validate_spec(cnn_lstm_spec()) == Shape{1});
  ModelSpec bad = cnn_lstm_spec();
  bad.layers[1] = LstmSpec{59, 60, true};
  CHECK(code_of([&] { validate_spec(bad); }) == ErrorCode::shape_mismatch);
  bad = cnn_lstm_spec();
  bad.layers[3] = DenseSpec{30, 30, Activation::relu};
  CHECK(code_of([&] { validate_spec(bad); }) == ErrorCode::shape_mismatch);
  bad = cnn_lstm_spec();
  bad.input_window = 4;
  CHECK(code_of([&] { validate_spec(bad); }) == ErrorCode::window_too_long);
  bad = cnn_lstm_spec();
  bad.layers.erase(bad.layers.begin() + 2);  // a sequence reaches the dense head
  CHECK(code_of([&] { validate_spec(bad); }) == ErrorCode::shape_mismatch);
}

TEST_CASE("forward examples") {
  Model m = build_cnn_lstm(7);
  for (Tensor* p : m.parameters()) p->fill(0.0);
  const Tensor zero = m.forward(sine_batch(3, 60));
  for (double v : zero.values()) CHECK(v == 0.0);

  Model n = build_cnn_lstm(7, 4.0, 10.0);
  const Tensor batch = sine_batch(8, 60);
  const Tensor all = n.forward(batch);
  for (std::size_t b = 0; b < 8; ++b) {
    Tensor one({1, 60, 1});
    for (std::size_t t = 0; t < 60; ++t) one.at(0, t, 0) = batch.at(b, t, 0);
    CHECK(std::abs(n.forward(one)[0] - all[b]) <= 1e-12);
  }
  CHECK(code_of([&] { n.forward(Tensor({2, 59, 1})); }) == ErrorCode::shape_mismatch);
}

TEST_CASE("permuting batch rows permutes outputs") {
  Model m = build_cnn_lstm(11, 2.0, 1.0);
  const Tensor x = sine_batch(6, 60, 0.4);
  const Tensor y = m.forward(x);
  const std::size_t perm[] = {3, 0, 5, 1, 4, 2};
  Tensor xp(x.shape());
  for (std::size_t b = 0; b < 6; ++b)
    for (std::size_t t = 0; t < 60; ++t) xp.at(b, t, 0) = x.at(perm[b], t, 0);
  const Tensor yp = m.forward(xp);
  for (std::size_t b = 0; b < 6; ++b) CHECK(yp[b] == y[perm[b]]);
}

TEST_CASE("golden prediction") {
  // Recorded from this implementation once the gradient checks passed.
  Model m = build_cnn_lstm(2024, 12.5, 55.0);
  const Tensor y = m.forward(sine_batch(2, 60, 0.3));
  CHECK(y[0] == doctest::Approx(55.024921931311304).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(55.079838110766673).epsilon(1e-12));
}

TEST_CASE("backward") {
  Model m = build_cnn_lstm(5);
  CHECK(code_of([&] { m.backward(Tensor({1, 1})); }) == ErrorCode::missing_cache);

  const Tensor x = sine_batch(2, 60);
  m.forward(x);
  const ModelGradients zero = m.backward(Tensor({2, 1}));
  for (double v : zero.input.values()) CHECK(v == 0.0);
  for (const auto& layer : zero.layers)
    for (const auto& g : layer)
      for (double v : g.values()) CHECK(v == 0.0);

  // Two identical rows receive identical input gradients.
  Tensor twin({2, 60, 1});
  for (std::size_t t = 0; t < 60; ++t) twin.at(0, t, 0) = twin.at(1, t, 0) = x.at(0, t, 0);
  m.forward(twin);
  const ModelGradients g = m.backward(Tensor({2, 1}, 0.5));
  for (std::size_t t = 0; t < 60; ++t) CHECK(g.input.at(0, t, 0) == g.input.at(1, t, 0));
}

TEST_CASE("full-model gradients match central differences up to rounding") {
  std::mt19937_64 rng(99);
  for (const auto& spec : {oracle::tiny_cnn_lstm(), oracle::tiny_cnn(), oracle::tiny_lstm()}) {
    CAPTURE(spec.name);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Model m(spec, seed);
      oracle::randomize(m, rng);
      const auto r = oracle::check_model(m, oracle::random_tensor({2, 8, 1}, rng), rng);
      CHECK(r.checked > 50);
      CHECK(r.max_excess < 1.0);
    }
  }
}

TEST_CASE("serialization round trip is bit exact") {
  Model m = build_cnn_lstm(17, 9.25, -3.5);
  m.metadata()["note"] = "round trip";
  const auto path = temp_file("roundtrip.sfmodel.json");
  save_model(m, path);
  Model back = load_model(path);
  CHECK(back.spec() == m.spec());
  CHECK(back.seed() == m.seed());
  CHECK(back.normalization() == m.normalization());
  CHECK(back.metadata() == m.metadata());
  const auto pa = m.parameters(), pb = back.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i] == *pb[i]);
  const Tensor x = sine_batch(4, 60, 1.1);
  CHECK(m.forward(x) == back.forward(x));
  CHECK(model_to_json(back) == model_to_json(m));
  std::filesystem::remove(path);

  Model lin = linreg_to_model(LinRegModel{std::vector<double>(60, 1.0 / 3.0), 0.1, {2.0, 0.7}});
  CHECK(model_to_json(model_from_json(model_to_json(lin))) == model_to_json(lin));
}

TEST_CASE("damaged model files are rejected") {
  Model m(oracle::tiny_cnn_lstm(), 1);
  const std::string text = model_to_json(m);

  CHECK(code_of([&] { model_from_json(text.substr(0, text.size() / 2)); }) ==
        ErrorCode::malformed_file);
  CHECK(code_of([&] { model_from_json(""); }) == ErrorCode::malformed_file);

  std::string future = text;
  future.replace(future.find("\"format_version\": 1"), 19, "\"format_version\": 2");
  CHECK(code_of([&] { model_from_json(future); }) == ErrorCode::version_mismatch);

  std::string tampered = text;
  tampered.replace(tampered.find("\"seed\": 1"), 9, "\"seed\": 2");
  CHECK(code_of([&] { model_from_json(tampered); }) == ErrorCode::checksum_failure);

  CHECK(code_of([] { load_model(temp_file("does-not-exist.sfmodel.json")); }) ==
        ErrorCode::io_error);
}
