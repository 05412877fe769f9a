// tempcast: command-line front end for ingestion, training, evaluation,
// prediction and the four-model comparison.
//
// Exit codes: 0 success, 1 internal error, 2 input or configuration error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tempcast/baselines.hpp"
#include "tempcast/data.hpp"
#include "tempcast/error.hpp"
#include "tempcast/hash.hpp"
#include "tempcast/model.hpp"
#include "tempcast/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tempcast;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr const char* kManifestName = "run-manifest.json";

bool g_quiet = false;

// Human-facing text; silent under --quiet.
template <typename... Args>
void note(const char* fmt, Args... args) {
  if (g_quiet) return;
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::io_error, "failed writing " + path.string());
}

json report_json(const EvalReport& r) {
  return {{"variance", r.variance}, {"r2", r.r2}, {"mae", r.mae}};
}

// ---------------------------------------------------------------------------
// Options shared between subcommands.

struct SourceOptions {
  std::string csv;
  bool synthetic = false;
  std::string city;
  std::string missing = "interpolate";
  double missing_threshold = kDefaultMissingThreshold;
  std::size_t length = 4000;
  std::uint64_t data_seed = 0;
  double noise_std = 2.25;
  double amplitude = 15.0;
  double period = 365.0;
  double trend = 0.001;
};

void add_source(CLI::App* cmd, SourceOptions& s) {
  cmd->add_option("csv", s.csv, "Daily temperature CSV")->check(CLI::ExistingFile);
  cmd->add_flag("--synthetic", s.synthetic, "Use a generated sinusoid-plus-trend series");
  cmd->add_option("--city", s.city, "City name or Region/Country/State/City key");
  cmd->add_option("--missing", s.missing, "Missing-value policy")
      ->check(CLI::IsMember({"interpolate", "drop"}));
  cmd->add_option("--missing-threshold", s.missing_threshold,
                  "Temperatures at or below this value are missing");
  cmd->add_option("--length", s.length, "Synthetic series length")->check(CLI::PositiveNumber);
  cmd->add_option("--data-seed", s.data_seed, "Synthetic noise seed");
  cmd->add_option("--noise-std", s.noise_std, "Synthetic noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--amplitude", s.amplitude, "Synthetic cycle amplitude");
  cmd->add_option("--period", s.period, "Synthetic cycle period in days")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--trend", s.trend, "Synthetic linear trend per day");
}

struct LoadedSeries {
  CitySeries series;
  std::vector<fs::path> inputs;
};

LoadedSeries load_series(const SourceOptions& s) {
  if (s.synthetic == !s.csv.empty())
    fail(ErrorCode::invalid_config, "give either a CSV path or --synthetic (exactly one)");
  if (s.synthetic) {
    SyntheticSpec spec;
    spec.length = s.length;
    spec.seed = s.data_seed;
    spec.noise_std = s.noise_std;
    spec.amplitude = s.amplitude;
    spec.period = s.period;
    spec.trend = s.trend;
    return {synthesize_series(spec), {}};
  }
  const ParsedCsv parsed = parse_csv(s.csv, s.missing_threshold);
  for (const auto& e : parsed.row_errors)
    note("warning: %s line %zu: %s", s.csv.c_str(), e.line, e.message.c_str());
  CityKey key;
  if (!s.city.empty()) {
    key = resolve_city(parsed.records, s.city);
  } else {
    const auto keys = city_keys(parsed.records);
    if (keys.size() != 1)
      fail(ErrorCode::unknown_city, "the file holds " + std::to_string(keys.size()) +
                                        " cities; choose one with --city");
    key = keys.front();
  }
  CitySeries series =
      clean_series(parsed.records, key, missing_policy_from_string(s.missing), s.missing_threshold);
  note("%s: %zu daily values", key.str().c_str(), series.size());
  return {std::move(series), {fs::path(s.csv)}};
}

struct TrainOptions {
  std::size_t window = 60;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double split = 0.8;
  std::size_t patience = 0;
  bool no_shuffle = false;
};

void add_training(CLI::App* cmd, TrainOptions& t) {
  cmd->add_option("--window", t.window, "Input window length");
  cmd->add_option("--epochs", t.epochs, "Training epochs");
  cmd->add_option("--batch-size", t.batch_size, "Mini-batch size");
  cmd->add_option("--lr", t.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
  cmd->add_option("--beta1", t.beta1, "Adam first-moment decay");
  cmd->add_option("--beta2", t.beta2, "Adam second-moment decay");
  cmd->add_option("--adam-epsilon", t.adam_epsilon, "Adam denominator epsilon");
  cmd->add_option("--split", t.split, "Chronological train fraction");
  cmd->add_option("--patience", t.patience, "Stop after this many epochs without val gain (0 = off)");
  cmd->add_flag("--no-shuffle", t.no_shuffle, "Keep training windows in time order");
}

TrainConfig train_config(const TrainOptions& t, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = t.epochs;
  c.batch_size = t.batch_size;
  c.adam = {t.lr, t.beta1, t.beta2, t.adam_epsilon};
  c.seed = seed;
  c.shuffle = !t.no_shuffle;
  if (t.patience > 0) c.patience = t.patience;
  return c;
}

// ---------------------------------------------------------------------------
// Run manifest: the fully resolved argument list plus input and output hashes.

struct Manifest {
  std::string command;
  std::vector<std::string> args;  // resolved, including every default
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::optional<std::uint64_t> seed;
  std::string started;
};

bool is_path_option(const CLI::Option* opt) {
  const std::string name = opt->get_name();
  return name == "csv" || name == "model" || name == "manifest" || name == "--input-file" ||
         (name.size() > 4 && name.ends_with("-out"));
}

// Rebuilds an argument list for `cmd` with every option materialized and
// paths made absolute.
std::vector<std::string> resolved_args(const CLI::App* cmd) {
  std::vector<std::string> args{cmd->get_name()};
  for (const CLI::Option* opt : cmd->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
    const bool positional = opt->get_lnames().empty();
    const std::string name = positional ? "" : "--" + opt->get_lnames().front();
    if (opt->get_expected_min() == 0) {  // flag
      if (opt->count() > 0) args.push_back(name);
      continue;
    }
    std::vector<std::string> values = opt->results();
    if (values.empty() && !opt->get_default_str().empty()) values = {opt->get_default_str()};
    for (const auto& v : values) {
      if (!positional) args.push_back(name);
      args.push_back(is_path_option(opt) && !v.empty() ? fs::absolute(v).string() : v);
    }
  }
  return args;
}

fs::path manifest_path(const Manifest& m, const std::string& override_path) {
  if (!override_path.empty()) return override_path;
  for (const auto& out : m.outputs)
    if (!out.empty()) return out.parent_path() / kManifestName;
  return kManifestName;
}

void write_manifest(const Manifest& m, const std::string& override_path) {
  json doc;
  doc["tool"] = "tempcast";
  doc["command"] = m.command;
  doc["args"] = m.args;
  doc["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  json inputs = json::array();
  for (const auto& p : m.inputs)
    inputs.push_back({{"path", fs::absolute(p).string()}, {"sha256", sha256_file(p)}});
  doc["inputs"] = inputs;
  json outputs = json::array();
  for (const auto& p : m.outputs)
    outputs.push_back({{"path", fs::absolute(p).string()}, {"sha256", sha256_file(p)}});
  doc["outputs"] = outputs;
  doc["started_at"] = m.started;
  doc["finished_at"] = utc_now();
  const fs::path path = manifest_path(m, override_path);
  write_text(path, doc.dump(2) + "\n");
  note("manifest: %s", path.string().c_str());
}

std::uint64_t draw_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns its stdout payload and fills the manifest.

struct IngestArgs {
  std::string csv;
  std::string stats_out;
  double threshold = kDefaultMissingThreshold;
};

std::string run_ingest(const IngestArgs& a, Manifest& m) {
  const ParsedCsv parsed = parse_csv(a.csv, a.threshold);
  for (const auto& e : parsed.row_errors)
    note("warning: line %zu: %s", e.line, e.message.c_str());
  const std::string stats = to_json(parsed.stats);
  m.inputs.push_back(a.csv);
  if (!a.stats_out.empty()) {
    write_text(a.stats_out, stats + "\n");
    m.outputs.push_back(a.stats_out);
  }
  return stats;
}

struct TrainArgs {
  SourceOptions source;
  TrainOptions train;
  std::string arch = "cnn-lstm";
  std::optional<std::uint64_t> seed;
  std::string model_out;
  std::string curve_out;
  std::string report_out;
};

std::string run_train(const TrainArgs& a, Manifest& m) {
  const std::uint64_t seed = *a.seed;
  const LoadedSeries loaded = load_series(a.source);
  m.inputs = loaded.inputs;
  const PreparedData data = prepare_datasets(loaded.series, a.train.window, a.train.split);
  note("train windows %zu, test windows %zu", data.train.size(), data.test.size());

  const ModelKind kind = model_kind_from_string(a.arch);
  json summary;
  summary["model"] = display_name(kind);
  summary["seed"] = seed;
  summary["split_hash"] = data.split_hash;

  std::optional<Model> model;
  if (kind == ModelKind::linreg) {
    model = linreg_to_model(linreg_fit(data.train));
  } else {
    model = build_model(kind, seed, data.normalization, a.train.window);
    std::optional<CurveWriter> curve;
    if (!a.curve_out.empty()) {
      ensure_parent(a.curve_out);
      curve.emplace(a.curve_out);
    }
    const TrainConfig cfg = train_config(a.train, seed);
    const TrainHistory h = train(*model, data.train, data.test, cfg, [&](const EpochRecord& r) {
      if (curve) curve->append(r);
      note("epoch %zu/%zu  train_mae %.4f  val_mae %.4f  (%.1fs)", r.epoch, cfg.epochs,
           r.train_mae, r.val_mae, r.wall_time);
    });
    summary["epochs"] = h.epochs.size();
    summary["optimizer_steps"] = h.optimizer_steps;
    summary["stopped_early"] = h.stopped_early;
    summary["final_train_mae"] = h.epochs.back().train_mae;
    summary["final_val_mae"] = h.epochs.back().val_mae;
    if (curve) m.outputs.push_back(a.curve_out);
  }
  model->metadata()["source"] = data.train.provenance + " | " + data.test.provenance;
  model->metadata()["split_hash"] = data.split_hash;
  model->metadata()["train_fraction"] = shortest(a.train.split);
  ensure_parent(a.model_out);
  save_model(*model, a.model_out);
  m.outputs.insert(m.outputs.begin(), a.model_out);

  summary["test"] = report_json(evaluate(*model, data.test));
  const std::string payload = summary.dump(2);
  if (!a.report_out.empty()) {
    write_text(a.report_out, payload + "\n");
    m.outputs.push_back(a.report_out);
  }
  return payload;
}

struct EvaluateArgs {
  std::string model;
  SourceOptions source;
  double split = 0.8;
  std::size_t window = 0;
  std::string report_out;
};

std::string run_evaluate(const EvaluateArgs& a, Manifest& m) {
  Model model = load_model(a.model);
  if (a.window != 0 && a.window != model.window())
    fail(ErrorCode::shape_mismatch, "--window " + std::to_string(a.window) +
                                        " does not match the model's input window " +
                                        std::to_string(model.window()));
  const LoadedSeries loaded = load_series(a.source);
  m.inputs = loaded.inputs;
  m.inputs.insert(m.inputs.begin(), a.model);
  // Score the held-out slice, normalized with the statistics stored in the model.
  const SeriesSplit split = chronological_split(loaded.series, a.split);
  const WindowedDataset test = make_windows(normalize(split.test.values, model.normalization()),
                                            model.window(), 1, model.normalization());
  json out = report_json(evaluate(model, test));
  out["windows"] = test.size();
  const std::string payload = out.dump(2);
  if (!a.report_out.empty()) {
    write_text(a.report_out, payload + "\n");
    m.outputs.push_back(a.report_out);
  }
  return payload;
}

struct PredictArgs {
  std::string model;
  std::string input;
  std::string input_file;
};

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    std::istringstream lines(token);
    for (std::string piece; lines >> piece;) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
      if (ec != std::errc() || ptr != piece.data() + piece.size() || !std::isfinite(v))
        fail(ErrorCode::invalid_config, "input value '" + piece + "' is not a finite number");
      values.push_back(v);
    }
  }
  return values;
}

std::string run_predict(const PredictArgs& a, Manifest& m) {
  if (a.input.empty() == a.input_file.empty())
    fail(ErrorCode::invalid_config, "give exactly one of --input or --input-file");
  Model model = load_model(a.model);
  m.inputs.push_back(a.model);
  std::string text = a.input;
  if (!a.input_file.empty()) {
    std::ifstream in(a.input_file);
    if (!in) fail(ErrorCode::io_error, "cannot open " + a.input_file);
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    m.inputs.push_back(a.input_file);
  }
  const std::vector<double> values = parse_values(text);
  if (values.size() != model.window())
    fail(ErrorCode::shape_mismatch, "expected " + std::to_string(model.window()) +
                                        " input values, got " + std::to_string(values.size()));
  const auto normalized = normalize(values, model.normalization());
  const Tensor y = model.forward(Tensor({1, model.window(), 1}, normalized));
  return shortest(y[0]);
}

struct CompareArgs {
  SourceOptions source;
  TrainOptions train;
  std::string seeds;
  std::string models = "linreg,cnn,lstm,cnn-lstm";
  std::string table_out;
  std::string report_out;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string run_compare(const CompareArgs& a, Manifest& m, bool& any_ok) {
  CompareConfig cfg;
  cfg.seeds.clear();
  for (const auto& s : split_list(a.seeds)) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail(ErrorCode::invalid_config, "seed '" + s + "' is not a non-negative integer");
    cfg.seeds.push_back(v);
  }
  cfg.models.clear();
  for (const auto& name : split_list(a.models)) cfg.models.push_back(model_kind_from_string(name));
  if (cfg.models.empty()) fail(ErrorCode::invalid_config, "--models lists no models");
  cfg.train = train_config(a.train, 0);

  const LoadedSeries loaded = load_series(a.source);
  m.inputs = loaded.inputs;
  const PreparedData data = prepare_datasets(loaded.series, a.train.window, a.train.split);
  note("train windows %zu, test windows %zu", data.train.size(), data.test.size());
  cfg.progress = [&](ModelKind kind, std::uint64_t seed, const EpochRecord& r) {
    note("%s seed %llu epoch %zu  train_mae %.4f  val_mae %.4f", display_name(kind).c_str(),
         static_cast<unsigned long long>(seed), r.epoch, r.train_mae, r.val_mae);
  };
  const auto rows = compare_models(data.train, data.test, cfg);
  any_ok = false;
  for (const auto& r : rows) {
    any_ok = any_ok || r.ok;
    if (!r.ok) note("%s failed: %s", r.model.c_str(), r.error.c_str());
  }
  const std::string table = render_table(rows);
  const std::string payload = comparison_to_json(rows);
  if (!g_quiet) std::cerr << "\n" << table;
  if (!a.table_out.empty()) {
    write_text(a.table_out, table);
    m.outputs.push_back(a.table_out);
  }
  if (!a.report_out.empty()) {
    write_text(a.report_out, payload + "\n");
    m.outputs.push_back(a.report_out);
  }
  return payload;
}

// ---------------------------------------------------------------------------

int exit_code_for(const Error& e) { return e.is_numerical() ? kExitNumerical : kExitInput; }

int dispatch(std::vector<std::string> argv, bool allow_rerun);

int run_from_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open manifest " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::malformed_file, "manifest " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.contains("args") || !doc["args"].is_array())
    fail(ErrorCode::malformed_file, "manifest " + path + " has no argument list");
  for (const auto& input : doc.value("inputs", json::array())) {
    const std::string p = input.at("path").get<std::string>();
    if (!fs::exists(p)) fail(ErrorCode::io_error, "manifest input " + p + " no longer exists");
    if (sha256_file(p) != input.at("sha256").get<std::string>())
      fail(ErrorCode::invalid_config, "manifest input " + p + " has changed since the recorded run");
  }
  std::vector<std::string> argv{"tempcast"};
  if (g_quiet) argv.push_back("--quiet");
  for (const auto& a : doc["args"]) argv.push_back(a.get<std::string>());
  const int status = dispatch(argv, false);
  if (status != kExitOk) return status;

  std::size_t same = 0, outputs = 0;
  for (const auto& output : doc.value("outputs", json::array())) {
    const std::string p = output.at("path").get<std::string>();
    ++outputs;
    if (fs::exists(p) && sha256_file(p) == output.at("sha256").get<std::string>())
      ++same;
    else
      std::fprintf(stderr, "rerun: %s differs from the recorded output\n", p.c_str());
  }
  note("rerun: %zu of %zu outputs reproduced bit for bit", same, outputs);
  return same == outputs ? kExitOk : kExitInternal;
}

int dispatch(std::vector<std::string> argv, bool allow_rerun) {
  CLI::App app{"Daily temperature forecasting with a CNN-LSTM and baselines", "tempcast"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  std::string manifest_override;
  app.add_flag("--quiet", g_quiet, "Print only machine-readable output on stdout");
  app.add_option("--manifest", manifest_override, "Where to write the run manifest");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse a CSV and report ingestion statistics");
  c_ingest->add_option("csv", ingest.csv, "Daily temperature CSV")->required();
  c_ingest->add_option("--stats-out", ingest.stats_out, "Write the statistics JSON here");
  c_ingest->add_option("--missing-threshold", ingest.threshold,
                       "Temperatures at or below this value are missing");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a model and write it with its loss curve");
  add_source(c_train, tr.source);
  add_training(c_train, tr.train);
  c_train->add_option("--arch", tr.arch, "cnn-lstm, lstm, cnn or linreg")
      ->check(CLI::IsMember({"cnn-lstm", "lstm", "cnn", "linreg"}));
  auto* seed_opt = c_train->add_option("--seed", tr.seed, "Seed for initialization and shuffling");
  c_train->add_option("--model-out", tr.model_out, "Model file (.sfmodel.json)")->required();
  c_train->add_option("--curve-out", tr.curve_out, "Per-epoch epoch,train_mae,val_mae CSV");
  c_train->add_option("--report-out", tr.report_out, "Write the training summary JSON here");

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score a model on the held-out slice");
  c_eval->add_option("model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
  add_source(c_eval, ev.source);
  c_eval->add_option("--split", ev.split, "Chronological train fraction");
  c_eval->add_option("--window", ev.window, "Expected input window (0 = take from the model)");
  c_eval->add_option("--report-out", ev.report_out, "Write the report JSON here");

  PredictArgs pr;
  auto* c_pred = app.add_subcommand("predict", "Forecast the next value from one window");
  c_pred->add_option("model", pr.model, "Model file")->required()->check(CLI::ExistingFile);
  c_pred->add_option("--input", pr.input, "Comma-separated window values in data units");
  c_pred->add_option("--input-file", pr.input_file, "File of comma- or space-separated values")
      ->check(CLI::ExistingFile);

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare", "Fit and score all four models on one split");
  add_source(c_cmp, cmp.source);
  add_training(c_cmp, cmp.train);
  auto* seeds_opt = c_cmp->add_option("--seeds", cmp.seeds, "Comma-separated training seeds");
  c_cmp->add_option("--models", cmp.models, "Comma-separated subset of linreg,cnn,lstm,cnn-lstm");
  c_cmp->add_option("--table-out", cmp.table_out, "Write the text table here");
  c_cmp->add_option("--report-out", cmp.report_out, "Write the JSON rows here");

  std::string rerun_path;
  auto* c_rerun = app.add_subcommand("rerun", "Repeat a run recorded in a manifest");
  c_rerun->add_option("manifest", rerun_path, "run-manifest.json")->required();

  try {
    std::reverse(argv.begin(), argv.end());
    argv.pop_back();  // program name
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (c_rerun->parsed()) {
      if (!allow_rerun) fail(ErrorCode::invalid_config, "a manifest cannot point at another rerun");
      return run_from_manifest(rerun_path);
    }

    Manifest m;
    m.started = utc_now();
    std::string payload;
    int status = kExitOk;
    CLI::App* used = nullptr;
    if (c_ingest->parsed()) {
      used = c_ingest;
      m.args = resolved_args(used);
      payload = run_ingest(ingest, m);
    } else if (c_train->parsed()) {
      used = c_train;
      if (!tr.seed) {
        tr.seed = draw_seed();
        seed_opt->add_result(std::to_string(*tr.seed));
        note("no --seed given; using %llu", static_cast<unsigned long long>(*tr.seed));
      }
      m.seed = tr.seed;
      m.args = resolved_args(used);
      payload = run_train(tr, m);
    } else if (c_eval->parsed()) {
      used = c_eval;
      m.args = resolved_args(used);
      payload = run_evaluate(ev, m);
    } else if (c_pred->parsed()) {
      used = c_pred;
      m.args = resolved_args(used);
      payload = run_predict(pr, m);
    } else if (c_cmp->parsed()) {
      used = c_cmp;
      if (cmp.seeds.empty()) {
        const std::uint64_t s = draw_seed();
        cmp.seeds = std::to_string(s);
        seeds_opt->add_result(cmp.seeds);
        note("no --seeds given; using %s", cmp.seeds.c_str());
      }
      m.args = resolved_args(used);
      m.seed = split_list(cmp.seeds).size() == 1 ? std::optional<std::uint64_t>(std::stoull(cmp.seeds))
                                                  : std::nullopt;
      bool any_ok = false;
      payload = run_compare(cmp, m, any_ok);
      if (!any_ok) status = kExitInput;
    }
    m.command = used->get_name();
    std::cout << payload << "\n" << std::flush;
    write_manifest(m, manifest_override);
    return status;
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(std::vector<std::string>(argv, argv + argc), true);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
