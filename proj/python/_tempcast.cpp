// Python bindings. Series and windows cross the boundary as float64 numpy
// arrays; reports come back as dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tempcast/baselines.hpp"
#include "tempcast/data.hpp"
#include "tempcast/error.hpp"
#include "tempcast/metrics.hpp"
#include "tempcast/model.hpp"
#include "tempcast/training.hpp"

namespace py = pybind11;
using namespace tempcast;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["variance"] = r.variance;
  d["r2"] = r.r2;
  d["mae"] = r.mae;
  return d;
}

// A bare array becomes a daily series starting 2000-01-01.
CitySeries series_from(const Array& values) {
  CitySeries s;
  s.key.city = "array";
  s.values = to_vector(values);
  const auto start = std::chrono::sys_days{std::chrono::year{2000} / 1 / 1};
  s.dates.reserve(s.values.size());
  for (std::size_t t = 0; t < s.values.size(); ++t)
    s.dates.push_back(start + std::chrono::days{static_cast<int>(t)});
  return s;
}

TrainConfig make_config(std::size_t epochs, std::size_t batch_size, double lr, double beta1,
                        double beta2, double epsilon, std::uint64_t seed, bool shuffle,
                        std::optional<std::size_t> patience) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch_size;
  c.adam = {lr, beta1, beta2, epsilon};
  c.seed = seed;
  c.shuffle = shuffle;
  c.patience = patience;
  return c;
}

py::list history_list(const TrainHistory& h) {
  py::list out;
  for (const auto& r : h.epochs) {
    py::dict d;
    d["epoch"] = r.epoch;
    d["train_mae"] = r.train_mae;
    d["val_mae"] = r.val_mae;
    d["wall_time"] = r.wall_time;
    out.append(d);
  }
  return out;
}

// Windows in data units, [B×window] or [B×window×1].
Array model_predict(Model& model, const Array& windows) {
  const std::size_t w = model.window();
  const bool ok = (windows.ndim() == 2 && windows.shape(1) == static_cast<py::ssize_t>(w)) ||
                  (windows.ndim() == 3 && windows.shape(1) == static_cast<py::ssize_t>(w) &&
                   windows.shape(2) == 1);
  if (!ok)
    fail(ErrorCode::shape_mismatch,
         "expected windows of shape (batch, " + std::to_string(w) + ") or (batch, " +
             std::to_string(w) + ", 1)");
  const std::size_t b = static_cast<std::size_t>(windows.shape(0));
  if (b == 0) fail(ErrorCode::empty_input, "no windows to predict");
  std::span<const double> raw(windows.data(), static_cast<std::size_t>(windows.size()));
  Tensor x({b, w, 1}, normalize(raw, model.normalization()));
  Tensor y;
  {
    py::gil_scoped_release release;
    y = model.forward(x);
  }
  return to_array(y.values());
}

}  // namespace

PYBIND11_MODULE(_tempcast, m) {
  m.doc() = "Daily temperature forecasting with CNN-LSTM and baseline models";

  static py::exception<Error> error_type(m, "TempcastError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("numerical") = e.is_numerical();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // metrics
  m.def("mae", [](const Array& p, const Array& t) { return mae(to_vector(p), to_vector(t)); },
        py::arg("pred"), py::arg("target"));
  m.def("r2_score",
        [](const Array& p, const Array& t) { return r2_score(to_vector(p), to_vector(t)); },
        py::arg("pred"), py::arg("target"));
  m.def("explained_variance",
        [](const Array& p, const Array& t) {
          return explained_variance(to_vector(p), to_vector(t));
        },
        py::arg("pred"), py::arg("target"));
  m.def("score",
        [](const Array& p, const Array& t) {
          return report_dict(score(to_vector(p), to_vector(t)));
        },
        py::arg("pred"), py::arg("target"));

  // data
  m.def(
      "read_csv",
      [](const std::filesystem::path& path, double threshold) {
        const ParsedCsv csv = parse_csv(path, threshold);
        py::dict stats;
        stats["rows"] = csv.stats.rows;
        stats["cities"] = csv.stats.cities;
        stats["year_min"] = csv.stats.year_min;
        stats["year_max"] = csv.stats.year_max;
        stats["missing_count"] = csv.stats.missing_count;
        py::list cities;
        for (const auto& k : city_keys(csv.records)) cities.append(k.str());
        py::list errors;
        for (const auto& e : csv.row_errors) errors.append(py::make_tuple(e.line, e.message));
        py::dict out;
        out["stats"] = stats;
        out["cities"] = cities;
        out["row_errors"] = errors;
        return out;
      },
      py::arg("path"), py::arg("missing_threshold") = kDefaultMissingThreshold);
  m.def(
      "load_city",
      [](const std::filesystem::path& path, const std::string& city, const std::string& missing,
         double threshold) {
        const ParsedCsv csv = parse_csv(path, threshold);
        const CityKey key = resolve_city(csv.records, city);
        const CitySeries s =
            clean_series(csv.records, key, missing_policy_from_string(missing), threshold);
        py::array_t<std::int64_t> days(static_cast<py::ssize_t>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i)
          days.mutable_data()[i] = s.dates[i].time_since_epoch().count();
        return py::make_tuple(key.str(), days, to_array(s.values));
      },
      py::arg("path"), py::arg("city"), py::arg("missing") = "interpolate",
      py::arg("missing_threshold") = kDefaultMissingThreshold);
  m.def(
      "synthetic_series",
      [](std::size_t length, std::uint64_t seed, double noise_std, double amplitude, double period,
         double trend) {
        return to_array(
            synthesize_series({length, seed, noise_std, amplitude, period, trend}).values);
      },
      py::arg("length") = 4000, py::arg("seed") = 0, py::arg("noise_std") = 0.0,
      py::arg("amplitude") = 15.0, py::arg("period") = 365.0, py::arg("trend") = 0.001);
  m.def(
      "fit_normalization",
      [](const Array& v) {
        const Normalization n = fit_normalization(to_vector(v));
        return py::make_tuple(n.mean, n.std);
      },
      py::arg("values"));
  m.def(
      "make_windows",
      [](const Array& v, std::size_t window, std::size_t horizon) {
        const WindowedDataset ds = make_windows(to_vector(v), window, horizon);
        return py::make_tuple(to_array(ds.inputs.reshaped({ds.size(), window})),
                              to_array(ds.targets.values()));
      },
      py::arg("values"), py::arg("window") = 60, py::arg("horizon") = 1);

  // models
  py::class_<Model>(m, "Model")
      .def_static(
          "build",
          [](const std::string& arch, std::uint64_t seed, double mean, double std,
             std::size_t window) {
            return build_model(model_kind_from_string(arch), seed, {mean, std}, window);
          },
          py::arg("arch") = "cnn-lstm", py::arg("seed") = 0, py::arg("mean") = 0.0,
          py::arg("std") = 1.0, py::arg("window") = 60)
      .def_static("load", &load_model, py::arg("path"))
      .def_static("from_json", &model_from_json, py::arg("text"))
      .def("save", [](const Model& self, const std::filesystem::path& p) { save_model(self, p); },
           py::arg("path"))
      .def("to_json", [](const Model& self) { return model_to_json(self); })
      .def_property_readonly("name", [](const Model& self) { return self.spec().name; })
      .def_property_readonly("window", &Model::window)
      .def_property_readonly("seed", &Model::seed)
      .def_property_readonly("normalization",
                             [](const Model& self) {
                               return py::make_tuple(self.normalization().mean,
                                                     self.normalization().std);
                             })
      .def_property_readonly("metadata",
                             [](const Model& self) { return self.metadata(); })
      .def("parameter_count", [](const Model& self) { return self.count_parameters().total; })
      .def("summary",
           [](const Model& self) {
             py::list out;
             for (const auto& l : self.count_parameters().layers) {
               py::dict d;
               d["kind"] = l.kind;
               d["output_shape"] = l.output_shape;
               d["params"] = l.params;
               out.append(d);
             }
             return out;
           })
      .def("predict", &model_predict, py::arg("windows"),
           "Next-day values for windows given in data units.");

  m.def(
      "train",
      [](Model& model, const Array& values, double train_fraction, std::size_t epochs,
         std::size_t batch_size, double lr, double beta1, double beta2, double epsilon,
         std::uint64_t seed, bool shuffle, std::optional<std::size_t> patience) {
        const PreparedData data = prepare_datasets(series_from(values), model.window(),
                                                   train_fraction);
        model.set_normalization(data.normalization);
        const TrainConfig cfg =
            make_config(epochs, batch_size, lr, beta1, beta2, epsilon, seed, shuffle, patience);
        TrainHistory h;
        EvalReport test;
        {
          py::gil_scoped_release release;
          h = train(model, data.train, data.test, cfg);
          test = evaluate(model, data.test);
        }
        py::dict out;
        out["history"] = history_list(h);
        out["optimizer_steps"] = h.optimizer_steps;
        out["stopped_early"] = h.stopped_early;
        out["test"] = report_dict(test);
        out["split_hash"] = data.split_hash;
        return out;
      },
      py::arg("model"), py::arg("values"), py::arg("train_fraction") = 0.8,
      py::arg("epochs") = 50, py::arg("batch_size") = 64, py::arg("lr") = 1e-3,
      py::arg("beta1") = 0.9, py::arg("beta2") = 0.999, py::arg("epsilon") = 1e-8,
      py::arg("seed") = 0, py::arg("shuffle") = true, py::arg("patience") = py::none(),
      "Fits the model on the leading fraction of the series and scores the rest.");
  m.def(
      "evaluate",
      [](Model& model, const Array& values, double train_fraction) {
        const SeriesSplit split = chronological_split(series_from(values), train_fraction);
        const WindowedDataset test = make_windows(
            normalize(split.test.values, model.normalization()), model.window(), 1,
            model.normalization());
        EvalReport r;
        {
          py::gil_scoped_release release;
          r = evaluate(model, test);
        }
        return report_dict(r);
      },
      py::arg("model"), py::arg("values"), py::arg("train_fraction") = 0.8,
      "Scores the held-out tail of the series with the model's stored statistics.");

  m.def(
      "fit_linreg",
      [](const Array& values, std::size_t window, double train_fraction, double ridge) {
        const PreparedData data = prepare_datasets(series_from(values), window, train_fraction);
        const LinRegModel lr = linreg_fit(data.train, ridge);
        py::dict out;
        out["coefficients"] = to_array(lr.coefficients);
        out["intercept"] = lr.intercept;
        out["normalization"] = py::make_tuple(lr.normalization.mean, lr.normalization.std);
        out["test"] = report_dict(score(linreg_predict(lr, data.test),
                                        data.test.targets_in_data_units()));
        out["model"] = linreg_to_model(lr);
        return out;
      },
      py::arg("values"), py::arg("window") = 60, py::arg("train_fraction") = 0.8,
      py::arg("ridge") = 1e-8);

  m.def(
      "compare",
      [](const Array& values, std::vector<std::uint64_t> seeds, std::vector<std::string> models,
         std::size_t window, double train_fraction, std::size_t epochs, std::size_t batch_size,
         double lr) {
        const PreparedData data = prepare_datasets(series_from(values), window, train_fraction);
        CompareConfig cfg;
        cfg.train = make_config(epochs, batch_size, lr, 0.9, 0.999, 1e-8, 0, true, std::nullopt);
        cfg.seeds = std::move(seeds);
        cfg.models.clear();
        for (const auto& name : models) cfg.models.push_back(model_kind_from_string(name));
        std::vector<ComparisonRow> rows;
        {
          py::gil_scoped_release release;
          rows = compare_models(data.train, data.test, cfg);
        }
        return py::make_tuple(comparison_to_json(rows), render_table(rows));
      },
      py::arg("values"), py::arg("seeds") = std::vector<std::uint64_t>{0},
      py::arg("models") = std::vector<std::string>{"linreg", "cnn", "lstm", "cnn-lstm"},
      py::arg("window") = 60, py::arg("train_fraction") = 0.8, py::arg("epochs") = 50,
      py::arg("batch_size") = 64, py::arg("lr") = 1e-3);
}
