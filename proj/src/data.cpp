#include "tempcast/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tempcast/error.hpp"
#include "tempcast/hash.hpp"

namespace tempcast {

namespace {

constexpr std::array<std::string_view, 8> kColumns = {
    "region", "country", "state", "city", "month", "day", "year", "avgtemperature"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Comma-separated fields; double quotes may wrap a field containing commas.
std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::optional<std::chrono::sys_days> calendar_date(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

std::string iso_date(std::chrono::sys_days d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

CitySeries slice(const CitySeries& s, std::size_t begin, std::size_t end) {
  CitySeries out;
  out.key = s.key;
  out.dates.assign(s.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                   s.dates.begin() + static_cast<std::ptrdiff_t>(end));
  out.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(begin),
                    s.values.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

std::string provenance_of(const CitySeries& s) {
  if (s.dates.empty()) return s.key.str();
  return s.key.str() + " " + iso_date(s.dates.front()) + ".." + iso_date(s.dates.back());
}

}  // namespace

std::string CityKey::str() const { return region + "/" + country + "/" + state + "/" + city; }

std::string to_json(const IngestStats& stats) {
  nlohmann::ordered_json j{{"rows", stats.rows},
                           {"cities", stats.cities},
                           {"year_min", stats.year_min},
                           {"year_max", stats.year_max},
                           {"missing_count", stats.missing_count}};
  return j.dump();
}

ParsedCsv parse_csv(const std::filesystem::path& path, double missing_threshold) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv_text(ss.str(), missing_threshold);
}

ParsedCsv parse_csv_text(std::string_view text, double missing_threshold) {
  ParsedCsv out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const std::size_t end = text.find('\n', pos);
    line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  bool have_header = false;
  while (next_line(line)) {
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) fail(ErrorCode::empty_file, "CSV input is empty");

  // Strip a UTF-8 byte order mark if present.
  if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
  const auto header = split_fields(line);
  std::array<std::size_t, kColumns.size()> col{};
  std::vector<std::string> missing;
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return lower(h) == kColumns[c]; });
    if (it == header.end())
      missing.emplace_back(kColumns[c]);
    else
      col[c] = static_cast<std::size_t>(it - header.begin());
  }
  if (!missing.empty()) {
    static const std::map<std::string, std::string> pretty = {
        {"region", "Region"}, {"country", "Country"}, {"state", "State"},
        {"city", "City"},     {"month", "Month"},     {"day", "Day"},
        {"year", "Year"},     {"avgtemperature", "AvgTemperature"}};
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + pretty.at(m);
    fail(ErrorCode::missing_column, "CSV header is missing required column(s): " + names);
  }
  const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;

  std::size_t data_rows = 0;
  while (next_line(line)) {
    if (trim(line).empty()) continue;
    ++data_rows;
    const auto f = split_fields(line);
    if (f.size() < needed) {
      out.row_errors.push_back({line_no, "expected at least " + std::to_string(needed) +
                                             " fields, found " + std::to_string(f.size())});
      continue;
    }
    const auto month = parse_number<int>(f[col[4]]);
    const auto day = parse_number<int>(f[col[5]]);
    const auto year = parse_number<int>(f[col[6]]);
    const auto temp = parse_number<double>(f[col[7]]);
    if (!month || !day || !year || !temp || !std::isfinite(*temp)) {
      out.row_errors.push_back({line_no, "unparsable Month/Day/Year/AvgTemperature value"});
      continue;
    }
    out.records.push_back(RawRecord{{f[col[0]], f[col[1]], f[col[2]], f[col[3]]},
                                    *month,
                                    *day,
                                    *year,
                                    *temp,
                                    line_no});
  }
  if (data_rows == 0) fail(ErrorCode::empty_file, "CSV input has a header but no data rows");
  if (out.row_errors.size() * 10 > data_rows) {
    std::string lines;
    for (std::size_t i = 0; i < out.row_errors.size() && i < 10; ++i)
      lines += "\n  line " + std::to_string(out.row_errors[i].line) + ": " +
               out.row_errors[i].message;
    fail(ErrorCode::unparsable_rows,
         std::to_string(out.row_errors.size()) + " of " + std::to_string(data_rows) +
             " rows could not be parsed (limit 10%)" + lines);
  }

  std::set<CityKey> keys;
  bool have_year = false;
  for (const auto& r : out.records) {
    keys.insert(r.key);
    if (r.avg_temperature <= missing_threshold) ++out.stats.missing_count;
    if (calendar_date(r.year, r.month, r.day)) {
      out.stats.year_min = have_year ? std::min(out.stats.year_min, r.year) : r.year;
      out.stats.year_max = have_year ? std::max(out.stats.year_max, r.year) : r.year;
      have_year = true;
    }
  }
  out.stats.rows = out.records.size();
  out.stats.cities = keys.size();
  return out;
}

std::vector<CityKey> city_keys(std::span<const RawRecord> records) {
  std::set<CityKey> keys;
  for (const auto& r : records) keys.insert(r.key);
  return {keys.begin(), keys.end()};
}

CityKey resolve_city(std::span<const RawRecord> records, const std::string& query) {
  const auto keys = city_keys(records);
  std::vector<CityKey> matches;
  for (const auto& k : keys)
    if (k.str() == query) return k;
  for (const auto& k : keys)
    if (lower(k.city) == lower(query)) matches.push_back(k);
  if (matches.size() == 1) return matches.front();
  if (matches.empty()) fail(ErrorCode::unknown_city, "no city matches '" + query + "'");
  std::string list;
  for (const auto& m : matches) list += "\n  " + m.str();
  fail(ErrorCode::unknown_city, "city name '" + query + "' is ambiguous; use a full key:" + list);
}

MissingPolicy missing_policy_from_string(const std::string& name) {
  if (name == "drop") return MissingPolicy::drop;
  if (name == "interpolate") return MissingPolicy::interpolate;
  fail(ErrorCode::invalid_config, "missing-value policy must be 'drop' or 'interpolate'");
}

CitySeries clean_series(std::span<const RawRecord> records, const CityKey& key,
                        MissingPolicy policy, double missing_threshold) {
  // (date, value) rows for this city with a valid calendar date, fully sorted
  // so the result does not depend on input row order.
  std::vector<std::pair<std::chrono::sys_days, double>> rows;
  bool seen = false;
  for (const auto& r : records) {
    if (!(r.key == key)) continue;
    seen = true;
    if (auto d = calendar_date(r.year, r.month, r.day)) rows.emplace_back(*d, r.avg_temperature);
  }
  if (!seen) fail(ErrorCode::unknown_city, "no records for city " + key.str());
  std::sort(rows.begin(), rows.end());

  // Collapse duplicate dates to the mean of their non-missing values.
  std::vector<std::chrono::sys_days> dates;
  std::vector<std::optional<double>> values;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    double sum = 0.0;
    std::size_t n = 0;
    for (; j < rows.size() && rows[j].first == rows[i].first; ++j) {
      if (rows[j].second > missing_threshold) {
        sum += rows[j].second;
        ++n;
      }
    }
    dates.push_back(rows[i].first);
    values.push_back(n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt);
    i = j;
  }

  CitySeries out;
  out.key = key;
  std::optional<std::size_t> prev;  // index of the last present value
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]) {
      if (policy == MissingPolicy::interpolate && prev && *prev + 1 < i) {
        const double x0 = static_cast<double>(dates[*prev].time_since_epoch().count());
        const double x1 = static_cast<double>(dates[i].time_since_epoch().count());
        const double y0 = *values[*prev], y1 = *values[i];
        for (std::size_t k = *prev + 1; k < i; ++k) {
          const double x = static_cast<double>(dates[k].time_since_epoch().count());
          out.dates.push_back(dates[k]);
          out.values.push_back(y0 + (y1 - y0) * (x - x0) / (x1 - x0));
        }
      }
      out.dates.push_back(dates[i]);
      out.values.push_back(*values[i]);
      prev = i;
    }
  }
  if (out.values.empty())
    fail(ErrorCode::empty_series, "no usable observations remain for " + key.str() +
                                      " after removing missing values and invalid dates");
  return out;
}

Normalization fit_normalization(std::span<const double> values) {
  if (values.size() < 2)
    fail(ErrorCode::series_too_short, "normalization needs at least 2 values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double std = std::sqrt(ss / static_cast<double>(values.size()));
  if (!(std > 0.0)) fail(ErrorCode::zero_variance, "series has zero variance; cannot normalize");
  return {mean, std};
}

std::vector<double> normalize(std::span<const double> values, const Normalization& norm) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - norm.mean) / norm.std;
  return out;
}

std::vector<double> denormalize(std::span<const double> values, const Normalization& norm) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * norm.std + norm.mean;
  return out;
}

std::size_t split_point(std::size_t length, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorCode::fraction_out_of_range, "train fraction must lie strictly between 0 and 1");
  return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(length)));
}

SeriesSplit chronological_split(const CitySeries& series, double train_fraction) {
  const std::size_t cut = split_point(series.size(), train_fraction);
  return {slice(series, 0, cut), slice(series, cut, series.size())};
}

std::vector<double> WindowedDataset::targets_in_data_units() const {
  return denormalize(targets.values(), normalization);
}

std::string WindowedDataset::content_hash() const {
  std::vector<double> all(inputs.values().begin(), inputs.values().end());
  all.insert(all.end(), targets.values().begin(), targets.values().end());
  return sha256_hex(std::span<const double>(all));
}

WindowedDataset make_windows(std::span<const double> values, std::size_t window,
                             std::size_t horizon, Normalization normalization,
                             std::string provenance) {
  if (window == 0 || horizon == 0)
    fail(ErrorCode::invalid_config, "window and horizon must be positive");
  if (values.size() < window + horizon)
    fail(ErrorCode::series_too_short, "series of length " + std::to_string(values.size()) +
                                          " is too short for window " + std::to_string(window) +
                                          " and horizon " + std::to_string(horizon));
  const std::size_t count = values.size() - window - horizon + 1;
  WindowedDataset ds{Tensor({count, window, 1}), Tensor({count, 1}), normalization,
                     std::move(provenance)};
  for (std::size_t i = 0; i < count; ++i) {
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(i),
              values.begin() + static_cast<std::ptrdiff_t>(i + window),
              ds.inputs.data() + i * window);
    ds.targets[i] = values[i + window + horizon - 1];
  }
  return ds;
}

WindowedDataset subset(const WindowedDataset& ds, std::span<const std::size_t> indices) {
  const std::size_t window = ds.window();
  WindowedDataset out{Tensor({indices.size(), window, 1}), Tensor({indices.size(), 1}),
                      ds.normalization, ds.provenance};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    std::copy(ds.inputs.data() + i * window, ds.inputs.data() + (i + 1) * window,
              out.inputs.data() + r * window);
    out.targets[r] = ds.targets[i];
  }
  return out;
}

CitySeries synthesize_series(const SyntheticSpec& spec) {
  if (spec.length == 0) fail(ErrorCode::invalid_config, "synthetic series length must be positive");
  if (!(spec.period > 0.0)) fail(ErrorCode::invalid_config, "synthetic period must be positive");
  if (spec.noise_std < 0.0) fail(ErrorCode::invalid_config, "noise_std must be non-negative");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  CitySeries s;
  s.key = {"Synthetic", "Synthetic", "", "seed-" + std::to_string(spec.seed)};
  const std::chrono::sys_days start = std::chrono::year{2000} / 1 / 1;
  s.dates.reserve(spec.length);
  s.values.reserve(spec.length);
  for (std::size_t t = 0; t < spec.length; ++t) {
    const double x = static_cast<double>(t);
    double v = spec.amplitude * std::sin(2.0 * std::numbers::pi * x / spec.period) + spec.trend * x;
    if (spec.noise_std > 0.0) v += spec.noise_std * noise(rng);
    s.dates.push_back(start + std::chrono::days{static_cast<int>(t)});
    s.values.push_back(v);
  }
  return s;
}

PreparedData prepare_datasets(const CitySeries& series, std::size_t window,
                              double train_fraction) {
  const SeriesSplit split = chronological_split(series, train_fraction);
  PreparedData out;
  out.split_index = split.train.size();
  out.normalization = fit_normalization(split.train.values);
  const auto train_values = normalize(split.train.values, out.normalization);
  const auto test_values = normalize(split.test.values, out.normalization);
  out.train = make_windows(train_values, window, 1, out.normalization, provenance_of(split.train));
  out.test = make_windows(test_values, window, 1, out.normalization, provenance_of(split.test));
  out.split_hash = sha256_hex(out.train.content_hash() + out.test.content_hash());
  return out;
}

}  // namespace tempcast
