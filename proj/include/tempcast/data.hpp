#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tempcast/model.hpp"
#include "tempcast/tensor.hpp"

namespace tempcast {

/// Temperatures at or below this value are treated as missing observations.
inline constexpr double kDefaultMissingThreshold = -90.0;

struct CityKey {
  std::string region;
  std::string country;
  std::string state;
  std::string city;

  /// "Region/Country/State/City"
  std::string str() const;
  friend auto operator<=>(const CityKey&, const CityKey&) = default;
  friend bool operator==(const CityKey&, const CityKey&) = default;
};

struct RawRecord {
  CityKey key;
  int month = 0;
  int day = 0;
  int year = 0;
  double avg_temperature = 0.0;
  std::size_t line = 0;  // 1-based line in the source file
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct IngestStats {
  std::size_t rows = 0;
  std::size_t cities = 0;
  int year_min = 0;
  int year_max = 0;
  std::size_t missing_count = 0;
};

std::string to_json(const IngestStats& stats);

struct ParsedCsv {
  std::vector<RawRecord> records;
  IngestStats stats;
  std::vector<RowError> row_errors;  // tolerated bad rows (at most 10% of the file)
};

/// Reads the eight-field daily temperature CSV. The header may list the
/// columns in any order and any letter case.
ParsedCsv parse_csv(const std::filesystem::path& path,
                    double missing_threshold = kDefaultMissingThreshold);
ParsedCsv parse_csv_text(std::string_view text,
                         double missing_threshold = kDefaultMissingThreshold);

std::vector<CityKey> city_keys(std::span<const RawRecord> records);

/// Accepts a full "Region/Country/State/City" key or a bare city name that
/// matches exactly one key.
CityKey resolve_city(std::span<const RawRecord> records, const std::string& query);

enum class MissingPolicy { drop, interpolate };

MissingPolicy missing_policy_from_string(const std::string& name);

struct CitySeries {
  CityKey key;
  std::vector<std::chrono::sys_days> dates;  // strictly increasing
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

/// One city's records as a clean daily series: invalid dates removed,
/// duplicate dates averaged, missing values dropped or interpolated in time.
/// Missing runs at either end have no two-sided neighbours and are dropped
/// under both policies.
CitySeries clean_series(std::span<const RawRecord> records, const CityKey& key,
                        MissingPolicy policy, double missing_threshold = kDefaultMissingThreshold);

/// z-score statistics (population std) of the given values.
Normalization fit_normalization(std::span<const double> values);
std::vector<double> normalize(std::span<const double> values, const Normalization& norm);
std::vector<double> denormalize(std::span<const double> values, const Normalization& norm);

struct SeriesSplit {
  CitySeries train;
  CitySeries test;
};

/// Index of the first test element: ⌊fraction·length⌋.
std::size_t split_point(std::size_t length, double train_fraction);
SeriesSplit chronological_split(const CitySeries& series, double train_fraction = 0.8);

struct WindowedDataset {
  Tensor inputs;   // [W×window×1], normalized
  Tensor targets;  // [W×1], normalized
  Normalization normalization;
  std::string provenance;

  std::size_t size() const { return targets.empty() ? 0 : targets.dim(0); }
  std::size_t window() const { return inputs.empty() ? 0 : inputs.dim(1); }
  std::vector<double> targets_in_data_units() const;
  /// SHA-256 over inputs then targets.
  std::string content_hash() const;
};

/// Sliding windows: input values[i, i+window), target values[i+window+horizon−1].
WindowedDataset make_windows(std::span<const double> values, std::size_t window,
                             std::size_t horizon = 1, Normalization normalization = {},
                             std::string provenance = {});

/// Rows `indices` of a dataset, in that order.
WindowedDataset subset(const WindowedDataset& ds, std::span<const std::size_t> indices);

struct SyntheticSpec {
  std::size_t length = 4000;
  std::uint64_t seed = 0;
  double noise_std = 0.0;
  double amplitude = 15.0;
  double period = 365.0;
  double trend = 0.001;
};

/// v[t] = amplitude·sin(2πt/period) + trend·t + N(0, noise_std²), dated daily
/// from 2000-01-01.
CitySeries synthesize_series(const SyntheticSpec& spec);

/// Split → fit normalization on the train slice → normalize both → window each.
struct PreparedData {
  WindowedDataset train;
  WindowedDataset test;
  Normalization normalization;
  std::size_t split_index = 0;
  std::string split_hash;  // identifies the exact (train, test) tensors
};

PreparedData prepare_datasets(const CitySeries& series, std::size_t window,
                              double train_fraction = 0.8);

}  // namespace tempcast
