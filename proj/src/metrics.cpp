#include "tempcast/metrics.hpp"

#include <cmath>

#include "tempcast/error.hpp"

namespace tempcast {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> target,
                std::size_t min_len) {
  if (pred.size() != target.size())
    fail(ErrorCode::length_mismatch, "prediction length " + std::to_string(pred.size()) +
                                         " differs from target length " +
                                         std::to_string(target.size()));
  if (pred.empty()) fail(ErrorCode::empty_input, "metrics need at least one value");
  if (pred.size() < min_len)
    fail(ErrorCode::empty_input,
         "this metric needs at least " + std::to_string(min_len) + " values");
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double target_sum_squares(std::span<const double> target) {
  const double m = mean_of(target);
  double ss = 0.0;
  for (double t : target) ss += (t - m) * (t - m);
  if (!(ss > 0.0)) fail(ErrorCode::zero_variance, "target has zero variance");
  return ss;
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

double r2_score(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, 2);
  const double ss_tot = target_sum_squares(target);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    ss_res += (target[i] - pred[i]) * (target[i] - pred[i]);
  return 1.0 - ss_res / ss_tot;
}

double explained_variance(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, 2);
  const double ss_tot = target_sum_squares(target);
  double res_mean = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) res_mean += target[i] - pred[i];
  res_mean /= static_cast<double>(pred.size());
  double ss_res = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = target[i] - pred[i] - res_mean;
    ss_res += d * d;
  }
  // Both variances share the 1/N factor, so the ratio of sums is the ratio of variances.
  return 1.0 - ss_res / ss_tot;
}

EvalReport score(std::span<const double> pred, std::span<const double> target) {
  return {explained_variance(pred, target), r2_score(pred, target), mae(pred, target)};
}

}  // namespace tempcast
