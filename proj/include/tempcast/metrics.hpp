#pragma once

#include <span>
#include <string>

namespace tempcast {

/// One row of the model comparison: explained variance, R² and MAE.
struct EvalReport {
  double variance = 0.0;  // explained-variance score
  double r2 = 0.0;
  double mae = 0.0;  // data units
};

double mae(std::span<const double> pred, std::span<const double> target);

/// 1 − Σ(target−pred)² / Σ(target−mean(target))²
double r2_score(std::span<const double> pred, std::span<const double> target);

/// 1 − Var(target−pred) / Var(target), population variances. Unlike R² this
/// ignores a constant bias in the predictions, so r2 ≤ explained_variance.
double explained_variance(std::span<const double> pred, std::span<const double> target);

EvalReport score(std::span<const double> pred, std::span<const double> target);

}  // namespace tempcast
