#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "error_code.hpp"
#include "oracles.hpp"
#include "tempcast/metrics.hpp"
#include "tempcast/training.hpp"

using namespace tempcast;

namespace {

std::vector<double> normal_vector(std::mt19937_64& rng, std::size_t n, double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

}  // namespace

TEST_CASE("mae examples") {
  const std::vector<double> a{1, 2}, b{2, 4};
  CHECK(mae(a, a) == 0.0);
  CHECK(mae(a, b) == 1.5);
  CHECK(mae(a, b) == mae_loss(Tensor({2, 1}, a), Tensor({2, 1}, b)).loss);
  CHECK(code_of([&] { mae(a, std::vector<double>{1}); }) == ErrorCode::length_mismatch);
  CHECK(code_of([] { mae(std::vector<double>{}, std::vector<double>{}); }) == ErrorCode::empty_input);
}

TEST_CASE("r2 examples") {
  const std::vector<double> t{1, 2, 4};
  CHECK(r2_score(t, t) == 1.0);
  CHECK(r2_score(std::vector<double>(3, 7.0 / 3.0), t) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r2_score(std::vector<double>{1, 2, 3}, t) == doctest::Approx(1.0 - 1.0 / (14.0 / 3.0)).epsilon(1e-15));
  CHECK(r2_score(std::vector<double>{1, 2, 3}, t) == doctest::Approx(0.7857142857142857).epsilon(1e-15));
  CHECK(code_of([] { r2_score(std::vector<double>{1, 2}, std::vector<double>{3, 3}); }) ==
        ErrorCode::zero_variance);
  CHECK(code_of([] { r2_score(std::vector<double>{1}, std::vector<double>{3}); }) ==
        ErrorCode::empty_input);
}

TEST_CASE("explained variance ignores a constant bias") {
  const std::vector<double> t{1, 2, 4, 8};
  CHECK(explained_variance(t, t) == 1.0);
  std::vector<double> shifted = t;
  for (auto& v : shifted) v += 2.5;
  CHECK(explained_variance(shifted, t) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r2_score(shifted, t) < 1.0);
  CHECK(code_of([] { explained_variance(std::vector<double>{1, 2}, std::vector<double>{3, 3}); }) ==
        ErrorCode::zero_variance);
}

TEST_CASE("metrics agree with two-pass oracles on random vectors") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> len(2, 40);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = len(rng);
    const auto target = normal_vector(rng, n, 50, 10);
    auto pred = normal_vector(rng, n, 0, 3);
    for (std::size_t i = 0; i < n; ++i) pred[i] += target[i] + 0.7;
    const EvalReport r = score(pred, target);
    CHECK(r.r2 == doctest::Approx(oracle::r2(pred, target)).epsilon(1e-10));
    CHECK(r.variance == doctest::Approx(oracle::explained_variance(pred, target)).epsilon(1e-10));
    CHECK(r.r2 <= r.variance);
    CHECK(r.variance <= 1.0);
    CHECK(r.mae >= 0.0);
  }
}

TEST_CASE("r2 equals explained variance when the mean residual is zero") {
  std::mt19937_64 rng(5);
  auto target = normal_vector(rng, 30, 0, 1);
  auto pred = normal_vector(rng, 30, 0, 1);
  double bias = 0.0;
  for (std::size_t i = 0; i < 30; ++i) bias += target[i] - pred[i];
  for (auto& p : pred) p += bias / 30.0;
  CHECK(r2_score(pred, target) == doctest::Approx(explained_variance(pred, target)).epsilon(1e-12));
}

TEST_CASE("metrics are invariant under joint permutation") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto target = normal_vector(rng, 25, 10, 4);
    auto pred = normal_vector(rng, 25, 10, 4);
    const EvalReport before = score(pred, target);
    std::vector<std::size_t> perm(25);
    for (std::size_t i = 0; i < 25; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> p2(25), t2(25);
    for (std::size_t i = 0; i < 25; ++i) {
      p2[i] = pred[perm[i]];
      t2[i] = target[perm[i]];
    }
    const EvalReport after = score(p2, t2);
    CHECK(after.mae == doctest::Approx(before.mae).epsilon(1e-13));
    CHECK(after.r2 == doctest::Approx(before.r2).epsilon(1e-12));
    CHECK(after.variance == doctest::Approx(before.variance).epsilon(1e-12));
  }
}

TEST_CASE("mae is unchanged by a common shift") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    auto target = normal_vector(rng, 15, 0, 2);
    auto pred = normal_vector(rng, 15, 0, 2);
    const double before = mae(pred, target);
    for (std::size_t i = 0; i < 15; ++i) {
      pred[i] += 3.0;
      target[i] += 3.0;
    }
    CHECK(mae(pred, target) == doctest::Approx(before).epsilon(1e-13));
  }
}
