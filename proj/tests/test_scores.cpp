#include <doctest.h>

#include <algorithm>
#include <vector>

#include "cptc/errors.hpp"
#include "cptc/rng.hpp"
#include "cptc/scores.hpp"

using cptc::conformal_quantile;
using cptc::effective_level;
using cptc::interval_from_threshold;
using cptc::kInf;
using cptc::nonconformity;
using cptc::ScorePool;

namespace {

// Independent reference: sort the pool, append +inf, walk ranks until
// r >= level * (n + 1).
double brute_quantile(std::vector<double> scores, double level) {
  std::sort(scores.begin(), scores.end());
  scores.push_back(kInf);
  double n1 = static_cast<double>(scores.size());
  std::size_t r = 1;
  while (static_cast<double>(r) + 1e-9 < level * n1) ++r;
  return scores[r - 1];
}

ScorePool make_pool(const std::vector<double>& scores) {
  ScorePool pool;
  for (double s : scores) pool.insert(s);
  return pool;
}

}  // namespace

TEST_CASE("nonconformity is the absolute residual") {
  CHECK(nonconformity(3.0, 1.0) == 2.0);
  CHECK(nonconformity(1.0, 3.0) == 2.0);
  CHECK(nonconformity(-1.5, -1.5) == 0.0);
}

TEST_CASE("conformal quantile on pinned examples") {
  // empty pool: the +inf element is the only candidate
  CHECK(conformal_quantile(ScorePool{}, 0.9) == kInf);

  // {1,2,3,4} at level 0.75: rank ceil(0.75*5) = 4 -> score 4
  ScorePool small = make_pool({1.0, 2.0, 3.0, 4.0});
  CHECK(conformal_quantile(small, 0.75) == 4.0);
  CHECK(brute_quantile({1.0, 2.0, 3.0, 4.0}, 0.75) == 4.0);

  // 19 scores at level 0.9: rank ceil(0.9*20) = 18 -> 18th smallest
  std::vector<double> nineteen;
  for (int i = 1; i <= 19; ++i) nineteen.push_back(static_cast<double>(i));
  CHECK(conformal_quantile(make_pool(nineteen), 0.9) == 18.0);
  CHECK(brute_quantile(nineteen, 0.9) == 18.0);

  // level 1 always reaches the +inf element
  CHECK(conformal_quantile(small, 1.0) == kInf);
  // level 0 clamps to rank 1
  CHECK(conformal_quantile(small, 0.0) == 1.0);
}

TEST_CASE("conformal quantile rejects bad levels") {
  ScorePool pool = make_pool({1.0});
  CHECK_THROWS_AS(conformal_quantile(pool, -0.1), cptc::ValidationError);
  CHECK_THROWS_AS(conformal_quantile(pool, 1.1), cptc::ValidationError);
}

TEST_CASE("conformal quantile matches the brute-force reference") {
  cptc::Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    int n = rng.uniform_int(51);
    std::vector<double> scores;
    for (int i = 0; i < n; ++i) {
      double s = 10.0 * rng.uniform();
      scores.push_back(s);
      if (rng.uniform() < 0.2) scores.push_back(s);  // force ties
    }
    if (static_cast<int>(scores.size()) > 50) scores.resize(50);
    ScorePool pool = make_pool(scores);
    for (int i = 0; i <= 20; ++i) {
      double level = static_cast<double>(i) / 20.0;
      CHECK(conformal_quantile(pool, level) == brute_quantile(scores, level));
    }
  }
}

TEST_CASE("conformal quantile is monotone in the level") {
  cptc::Rng rng(42);
  std::vector<double> scores;
  for (int i = 0; i < 30; ++i) scores.push_back(5.0 * rng.uniform());
  ScorePool pool = make_pool(scores);
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    double q = conformal_quantile(pool, static_cast<double>(i) / 100.0);
    CHECK(q >= prev);
    prev = q;
  }
}

TEST_CASE("finite-sample coverage of the conformal quantile") {
  // iid scores: P(new score <= quantile at 1 - alpha) >= 1 - alpha
  cptc::Rng rng(77);
  const double alpha = 0.1;
  const int n = 19;
  const int trials = 10000;
  int hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    ScorePool pool;
    for (int i = 0; i < n; ++i) pool.insert(rng.uniform());
    double q = conformal_quantile(pool, 1.0 - alpha);
    if (rng.uniform() <= q) ++hits;
  }
  double cov = static_cast<double>(hits) / trials;
  double se = std::sqrt(0.9 * 0.1 / trials);
  CHECK(cov >= 1.0 - alpha - 3.0 * se);
}

TEST_CASE("score pool keeps multiset semantics and evicts oldest first") {
  ScorePool pool(3);
  pool.insert(5.0);
  pool.insert(1.0);
  pool.insert(5.0);
  CHECK(pool.sorted() == std::vector<double>{1.0, 5.0, 5.0});
  pool.insert(2.0);  // evicts the first 5.0
  CHECK(pool.sorted() == std::vector<double>{1.0, 2.0, 5.0});
  pool.insert(7.0);  // evicts 1.0
  CHECK(pool.sorted() == std::vector<double>{2.0, 5.0, 7.0});
  CHECK(pool.size() == 3);

  ScorePool unbounded;
  for (int i = 0; i < 100; ++i) unbounded.insert(1.0);
  CHECK(unbounded.size() == 100);
}

TEST_CASE("score pool rejects invalid scores and capacities") {
  ScorePool pool;
  CHECK_THROWS_AS(pool.insert(-1.0), cptc::ValidationError);
  CHECK_THROWS_AS(pool.insert(std::numeric_limits<double>::quiet_NaN()),
                  cptc::ValidationError);
  CHECK_THROWS_AS(ScorePool(0), cptc::ValidationError);
}

TEST_CASE("effective level clips only at the ends") {
  CHECK(*effective_level(0.1) == doctest::Approx(0.9));
  CHECK(*effective_level(0.0) == 1.0);
  CHECK(*effective_level(-0.3) == 1.0);   // below zero: full-strength level
  CHECK_FALSE(effective_level(1.0));      // at or above one: empty set
  CHECK_FALSE(effective_level(1.7));
  CHECK(*effective_level(0.999) == doctest::Approx(0.001));
}

TEST_CASE("interval from threshold") {
  cptc::PredictionSet band = interval_from_threshold(2.0, 0.5);
  REQUIRE(band.intervals.size() == 1);
  CHECK(band.intervals[0] == cptc::Interval{1.5, 2.5});

  CHECK(interval_from_threshold(2.0, std::nullopt).empty_set());

  cptc::PredictionSet line = interval_from_threshold(2.0, kInf);
  REQUIRE(line.intervals.size() == 1);
  CHECK(line.intervals[0] == cptc::Interval{-kInf, kInf});

  cptc::PredictionSet point = interval_from_threshold(2.0, 0.0);
  REQUIRE(point.intervals.size() == 1);
  CHECK(point.intervals[0] == cptc::Interval{2.0, 2.0});

  CHECK_THROWS_AS(interval_from_threshold(0.0, -1.0), cptc::ValidationError);
}
