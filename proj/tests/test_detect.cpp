#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "continuum/detect.hpp"
#include "support/oracles.hpp"

using namespace continuum;

namespace {
std::vector<std::vector<double>> line_points(std::vector<double> xs) {
  std::vector<std::vector<double>> pts;
  for (double x : xs) pts.push_back({x});
  return pts;
}
}  // namespace

TEST_CASE("coincident points give a zero baseline") {
  BenignIndex index(line_points({2.0, 2.0, 2.0}), 1);
  CHECK(index.baseline() == doctest::Approx(0.0));
  CHECK(index.score({2.0}) == 0.0);
  CHECK(std::isinf(index.score({3.0})));
}

TEST_CASE("baseline on {0,1,3} with k=1 is 4/3") {
  BenignIndex index(line_points({0.0, 1.0, 3.0}), 1);
  // nearest-other distances: 1, 1, 2
  CHECK(index.baseline() == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("k >= N is rejected") {
  CHECK_THROWS_AS(BenignIndex(line_points({0.0, 1.0}), 2), TooFewPoints);
  CHECK_THROWS_AS(BenignIndex(line_points({0.0, 1.0, 2.0}), 3), TooFewPoints);
}

TEST_CASE("scoring a training point uses its nearest other point") {
  BenignIndex index(line_points({0.0, 1.0, 3.0}), 1);
  // query 0 hits itself at distance 0
  CHECK(index.score({0.0}) == doctest::Approx(0.0));
  // query 0.4: nearest is 1 at 0.6... no, 0 at 0.4
  CHECK(index.score({0.4}) == doctest::Approx(0.4 / (4.0 / 3.0)));
}

TEST_CASE("score grows monotonically with radial distance") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({normal(rng), normal(rng)});
  BenignIndex index(pts, 5);

  double prev = -1.0;
  for (double radius : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double s = index.score({radius, radius});
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("exact knn matches the brute-force double loop") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> unif(-3, 3);
  for (int trial = 0; trial < 5; ++trial) {
    const size_t n = 20 + rng() % 480;
    const size_t dim = 1 + rng() % 6;
    const size_t k = 1 + rng() % 7;
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts)
      for (auto& v : p) v = unif(rng);
    BenignIndex index(pts, k);

    for (int q = 0; q < 10; ++q) {
      std::vector<double> query(dim);
      for (auto& v : query) v = unif(rng);
      const double expected =
          oracles::knn_mean_distance(pts, query, k) / index.baseline();
      CHECK(index.score(query) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("dimension mismatches are rejected") {
  BenignIndex index(line_points({0.0, 1.0, 3.0}), 1);
  CHECK_THROWS_AS(index.score({1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("threshold on separable scores picks the attack value") {
  // any threshold in (1.0, 3.0] gives F1 = 1; ties break high
  CHECK(choose_threshold({0.9, 1.0, 3.0}, {false, false, true}) ==
        doctest::Approx(3.0));
}

TEST_CASE("threshold on interleaved scores matches the brute-force sweep") {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> unif(0, 2);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> scores;
    std::vector<bool> labels;
    bool pos = false, neg = false;
    for (int i = 0; i < 25; ++i) {
      scores.push_back(unif(rng));
      labels.push_back(coin(rng));
      (labels.back() ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    const double got = choose_threshold(scores, labels);
    CHECK(got == oracles::reference_best_threshold(scores, labels));

    const auto m = metrics(scores, labels, got);
    if (m.f1 == 1.0) continue;
    CHECK(m.f1 < 1.0);  // imperfect separation stays < 1 but defined
  }
}

TEST_CASE("single-class validation is rejected") {
  CHECK_THROWS_AS(choose_threshold({1.0, 2.0}, {false, false}),
                  SingleClassValidation);
  CHECK_THROWS_AS(choose_threshold({1.0, 2.0}, {true, true}),
                  SingleClassValidation);
}

TEST_CASE("perfect separation gives all-ones metrics") {
  auto r = metrics({0.1, 0.2, 5.0, 6.0}, {false, false, true, true}, 1.0);
  CHECK(r.tp == 2);
  CHECK(r.tn == 2);
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.f1 == doctest::Approx(1.0));
  CHECK(r.auc == doctest::Approx(1.0));
  CHECK(r.fp_rate == doctest::Approx(0.0));
}

TEST_CASE("balanced half-right classifier scores 0.5 everywhere") {
  auto r = metrics({2.0, 0.1, 2.0, 0.1}, {true, true, false, false}, 1.0);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.tn == 1);
  CHECK(r.precision == doctest::Approx(0.5));
  CHECK(r.recall == doctest::Approx(0.5));
  CHECK(r.f1 == doctest::Approx(0.5));
}

TEST_CASE("random scores give AUC near one half") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> unif(0, 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (int i = 0; i < 4000; ++i) {
    scores.push_back(unif(rng));
    labels.push_back(coin(rng));
  }
  const double auc = roc_auc(scores, labels);
  CHECK(auc == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(auc - 0.5) < 0.05);
}

TEST_CASE("metrics match the reference on randomized confusion setups") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unif(0, 1);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores;
    std::vector<bool> labels;
    const int n = 5 + int(rng() % 40);
    for (int i = 0; i < n; ++i) {
      // quantized scores force ties through the AUC sweep
      scores.push_back(std::round(unif(rng) * 8.0) / 8.0);
      labels.push_back(coin(rng));
    }
    const double threshold = std::round(unif(rng) * 8.0) / 8.0;
    const auto got = metrics(scores, labels, threshold);
    const auto want = oracles::reference_metrics(scores, labels, threshold);
    CHECK(got.tp == want.tp);
    CHECK(got.tn == want.tn);
    CHECK(got.fp == want.fp);
    CHECK(got.fn == want.fn);
    CHECK(got.precision == want.precision);
    CHECK(got.recall == want.recall);
    CHECK(got.f1 == want.f1);
    CHECK(got.auc == want.auc);
  }
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> unif(0.1, 4);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (int i = 0; i < 60; ++i) {
    scores.push_back(unif(rng));
    labels.push_back(coin(rng));
  }
  const double base = roc_auc(scores, labels);

  auto transformed = scores;
  for (auto& s : transformed) s = std::log(s);
  CHECK(roc_auc(transformed, labels) == doctest::Approx(base).epsilon(1e-12));
  for (auto& s : transformed) s = std::exp(s) * 3.0 + 7.0;
  CHECK(roc_auc(transformed, labels) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("stored counts are recomputable from the stored scores") {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> unif(0, 2);
  std::bernoulli_distribution coin(0.4);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (int i = 0; i < 50; ++i) {
    scores.push_back(unif(rng));
    labels.push_back(coin(rng));
  }
  const auto r = metrics(scores, labels, 1.0);
  const auto again = metrics(r.scores, r.labels, r.threshold);
  CHECK(again.tp == r.tp);
  CHECK(again.tn == r.tn);
  CHECK(again.fp == r.fp);
  CHECK(again.fn == r.fn);
  CHECK(again.auc == r.auc);
}

TEST_CASE("degenerate ratios report zero with a flag") {
  auto r = metrics({0.1, 0.2}, {false, false}, 1.0);
  CHECK(r.precision == 0.0);  // no predicted positives
  CHECK(r.recall == 0.0);     // no actual positives
  CHECK(r.degenerate_ratio);
}

TEST_CASE("anomaly report JSON round-trips") {
  auto r = metrics({0.5, 1.5, 2.5}, {false, true, true}, 1.0);
  auto parsed = AnomalyReport::from_json(r.to_json());
  CHECK(parsed.tp == r.tp);
  CHECK(parsed.scores == r.scores);
  CHECK(parsed.labels == r.labels);
  CHECK(parsed.threshold == r.threshold);
  CHECK(parsed.f1 == r.f1);
}
