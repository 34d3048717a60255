#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace continuum {

struct TooFewPoints : std::runtime_error {
  TooFewPoints(size_t n, size_t k)
      : std::runtime_error("need at least k+1 = " + std::to_string(k + 1) +
                           " points, got " + std::to_string(n)) {}
};

struct DimensionMismatch : std::runtime_error {
  DimensionMismatch(size_t got, size_t want)
      : std::runtime_error("point has dim " + std::to_string(got) +
                           ", index has " + std::to_string(want)) {}
};

struct SingleClassValidation : std::runtime_error {
  SingleClassValidation()
      : std::runtime_error("validation needs both benign and attack scores") {}
};

// Exact Euclidean k-NN over the benign training embeddings. baseline is the
// mean over training points of their mean distance to their own k nearest
// neighbors, self-match excluded.
class BenignIndex {
 public:
  BenignIndex(std::vector<std::vector<double>> embeddings, size_t k);

  double score(const std::vector<double>& point) const;
  double baseline() const { return baseline_; }
  size_t k() const { return k_; }
  size_t size() const { return points_.size(); }

 private:
  std::vector<std::vector<double>> points_;
  size_t k_;
  size_t dim_;
  double baseline_;
};

// Highest-F1 threshold over the validation sweep; ties break toward the
// higher threshold (fewer false positives). Items with score >= threshold
// are predicted malicious.
double choose_threshold(const std::vector<double>& scores,
                        const std::vector<bool>& is_attack);

struct AnomalyReport {
  std::vector<double> scores;
  std::vector<bool> labels;  // true = attack
  double threshold = 0.0;
  uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0, auc = 0.0, fp_rate = 0.0;
  bool degenerate_ratio = false;  // some ratio had a zero denominator

  std::string to_json() const;
  static AnomalyReport from_json(const std::string& text);
};

AnomalyReport metrics(const std::vector<double>& scores,
                      const std::vector<bool>& is_attack, double threshold);

// Area under the ROC curve by trapezoidal integration over the full
// threshold sweep, ties grouped.
double roc_auc(const std::vector<double>& scores,
               const std::vector<bool>& is_attack);

}  // namespace continuum
