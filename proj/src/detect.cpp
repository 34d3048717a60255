#include "continuum/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace continuum {

namespace {
double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Mean of the k smallest entries (exact, no approximation).
double mean_k_smallest(std::vector<double>& dists, size_t k) {
  std::nth_element(dists.begin(), dists.begin() + k - 1, dists.end());
  double s = 0.0;
  for (size_t i = 0; i < k; ++i) s += dists[i];
  return s / static_cast<double>(k);
}
}  // namespace

BenignIndex::BenignIndex(std::vector<std::vector<double>> embeddings, size_t k)
    : points_(std::move(embeddings)), k_(k) {
  if (points_.size() < k_ + 1) throw TooFewPoints(points_.size(), k_);
  dim_ = points_[0].size();
  for (const auto& p : points_)
    if (p.size() != dim_) throw DimensionMismatch(p.size(), dim_);

  double total = 0.0;
  std::vector<double> dists;
  dists.reserve(points_.size() - 1);
  for (size_t i = 0; i < points_.size(); ++i) {
    dists.clear();
    for (size_t j = 0; j < points_.size(); ++j)
      if (j != i) dists.push_back(euclidean(points_[i], points_[j]));
    total += mean_k_smallest(dists, k_);
  }
  baseline_ = total / static_cast<double>(points_.size());
}

double BenignIndex::score(const std::vector<double>& point) const {
  if (point.size() != dim_) throw DimensionMismatch(point.size(), dim_);
  std::vector<double> dists;
  dists.reserve(points_.size());
  for (const auto& p : points_) dists.push_back(euclidean(p, point));
  const double mean_dist = mean_k_smallest(dists, k_);
  if (baseline_ == 0.0)
    return mean_dist == 0.0 ? 0.0
                            : std::numeric_limits<double>::infinity();
  return mean_dist / baseline_;
}

double choose_threshold(const std::vector<double>& scores,
                        const std::vector<bool>& is_attack) {
  bool any_attack = false, any_benign = false;
  for (bool a : is_attack) (a ? any_attack : any_benign) = true;
  if (!any_attack || !any_benign) throw SingleClassValidation();

  std::vector<double> candidates = scores;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  double best_f1 = -1.0;
  double best_threshold = candidates.back();
  for (double t : candidates) {
    uint64_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
      const bool pred = scores[i] >= t;
      if (pred && is_attack[i]) ++tp;
      if (pred && !is_attack[i]) ++fp;
      if (!pred && is_attack[i]) ++fn;
    }
    const double denom = 2.0 * tp + fp + fn;
    const double f1 = denom == 0.0 ? 0.0 : 2.0 * tp / denom;
    if (f1 > best_f1 || (f1 == best_f1 && t > best_threshold)) {
      best_f1 = f1;
      best_threshold = t;
    }
  }
  return best_threshold;
}

double roc_auc(const std::vector<double>& scores,
               const std::vector<bool>& is_attack) {
  size_t pos = 0, neg = 0;
  for (bool a : is_attack) (a ? pos : neg) += 1;
  if (pos == 0 || neg == 0) return 0.0;

  std::vector<size_t> order(scores.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  uint64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    // All items sharing one score move together (ties grouped).
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (is_attack[order[i]])
        ++tp;
      else
        ++fp;
      ++i;
    }
    const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  return auc;
}

AnomalyReport metrics(const std::vector<double>& scores,
                      const std::vector<bool>& is_attack, double threshold) {
  if (scores.empty() || scores.size() != is_attack.size())
    throw std::invalid_argument("metrics: empty or mismatched inputs");

  AnomalyReport r;
  r.scores = scores;
  r.labels = is_attack;
  r.threshold = threshold;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (pred && is_attack[i]) ++r.tp;
    if (pred && !is_attack[i]) ++r.fp;
    if (!pred && is_attack[i]) ++r.fn;
    if (!pred && !is_attack[i]) ++r.tn;
  }
  auto ratio = [&r](uint64_t num, uint64_t denom) {
    if (denom == 0) {
      r.degenerate_ratio = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(denom);
  };
  r.precision = ratio(r.tp, r.tp + r.fp);
  r.recall = ratio(r.tp, r.tp + r.fn);
  r.f1 = (r.precision + r.recall) == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  r.fp_rate = ratio(r.fp, r.fp + r.tn);
  r.auc = roc_auc(scores, is_attack);
  return r;
}

std::string AnomalyReport::to_json() const {
  nlohmann::json j;
  j["threshold"] = threshold;
  j["tp"] = tp;
  j["tn"] = tn;
  j["fp"] = fp;
  j["fn"] = fn;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["auc"] = auc;
  j["fp_rate"] = fp_rate;
  j["degenerate_ratio"] = degenerate_ratio;
  auto items = nlohmann::json::array();
  for (size_t i = 0; i < scores.size(); ++i)
    items.push_back({{"score", scores[i]},
                     {"label", labels[i] ? "attack" : "benign"},
                     {"predicted", scores[i] >= threshold ? "attack" : "benign"}});
  j["items"] = std::move(items);
  return j.dump(2);
}

AnomalyReport AnomalyReport::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  AnomalyReport r;
  r.threshold = j.at("threshold").get<double>();
  r.tp = j.at("tp").get<uint64_t>();
  r.tn = j.at("tn").get<uint64_t>();
  r.fp = j.at("fp").get<uint64_t>();
  r.fn = j.at("fn").get<uint64_t>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.auc = j.at("auc").get<double>();
  r.fp_rate = j.at("fp_rate").get<double>();
  r.degenerate_ratio = j.at("degenerate_ratio").get<bool>();
  for (const auto& item : j.at("items")) {
    r.scores.push_back(item.at("score").get<double>());
    r.labels.push_back(item.at("label").get<std::string>() == "attack");
  }
  return r;
}

}  // namespace continuum
