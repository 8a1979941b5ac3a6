#include "sefd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace sefd {

namespace {

void split(std::span<const ScoredSample> samples, std::vector<double>& pos,
           std::vector<double>& neg) {
  for (const auto& s : samples) {
    if (!std::isfinite(s.score)) throw InputError("metrics: non-finite score");
    (s.positive ? pos : neg).push_back(s.score);
  }
  if (pos.empty()) throw UndefinedMetricError("metric undefined: no positive (LLM) samples");
  if (neg.empty()) throw UndefinedMetricError("metric undefined: no negative (human) samples");
}

}  // namespace

double auroc(std::span<const ScoredSample> samples) {
  std::vector<double> pos, neg;
  split(samples, pos, neg);
  std::vector<ScoredSample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredSample& a, const ScoredSample& b) { return a.score < b.score; });

  // Twice the Mann-Whitney count, kept integral.
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    std::uint64_t p = 0, n = 0;
    for (; j < sorted.size() && sorted[j].score == sorted[i].score; ++j) {
      (sorted[j].positive ? p : n) += 1;
    }
    twice_u += 2 * p * neg_below + p * n;
    neg_below += n;
    i = j;
  }
  const auto pairs = static_cast<std::uint64_t>(pos.size()) * neg.size();
  return static_cast<double>(twice_u) / static_cast<double>(2 * pairs);
}

double tpr_at_fpr(std::span<const ScoredSample> samples, double fpr_target) {
  std::vector<double> pos, neg;
  split(samples, pos, neg);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> thresholds;
  thresholds.reserve(samples.size() + 1);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  thresholds.insert(thresholds.end(), pos.begin(), pos.end());
  thresholds.insert(thresholds.end(), neg.begin(), neg.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const auto above = [](const std::vector<double>& v, double t) {
    return static_cast<double>(v.end() - std::upper_bound(v.begin(), v.end(), t));
  };
  const double n = static_cast<double>(neg.size());
  const double p = static_cast<double>(pos.size());
  // FPR is non-increasing in t and TPR likewise, so the lowest admissible
  // threshold maximizes TPR.
  for (double t : thresholds) {
    if (above(neg, t) / n <= fpr_target) return above(pos, t) / p;
  }
  return 0.0;
}

std::string fpr_key(double target) { return nlohmann::json(target).dump(); }

MetricsReport compute_report(const std::string& group, std::span<const ScoredSample> samples,
                             std::span<const double> fpr_targets) {
  MetricsReport r;
  r.group = group;
  r.auroc = auroc(samples);
  for (double t : fpr_targets) r.tpr_at_fpr[t] = tpr_at_fpr(samples, t);
  for (const auto& s : samples) (s.positive ? r.positives : r.negatives) += 1;
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json tpr = nlohmann::json::object();
  for (const auto& [target, value] : r.tpr_at_fpr) tpr[fpr_key(target)] = value;
  return {{"group", r.group},
          {"auroc", r.auroc},
          {"tpr_at_fpr", tpr},
          {"counts", {{"positives", r.positives}, {"negatives", r.negatives}}}};
}

std::vector<MetricsReport> evaluate_groups(std::span<const StepOutcome> outcomes,
                                           std::span<const CandidateText> labeled_stream,
                                           std::span<const double> fpr_targets,
                                           ScoreField field) {
  std::unordered_map<std::string, TruthLabel> truth;
  for (const auto& c : labeled_stream) {
    if (c.truth) truth.emplace(c.id, *c.truth);
  }
  std::vector<std::string> unlabeled;
  std::vector<ScoredSample> negatives;
  std::map<TruthLabel, std::vector<ScoredSample>> positives;
  for (const auto& o : outcomes) {
    auto it = truth.find(o.id);
    if (it == truth.end()) {
      unlabeled.push_back(o.id);
      continue;
    }
    const double score = field == ScoreField::Fused ? o.fused : o.normalized_score;
    if (it->second.is_positive()) {
      positives[it->second].push_back({score, true});
    } else {
      negatives.push_back({score, false});
    }
  }
  if (!unlabeled.empty()) {
    std::string msg = "outcomes without a truth label:";
    for (const auto& id : unlabeled) msg += " " + id;
    throw InputError(msg);
  }
  std::vector<MetricsReport> reports;
  for (auto& [label, pos] : positives) {
    std::vector<ScoredSample> samples = pos;
    samples.insert(samples.end(), negatives.begin(), negatives.end());
    reports.push_back(compute_report(label.to_string(), samples, fpr_targets));
  }
  return reports;
}

}  // namespace sefd
