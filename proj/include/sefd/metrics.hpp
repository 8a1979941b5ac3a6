#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sefd/candidate.hpp"
#include "sefd/errors.hpp"
#include "sefd/pipeline.hpp"

namespace sefd {

struct ScoredSample {
  double score = 0.0;
  bool positive = false;  // LLM or paraphrase
};

// One class of the sample set is empty.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Mann-Whitney statistic: (#{s_p > s_n} + 0.5 #{s_p = s_n}) / (P N).
// O(n log n); ties handled group-wise.
double auroc(std::span<const ScoredSample> samples);

// Largest TPR over thresholds t drawn from the observed scores (plus one
// below all of them) whose FPR does not exceed `fpr_target`. A sample is
// called positive when score > t. No interpolation.
double tpr_at_fpr(std::span<const ScoredSample> samples, double fpr_target);

struct MetricsReport {
  std::string group;
  double auroc = 0.0;
  std::map<double, double> tpr_at_fpr;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

MetricsReport compute_report(const std::string& group, std::span<const ScoredSample> samples,
                             std::span<const double> fpr_targets);

// Keys of the "tpr_at_fpr" object, e.g. 0.01 -> "0.01".
std::string fpr_key(double target);

nlohmann::json to_json(const MetricsReport& r);

enum class ScoreField { Fused, Normalized };

// Groups outcomes by the truth label of their text: one report per distinct
// positive label ("llm", "paraphrase-1", ...), each scored against every
// human text. Throws InputError listing ids that lack a truth label.
std::vector<MetricsReport> evaluate_groups(std::span<const StepOutcome> outcomes,
                                           std::span<const CandidateText> labeled_stream,
                                           std::span<const double> fpr_targets,
                                           ScoreField field = ScoreField::Fused);

}  // namespace sefd
