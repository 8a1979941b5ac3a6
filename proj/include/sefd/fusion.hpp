#pragma once

#include <optional>

namespace sefd {

struct FusionConfig {
  double lambda1 = 1.0;
  double lambda2 = 6.0;
  // No default: callers that need hard decisions must set it.
  std::optional<double> decision_epsilon;

  // lambda1 > 0 and lambda2 > 0, both finite; throws ConfigError otherwise.
  void validate() const;
};

enum class Label : int { Human = 0, LLM = 1 };

// s_det / (1 + 10^-lambda1 - s_sim)^(1/lambda2).
//
// `s_det_normalized` is the min-max normalized detector score. Negative
// similarities pass through unclamped. Throws std::domain_error for
// s_sim > 1, which no cosine can produce.
double fuse(double s_det_normalized, double s_sim, const FusionConfig& cfg);

// Amplification applied at s_sim = 1: 10^(lambda1/lambda2).
double max_amplification(const FusionConfig& cfg);

// LLM iff fused > epsilon (strict).
Label classify(double fused, double decision_epsilon);

}  // namespace sefd
