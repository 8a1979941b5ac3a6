#include "sefd/fusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sefd/errors.hpp"

namespace sefd {

void FusionConfig::validate() const {
  if (!(std::isfinite(lambda1) && lambda1 > 0.0)) {
    throw ConfigError("lambda1 must be a finite positive number, got " + std::to_string(lambda1));
  }
  if (!(std::isfinite(lambda2) && lambda2 > 0.0)) {
    throw ConfigError("lambda2 must be a finite positive number, got " + std::to_string(lambda2));
  }
  if (decision_epsilon && !std::isfinite(*decision_epsilon)) {
    throw ConfigError("decision_epsilon must be finite");
  }
}

double fuse(double s_det_normalized, double s_sim, const FusionConfig& cfg) {
  if (!(s_sim <= 1.0)) {
    throw std::domain_error("similarity " + std::to_string(s_sim) + " outside cosine range");
  }
  const double base = 1.0 + std::pow(10.0, -cfg.lambda1) - s_sim;
  return s_det_normalized / std::pow(base, 1.0 / cfg.lambda2);
}

double max_amplification(const FusionConfig& cfg) {
  return std::pow(10.0, cfg.lambda1 / cfg.lambda2);
}

Label classify(double fused, double decision_epsilon) {
  return fused > decision_epsilon ? Label::LLM : Label::Human;
}

}  // namespace sefd
