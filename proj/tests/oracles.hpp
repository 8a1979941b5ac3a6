#pragma once

// Independent reference implementations used only by tests. None of these
// share code with the library paths they check.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct ScanResult {
  double score = 0.0;
  std::optional<std::size_t> index;
};

// O(n d) max-cosine scan recomputing every norm from scratch.
inline ScanResult max_cosine_scan(const std::vector<std::vector<double>>& pool,
                                  const std::vector<double>& q) {
  ScanResult best;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    double qq = 0, uu = 0, qu = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      qq += q[k] * q[k];
      uu += pool[j][k] * pool[j][k];
      qu += q[k] * pool[j][k];
    }
    const double c = qu / (std::sqrt(qq) * std::sqrt(uu));
    if (!best.index || c > best.score) {
      best.score = c;
      best.index = j;
    }
  }
  return best;
}

// Pairwise Mann-Whitney count.
inline double auroc_pairwise(const std::vector<double>& pos, const std::vector<double>& neg) {
  double gt = 0, eq = 0;
  for (double p : pos) {
    for (double n : neg) {
      if (p > n) gt += 1;
      else if (p == n) eq += 1;
    }
  }
  return (gt + 0.5 * eq) / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// Tries every observed score (and -inf) as a threshold.
inline double tpr_at_fpr_sweep(const std::vector<double>& pos, const std::vector<double>& neg,
                               double target) {
  std::vector<double> candidates{-std::numeric_limits<double>::infinity()};
  candidates.insert(candidates.end(), pos.begin(), pos.end());
  candidates.insert(candidates.end(), neg.begin(), neg.end());
  double best = 0.0;
  for (double t : candidates) {
    double fp = 0, tp = 0;
    for (double n : neg) fp += n > t ? 1 : 0;
    for (double p : pos) tp += p > t ? 1 : 0;
    if (fp / static_cast<double>(neg.size()) <= target) {
      best = std::max(best, tp / static_cast<double>(pos.size()));
    }
  }
  return best;
}

// Pool-update table as a literal lookup: [det_high][sim_high] -> action.
enum class Action { None, Add, Replace };
inline Action table_action(bool det_high, bool sim_high) {
  static constexpr Action kTable[2][2] = {
      /* det low  */ {Action::None, Action::Replace},
      /* det high */ {Action::Add, Action::None},
  };
  return kTable[det_high ? 1 : 0][sim_high ? 1 : 0];
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(d);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace oracle
