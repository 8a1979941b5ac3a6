#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sefd/candidate.hpp"
#include "sefd/embedding_provider.hpp"
#include "sefd/fusion.hpp"
#include "sefd/retrieval_pool.hpp"
#include "sefd/scoring.hpp"

namespace sefd {

// Pool-update thresholds. epsilon_det is on the ORIENTED RAW detector scale;
// epsilon_sim is a cosine. Fusion, by contrast, consumes the normalized score.
struct Thresholds {
  double epsilon_det = 0.0;
  double epsilon_sim = 0.85;

  void validate() const;
};

enum class PoolActionKind { None, Add, Replace };

struct PoolAction {
  PoolActionKind kind = PoolActionKind::None;
  std::optional<std::size_t> index;  // set for Replace

  friend bool operator==(const PoolAction&, const PoolAction&) = default;
};

// Rows of the pool updating table.
//   1: det >= e_det, sim >= e_sim -> none
//   2: det >= e_det, sim <  e_sim -> add
//   3: det <  e_det, sim >= e_sim -> replace the best match
//   4: det <  e_det, sim <  e_sim -> none
// An empty pool has no best match, so its similarity never counts as
// reaching e_sim.
int situation_for(double oriented_raw, const SimilarityResult& sim, const Thresholds& t);
PoolAction pool_action_for(double oriented_raw, const SimilarityResult& sim, const Thresholds& t);

struct StepOutcome {
  std::string id;
  double raw_score = 0.0;
  double normalized_score = 0.0;
  double similarity = 0.0;
  std::optional<std::size_t> argmax_index;
  double fused = 0.0;
  std::optional<int> decision;  // present iff a decision epsilon is configured
  int situation = 4;
  PoolAction pool_action;
  std::size_t pool_size_after = 0;
};

nlohmann::json to_json(const StepOutcome& o);
StepOutcome outcome_from_json(const nlohmann::json& j);
std::vector<StepOutcome> read_outcomes(const std::string& path);
void write_outcomes(const std::string& path, std::span<const StepOutcome> outcomes);

struct PipelineConfig {
  DetectorSpec detector;
  double epsilon_sim = 0.85;
  FusionConfig fusion;
  bool update_pool = true;     // false: --no-pool-update (frozen pool)
  bool use_fusion = true;      // false: --no-fusion (decide on normalized s_det)
  bool running_minmax = false;

  Thresholds thresholds() const { return {detector.epsilon_det, epsilon_sim}; }
  void validate() const;
};

// The sequential engine. One mutable state; texts are submitted one at a time
// in stream order. Not thread-safe; run independent pipelines for parallelism.
class Pipeline {
 public:
  // `initial_pool` may be absent, in which case the pool is created with the
  // dimension of the first embedding seen. Providers are borrowed and may be
  // null when every text carries its score/embedding inline.
  Pipeline(PipelineConfig config, std::optional<RetrievalPool> initial_pool,
           ScoreProvider* scores = nullptr, EmbeddingProvider* embeddings = nullptr);

  // Classifies one text and applies the pool update. On error nothing is
  // mutated.
  StepOutcome step(const CandidateText& text);

  // Runs the whole stream; failures are rethrown as StreamError carrying the
  // failing index. Outcomes of earlier texts are lost with the exception but
  // the pool keeps their updates.
  std::vector<StepOutcome> run(std::span<const CandidateText> stream);

  const std::optional<RetrievalPool>& pool() const { return pool_; }
  const PipelineConfig& config() const { return config_; }
  std::size_t steps_completed() const { return steps_; }

 private:
  double resolve_score(const CandidateText& text);
  std::vector<double> resolve_embedding(const CandidateText& text);

  PipelineConfig config_;
  std::optional<RetrievalPool> pool_;
  ScoreProvider* scores_;
  EmbeddingProvider* embeddings_;
  RunningMinMax running_;
  std::size_t steps_ = 0;
};

}  // namespace sefd
