#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "sefd/candidate.hpp"
#include "sefd/retrieval_pool.hpp"
#include "sefd/scoring.hpp"

namespace sefd {

// Geometry of synthetic embeddings. Every generated vector is unit length.
//
// Each LLM original is the anchor of its topic. A human answer on the same
// topic has cosine to that anchor drawn uniformly from the human band. A
// paraphrase chain x0 -> x1 -> ... rotates the previous vector by
// arccos(c_step) inside a random 2-plane that contains it, with the rotation
// direction tilted away from x0 so that cos(x0, xk) strictly decreases.
struct DriftModel {
  std::size_t dimension = 64;
  double c_step = 0.93;
  double human_band_lo = 0.55;
  double human_band_hi = 0.80;

  void validate() const;
};

struct SynthConfig {
  SourceModel source;
  DriftModel drift;
  std::size_t llm_count = 300;
  std::size_t human_count = 300;
  int depth = 3;  // paraphrase rounds K
  std::uint64_t seed = 1;
  // Nominal raw-score range of the synthetic detector, written out as its
  // calibration bounds.
  CalibrationBounds calibration{-4.0, 4.0};

  void validate() const;
};

nlohmann::json to_json(const SynthConfig& c);
// Keys absent from `j` keep their defaults.
SynthConfig synth_config_from_json(const nlohmann::json& j);

struct SyntheticStream {
  std::vector<CandidateText> texts;
  std::uint64_t seed = 0;
  nlohmann::json config_snapshot;
};

// Emits originals, then humans, then paraphrase rounds 1..K (each round after
// the previous). Ids: "llm-<i>", "human-<j>", "pp<k>-<i>". Raw scores come
// from SyntheticScoreProvider(source, seed).
SyntheticStream gen_stream(const SynthConfig& config);

// floor(f * #LLM originals) original embeddings chosen uniformly at random.
// For a fixed seed the selections are nested: a larger f keeps every entry
// chosen for a smaller one. Entries appear in stream order.
RetrievalPool gen_pool_init(std::span<const CandidateText> stream, double fraction,
                            std::uint64_t seed, std::size_t dimension);

}  // namespace sefd
