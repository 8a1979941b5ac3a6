#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sefd/pipeline.hpp"
#include "sefd/scoring.hpp"

namespace sefd {

// Published per-detector parameter settings.
struct DetectorPreset {
  std::string name;
  Orientation orientation;
  double epsilon_det;
  double epsilon_sim;
  double lambda1;
  double lambda2;
};

const std::vector<DetectorPreset>& detector_presets();
// Throws ConfigError listing the known names.
const DetectorPreset& find_preset(const std::string& name);

// User-facing knobs as read from a JSON config file and/or CLI flags. Every
// field is optional; resolve() fills the gaps from the preset and checks
// that nothing required is left unset.
struct RunOptions {
  std::optional<std::string> preset;
  std::optional<std::string> orientation;
  std::optional<double> calibration_min;
  std::optional<double> calibration_max;
  std::optional<std::string> calibration_path;
  std::optional<double> epsilon_det;
  std::optional<double> epsilon_sim;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<double> decision_epsilon;

  std::optional<std::string> pool_path;
  std::optional<double> pool_fraction;

  std::optional<std::string> scores_path;            // file score provider
  std::optional<std::string> synthetic_scores_path;  // source-model JSON
  std::optional<std::string> embeddings_path;
  std::optional<std::string> bridge_command;
  std::optional<std::string> bridge_url;

  bool no_pool_update = false;
  bool no_fusion = false;
  bool running_minmax = false;
  std::optional<std::uint64_t> seed;

  // Later sources win: fields set in `over` replace ours; flags are OR-ed.
  void merge(const RunOptions& over);
};

RunOptions run_options_from_json(const nlohmann::json& j);
RunOptions load_run_options(const std::string& path);

enum class ScoreSource { Inline, File, Synthetic };
enum class EmbeddingSource { Inline, File, StdioBridge, HttpBridge };

// Fully validated run parameters.
struct RunConfig {
  RunOptions options;  // as given, for the snapshot
  PipelineConfig pipeline;
  std::optional<std::string> preset;
  std::vector<std::string> overrides;  // parameters that differ from the preset
  ScoreSource score_source = ScoreSource::Inline;
  EmbeddingSource embedding_source = EmbeddingSource::Inline;
  std::uint64_t seed = 0;

  // Throws ConfigError on anything invalid or missing.
  static RunConfig resolve(const RunOptions& options);

  // Everything needed to repeat the run; loadable again via
  // run_options_from_json().
  nlohmann::json snapshot() const;
};

}  // namespace sefd
