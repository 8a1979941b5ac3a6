#include "sefd/run_config.hpp"

#include <cmath>
#include <set>

#include "sefd/errors.hpp"
#include "sefd/jsonl.hpp"

namespace sefd {

const std::vector<DetectorPreset>& detector_presets() {
  static const std::vector<DetectorPreset> presets = {
      {"log-likelihood", Orientation::HigherMeansLLM, -2.5, 0.85, 1.0, 6.0},
      {"detectgpt", Orientation::HigherMeansLLM, 0.5, 0.85, 1.0, 6.0},
      // Lower intrinsic dimension means more LLM-like; -11 on the oriented
      // scale is an estimated dimension of 11.
      {"id-mle", Orientation::LowerMeansLLM, -11.0, 0.85, 1.0, 6.0},
      {"watermark", Orientation::HigherMeansLLM, 4.0, 0.85, 1.0, 6.0},
  };
  return presets;
}

const DetectorPreset& find_preset(const std::string& name) {
  for (const auto& p : detector_presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : detector_presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown detector preset '" + name + "' (known: " + known + ")");
}

void RunOptions::merge(const RunOptions& over) {
  auto take = [](auto& mine, const auto& theirs) {
    if (theirs) mine = theirs;
  };
  take(preset, over.preset);
  take(orientation, over.orientation);
  take(calibration_min, over.calibration_min);
  take(calibration_max, over.calibration_max);
  take(calibration_path, over.calibration_path);
  take(epsilon_det, over.epsilon_det);
  take(epsilon_sim, over.epsilon_sim);
  take(lambda1, over.lambda1);
  take(lambda2, over.lambda2);
  take(decision_epsilon, over.decision_epsilon);
  take(pool_path, over.pool_path);
  take(pool_fraction, over.pool_fraction);
  take(scores_path, over.scores_path);
  take(synthetic_scores_path, over.synthetic_scores_path);
  take(embeddings_path, over.embeddings_path);
  take(bridge_command, over.bridge_command);
  take(bridge_url, over.bridge_url);
  no_pool_update = no_pool_update || over.no_pool_update;
  no_fusion = no_fusion || over.no_fusion;
  running_minmax = running_minmax || over.running_minmax;
  take(seed, over.seed);
}

namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

template <typename T>
void write_opt(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

RunOptions run_options_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  static const std::set<std::string> kKnown = {
      "preset", "orientation", "calibration_min", "calibration_max", "calibration",
      "epsilon_det", "epsilon_sim", "lambda1", "lambda2", "decision_epsilon", "pool",
      "pool_fraction", "scores", "synthetic_scores", "embeddings", "bridge_command",
      "bridge_url", "no_pool_update", "no_fusion", "running_minmax", "seed",
      // snapshot metadata
      "provenance", "stream", "sweep"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunOptions o;
  read_opt(j, "preset", o.preset);
  read_opt(j, "orientation", o.orientation);
  read_opt(j, "calibration_min", o.calibration_min);
  read_opt(j, "calibration_max", o.calibration_max);
  read_opt(j, "calibration", o.calibration_path);
  read_opt(j, "epsilon_det", o.epsilon_det);
  read_opt(j, "epsilon_sim", o.epsilon_sim);
  read_opt(j, "lambda1", o.lambda1);
  read_opt(j, "lambda2", o.lambda2);
  read_opt(j, "decision_epsilon", o.decision_epsilon);
  read_opt(j, "pool", o.pool_path);
  read_opt(j, "pool_fraction", o.pool_fraction);
  read_opt(j, "scores", o.scores_path);
  read_opt(j, "synthetic_scores", o.synthetic_scores_path);
  read_opt(j, "embeddings", o.embeddings_path);
  read_opt(j, "bridge_command", o.bridge_command);
  read_opt(j, "bridge_url", o.bridge_url);
  std::optional<bool> flag;
  read_opt(j, "no_pool_update", flag);
  o.no_pool_update = flag.value_or(false);
  flag.reset();
  read_opt(j, "no_fusion", flag);
  o.no_fusion = flag.value_or(false);
  flag.reset();
  read_opt(j, "running_minmax", flag);
  o.running_minmax = flag.value_or(false);
  read_opt(j, "seed", o.seed);
  return o;
}

RunOptions load_run_options(const std::string& path) {
  try {
    return run_options_from_json(jsonl::read_json_file(path));
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

RunConfig RunConfig::resolve(const RunOptions& options) {
  RunConfig rc;
  rc.options = options;
  const DetectorPreset* preset = options.preset ? &find_preset(*options.preset) : nullptr;
  rc.preset = options.preset;

  auto pick = [&](const char* key, const std::optional<double>& given,
                  std::optional<double> preset_value) -> double {
    if (given) {
      if (preset_value && *preset_value != *given) rc.overrides.emplace_back(key);
      if (!preset_value && preset) rc.overrides.emplace_back(key);
      return *given;
    }
    if (preset_value) return *preset_value;
    throw ConfigError(std::string("missing parameter '") + key +
                      "' (set it or choose a --preset)");
  };

  auto& det = rc.pipeline.detector;
  det.name = preset ? preset->name : "custom";
  if (options.orientation) {
    det.orientation = parse_orientation(*options.orientation);
    if (preset && det.orientation != preset->orientation) rc.overrides.emplace_back("orientation");
  } else if (preset) {
    det.orientation = preset->orientation;
  } else {
    throw ConfigError("missing parameter 'orientation' (set it or choose a --preset)");
  }
  det.epsilon_det = pick("epsilon_det", options.epsilon_det,
                         preset ? std::optional(preset->epsilon_det) : std::nullopt);
  rc.pipeline.epsilon_sim = pick("epsilon_sim", options.epsilon_sim,
                                 preset ? std::optional(preset->epsilon_sim) : std::nullopt);
  rc.pipeline.fusion.lambda1 =
      pick("lambda1", options.lambda1, preset ? std::optional(preset->lambda1) : std::nullopt);
  rc.pipeline.fusion.lambda2 =
      pick("lambda2", options.lambda2, preset ? std::optional(preset->lambda2) : std::nullopt);
  rc.pipeline.fusion.decision_epsilon = options.decision_epsilon;

  rc.pipeline.running_minmax = options.running_minmax;
  rc.seed = options.seed.value_or(0);
  if (options.calibration_path && (options.calibration_min || options.calibration_max)) {
    throw ConfigError("give either a calibration file or calibration_min/max, not both");
  }
  if (options.calibration_path) {
    CalibrationBounds b;
    try {
      b = read_calibration(*options.calibration_path);
    } catch (const InputError& e) {
      throw ConfigError(std::string("calibration: ") + e.what());
    }
    det.calibration_min = b.min;
    det.calibration_max = b.max;
  } else if (options.calibration_min && options.calibration_max) {
    det.calibration_min = *options.calibration_min;
    det.calibration_max = *options.calibration_max;
  } else if (options.calibration_min || options.calibration_max) {
    throw ConfigError("calibration_min and calibration_max must be given together");
  } else if (!options.running_minmax) {
    throw ConfigError("missing calibration bounds (calibration file, calibration_min/max, "
                      "or running_minmax)");
  } else {
    det.calibration_min = 0.0;
    det.calibration_max = 1.0;
  }

  rc.pipeline.update_pool = !options.no_pool_update;
  rc.pipeline.use_fusion = !options.no_fusion;
  rc.pipeline.validate();

  if (options.pool_path && options.pool_fraction) {
    throw ConfigError("give either an initial pool file or a pool fraction, not both");
  }
  if (options.pool_fraction && !(*options.pool_fraction >= 0.0 && *options.pool_fraction <= 1.0)) {
    throw ConfigError("pool_fraction must lie in [0, 1]");
  }

  if (options.scores_path && options.synthetic_scores_path) {
    throw ConfigError("choose one score provider (scores file or synthetic)");
  }
  rc.score_source = options.scores_path             ? ScoreSource::File
                    : options.synthetic_scores_path ? ScoreSource::Synthetic
                                                    : ScoreSource::Inline;

  const int embed_sources = (options.embeddings_path ? 1 : 0) +
                            (options.bridge_command ? 1 : 0) + (options.bridge_url ? 1 : 0);
  if (embed_sources > 1) throw ConfigError("choose one embedding provider");
  rc.embedding_source = options.embeddings_path  ? EmbeddingSource::File
                        : options.bridge_command ? EmbeddingSource::StdioBridge
                        : options.bridge_url     ? EmbeddingSource::HttpBridge
                                                 : EmbeddingSource::Inline;
  return rc;
}

nlohmann::json RunConfig::snapshot() const {
  nlohmann::json j;
  const auto& det = pipeline.detector;
  write_opt(j, "preset", preset);
  j["orientation"] = to_string(det.orientation);
  if (options.calibration_path) {
    j["calibration"] = *options.calibration_path;
  } else if (!options.running_minmax || options.calibration_min) {
    j["calibration_min"] = det.calibration_min;
    j["calibration_max"] = det.calibration_max;
  }
  j["epsilon_det"] = det.epsilon_det;
  j["epsilon_sim"] = pipeline.epsilon_sim;
  j["lambda1"] = pipeline.fusion.lambda1;
  j["lambda2"] = pipeline.fusion.lambda2;
  write_opt(j, "decision_epsilon", pipeline.fusion.decision_epsilon);
  write_opt(j, "pool", options.pool_path);
  write_opt(j, "pool_fraction", options.pool_fraction);
  write_opt(j, "scores", options.scores_path);
  write_opt(j, "synthetic_scores", options.synthetic_scores_path);
  write_opt(j, "embeddings", options.embeddings_path);
  write_opt(j, "bridge_command", options.bridge_command);
  write_opt(j, "bridge_url", options.bridge_url);
  j["no_pool_update"] = options.no_pool_update;
  j["no_fusion"] = options.no_fusion;
  j["running_minmax"] = options.running_minmax;
  j["seed"] = seed;

  // Metadata only; ignored when the snapshot is loaded back.
  nlohmann::json provenance;
  provenance["parameter_source"] =
      !preset ? "user" : (overrides.empty() ? "preset" : "preset with user overrides");
  provenance["overrides"] = overrides;
  j["provenance"] = provenance;
  return j;
}

}  // namespace sefd
