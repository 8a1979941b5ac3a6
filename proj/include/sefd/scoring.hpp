#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sefd/candidate.hpp"

namespace sefd {

enum class Orientation { HigherMeansLLM, LowerMeansLLM };

std::string to_string(Orientation o);
Orientation parse_orientation(const std::string& s);

// Per-detector parameters. `epsilon_det` lives on the oriented raw scale
// (higher means more LLM-like); calibration bounds are on the detector's
// native raw scale.
struct DetectorSpec {
  std::string name;
  Orientation orientation = Orientation::HigherMeansLLM;
  double calibration_min = 0.0;
  double calibration_max = 1.0;
  double epsilon_det = 0.0;

  // Throws ConfigError on degenerate or non-finite bounds.
  void validate() const;
};

struct DetectorScore {
  double raw = 0.0;
  std::optional<double> normalized;
};

// Maps a raw score onto the "higher means LLM" scale.
double orient(double raw, Orientation o);
inline double orient(double raw, const DetectorSpec& spec) {
  return orient(raw, spec.orientation);
}

// Min-max normalization against the detector's calibration bounds, clamped to
// [0, 1]. Bounds are not re-validated here; DetectorSpec::validate() runs at
// load time.
DetectorScore normalize(double raw, const DetectorSpec& spec);

// Non-default alternative: bounds track the oriented scores seen so far
// (current one included). Outputs 0.5 while the observed range is a point.
class RunningMinMax {
 public:
  double observe(double oriented);

 private:
  std::optional<double> lo_;
  std::optional<double> hi_;
};

struct CalibrationBounds {
  double min = 0.0;
  double max = 0.0;
};

// Raw-scale min/max over a calibration sample. Throws InputError when the
// sample is empty or contains non-finite values.
CalibrationBounds calibrate(std::span<const double> raw_scores);
CalibrationBounds read_calibration(const std::string& path);
void write_calibration(const std::string& path, const CalibrationBounds& bounds);

// Source of raw detector scores for texts that do not carry one inline.
class ScoreProvider {
 public:
  virtual ~ScoreProvider() = default;
  // Throws MissingDataError when the text cannot be resolved.
  virtual double get_score(const CandidateText& text) = 0;
};

// Lookup over a line-delimited {"id", "score"} file.
class FileScoreProvider final : public ScoreProvider {
 public:
  explicit FileScoreProvider(std::unordered_map<std::string, double> scores)
      : scores_(std::move(scores)) {}

  static FileScoreProvider load(const std::string& path);

  double get_score(const CandidateText& text) override;
  std::size_t size() const { return scores_.size(); }
  std::vector<double> values() const;

 private:
  std::unordered_map<std::string, double> scores_;
};

struct Gaussian {
  double mean = 0.0;
  double std = 1.0;
};

// Raw detector-score distributions per source class. A paraphrase at depth k
// is centred `collapse[k-1]` of the way from the LLM mean to the Human mean;
// depths past the end of `paraphrase_collapse` reuse its last entry.
struct SourceModel {
  Gaussian human{0.0, 0.2};
  Gaussian llm{1.5, 0.3};
  std::vector<double> paraphrase_collapse{0.85, 0.93, 0.97};
  double paraphrase_std = 0.2;

  Gaussian distribution_for(const TruthLabel& label) const;
  void validate() const;
};

nlohmann::json to_json(const SourceModel& m);
SourceModel source_model_from_json(const nlohmann::json& j);

// Stable 64-bit FNV-1a; used wherever a seed is derived from a text id.
std::uint64_t stable_hash(std::string_view s);

// Samples a raw score from the text's truth-label distribution. Each draw is
// seeded from (seed, id), so the same id always yields the same score
// regardless of query order. Requires exclusive access per stream.
class SyntheticScoreProvider final : public ScoreProvider {
 public:
  SyntheticScoreProvider(SourceModel model, std::uint64_t seed);

  double get_score(const CandidateText& text) override;

 private:
  SourceModel model_;
  std::uint64_t seed_;
};

}  // namespace sefd
