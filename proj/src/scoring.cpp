#include "sefd/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sefd/errors.hpp"
#include "sefd/jsonl.hpp"

namespace sefd {

std::string to_string(Orientation o) {
  return o == Orientation::HigherMeansLLM ? "higher" : "lower";
}

Orientation parse_orientation(const std::string& s) {
  if (s == "higher" || s == "HigherMeansLLM") return Orientation::HigherMeansLLM;
  if (s == "lower" || s == "LowerMeansLLM") return Orientation::LowerMeansLLM;
  throw ConfigError("unknown orientation '" + s + "' (expected higher or lower)");
}

void DetectorSpec::validate() const {
  if (!std::isfinite(calibration_min) || !std::isfinite(calibration_max)) {
    throw ConfigError("detector '" + name + "': calibration bounds must be finite");
  }
  if (!(calibration_min < calibration_max)) {
    throw ConfigError("detector '" + name + "': calibration_min (" +
                      std::to_string(calibration_min) + ") must be below calibration_max (" +
                      std::to_string(calibration_max) + ")");
  }
  if (!std::isfinite(epsilon_det)) {
    throw ConfigError("detector '" + name + "': epsilon_det must be finite");
  }
}

double orient(double raw, Orientation o) {
  return o == Orientation::HigherMeansLLM ? raw : -raw;
}

DetectorScore normalize(double raw, const DetectorSpec& spec) {
  double lo = orient(spec.calibration_min, spec);
  double hi = orient(spec.calibration_max, spec);
  if (lo > hi) std::swap(lo, hi);
  const double x = (orient(raw, spec) - lo) / (hi - lo);
  return {raw, std::clamp(x, 0.0, 1.0)};
}

double RunningMinMax::observe(double oriented) {
  lo_ = lo_ ? std::min(*lo_, oriented) : oriented;
  hi_ = hi_ ? std::max(*hi_, oriented) : oriented;
  if (*hi_ == *lo_) return 0.5;
  return (oriented - *lo_) / (*hi_ - *lo_);
}

CalibrationBounds calibrate(std::span<const double> raw_scores) {
  if (raw_scores.empty()) throw InputError("calibration sample is empty");
  CalibrationBounds b{raw_scores.front(), raw_scores.front()};
  for (double s : raw_scores) {
    if (!std::isfinite(s)) throw InputError("calibration sample contains a non-finite score");
    b.min = std::min(b.min, s);
    b.max = std::max(b.max, s);
  }
  return b;
}

CalibrationBounds read_calibration(const std::string& path) {
  const auto j = jsonl::read_json_file(path);
  try {
    return {jsonl::require_number(j, "min"), jsonl::require_number(j, "max")};
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_calibration(const std::string& path, const CalibrationBounds& bounds) {
  jsonl::write_json_file(path, {{"min", bounds.min}, {"max", bounds.max}});
}

FileScoreProvider FileScoreProvider::load(const std::string& path) {
  std::unordered_map<std::string, double> scores;
  jsonl::for_each_record(path, [&](const jsonl::Json& r, std::size_t) {
    auto id = jsonl::require_string(r, "id");
    double score = jsonl::require_number(r, "score");
    if (!std::isfinite(score)) throw InputError("non-finite score for id '" + id + "'");
    if (!scores.emplace(id, score).second) throw InputError("duplicate id '" + id + "'");
  });
  return FileScoreProvider(std::move(scores));
}

double FileScoreProvider::get_score(const CandidateText& text) {
  auto it = scores_.find(text.id);
  if (it == scores_.end()) throw MissingDataError("no detector score for id '" + text.id + "'");
  return it->second;
}

std::vector<double> FileScoreProvider::values() const {
  std::vector<double> out;
  out.reserve(scores_.size());
  for (const auto& [id, s] : scores_) out.push_back(s);
  return out;
}

Gaussian SourceModel::distribution_for(const TruthLabel& label) const {
  switch (label.kind) {
    case TruthLabel::Kind::Human:
      return human;
    case TruthLabel::Kind::LLM:
      return llm;
    case TruthLabel::Kind::Paraphrase: {
      double c = 1.0;
      if (!paraphrase_collapse.empty()) {
        auto k = static_cast<std::size_t>(std::max(label.depth, 1));
        c = paraphrase_collapse[std::min(k, paraphrase_collapse.size()) - 1];
      }
      return {llm.mean + c * (human.mean - llm.mean), paraphrase_std};
    }
  }
  return human;
}

void SourceModel::validate() const {
  if (!(human.std > 0) || !(llm.std > 0) || !(paraphrase_std > 0)) {
    throw ConfigError("source model: every std must be > 0");
  }
  double prev = 0.0;
  for (double c : paraphrase_collapse) {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("source model: collapse fractions must lie in [0, 1]");
    if (c < prev) throw ConfigError("source model: collapse fractions must be non-decreasing in depth");
    prev = c;
  }
}

nlohmann::json to_json(const SourceModel& m) {
  return {{"human_mean", m.human.mean},         {"human_std", m.human.std},
          {"llm_mean", m.llm.mean},             {"llm_std", m.llm.std},
          {"paraphrase_collapse", m.paraphrase_collapse},
          {"paraphrase_std", m.paraphrase_std}};
}

SourceModel source_model_from_json(const nlohmann::json& j) {
  SourceModel m;
  m.human.mean = j.value("human_mean", m.human.mean);
  m.human.std = j.value("human_std", m.human.std);
  m.llm.mean = j.value("llm_mean", m.llm.mean);
  m.llm.std = j.value("llm_std", m.llm.std);
  m.paraphrase_collapse = j.value("paraphrase_collapse", m.paraphrase_collapse);
  m.paraphrase_std = j.value("paraphrase_std", m.paraphrase_std);
  return m;
}

std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

SyntheticScoreProvider::SyntheticScoreProvider(SourceModel model, std::uint64_t seed)
    : model_(std::move(model)), seed_(seed) {
  model_.validate();
}

double SyntheticScoreProvider::get_score(const CandidateText& text) {
  if (!text.truth) {
    throw MissingDataError("synthetic score provider needs a truth label for id '" + text.id + "'");
  }
  const std::uint64_t h = stable_hash(text.id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  std::mt19937_64 rng(seq);
  const Gaussian g = model_.distribution_for(*text.truth);
  std::normal_distribution<double> dist(g.mean, g.std);
  return dist(rng);
}

}  // namespace sefd
