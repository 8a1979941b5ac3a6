#include "sefd/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sefd/errors.hpp"

namespace sefd {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void scale(Vec& v, double c) {
  for (double& x : v) x *= c;
}

void axpy(Vec& y, double a, const Vec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

bool normalize_in_place(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  if (!(n > 1e-12)) return false;
  scale(v, 1.0 / n);
  return true;
}

// Removes the components along each (unit) basis vector; two passes.
void orthogonalize(Vec& v, std::initializer_list<const Vec*> basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vec* b : basis) axpy(v, -dot(v, *b), *b);
  }
}

Vec random_unit(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(d);
  do {
    for (double& x : v) x = g(rng);
  } while (!normalize_in_place(v));
  return v;
}

// Random unit vector orthogonal to every (unit) vector in `basis`; nullopt
// when the basis already spans the space.
std::optional<Vec> random_orthogonal(std::mt19937_64& rng, std::size_t d,
                                     std::initializer_list<const Vec*> basis) {
  if (basis.size() >= d) return std::nullopt;
  for (int attempt = 0; attempt < 64; ++attempt) {
    Vec v = random_unit(rng, d);
    orthogonalize(v, basis);
    if (normalize_in_place(v)) return v;
  }
  return std::nullopt;
}

// Unit vector with cosine `c` to the unit vector `a`.
Vec at_cosine(const Vec& a, double c, const Vec& orth) {
  Vec out = a;
  scale(out, c);
  axpy(out, std::sqrt(std::max(0.0, 1.0 - c * c)), orth);
  normalize_in_place(out);
  return out;
}

// One paraphrase step from `prev`, moving away from the chain root `root`.
Vec drift_step(std::mt19937_64& rng, const Vec& root, const Vec& prev, double c_step) {
  const std::size_t d = prev.size();
  const double s_step = std::sqrt(1.0 - c_step * c_step);

  // Component of the root orthogonal to prev, pointing toward the root.
  Vec toward = root;
  orthogonalize(toward, {&prev});
  const bool has_toward = normalize_in_place(toward);

  Vec dir;
  if (!has_toward) {
    dir = *random_orthogonal(rng, d, {&prev});
  } else {
    const double cos_phi = std::clamp(dot(root, prev), -1.0, 1.0);
    const double sin_phi = std::sqrt(1.0 - cos_phi * cos_phi);
    std::uniform_real_distribution<double> mix_dist(0.5, 1.0);
    double mix = mix_dist(rng);
    if (cos_phi < 0.0 && sin_phi > 0.0) {
      // Minimum tilt keeping cos(root, next) < cos(root, prev).
      const double bound = -cos_phi * (1.0 - c_step) / (s_step * sin_phi);
      mix = std::min(1.0, std::max(mix, bound + 1e-9));
    }
    auto side = random_orthogonal(rng, d, {&prev, &toward});
    if (!side) mix = 1.0;
    dir = toward;
    scale(dir, -mix);
    if (side) axpy(dir, std::sqrt(std::max(0.0, 1.0 - mix * mix)), *side);
    normalize_in_place(dir);
  }
  Vec next = prev;
  scale(next, c_step);
  axpy(next, s_step, dir);
  normalize_in_place(next);
  return next;
}

std::string padded(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

}  // namespace

void DriftModel::validate() const {
  if (dimension == 0) throw ConfigError("drift model: dimension must be positive");
  if (!(c_step > 0.0 && c_step < 1.0)) throw ConfigError("drift model: c_step must lie in (0, 1)");
  if (!(human_band_lo >= -1.0 && human_band_lo <= human_band_hi && human_band_hi <= 1.0)) {
    throw ConfigError("drift model: human band must satisfy -1 <= lo <= hi <= 1");
  }
}

void SynthConfig::validate() const {
  source.validate();
  drift.validate();
  if (depth < 0) throw ConfigError("synthgen: recursion depth must be >= 0");
  if (depth >= 1 && drift.dimension < 2) {
    throw ConfigError("synthgen: paraphrase drift needs dimension >= 2");
  }
  if (!(calibration.min < calibration.max)) {
    throw ConfigError("synthgen: calibration min must be below max");
  }
}

nlohmann::json to_json(const SynthConfig& c) {
  return {{"synthetic", true},
          {"source", to_json(c.source)},
          {"drift",
           {{"dimension", c.drift.dimension},
            {"c_step", c.drift.c_step},
            {"human_band_lo", c.drift.human_band_lo},
            {"human_band_hi", c.drift.human_band_hi}}},
          {"llm_count", c.llm_count},
          {"human_count", c.human_count},
          {"depth", c.depth},
          {"seed", c.seed},
          {"calibration", {{"min", c.calibration.min}, {"max", c.calibration.max}}}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  if (auto it = j.find("source"); it != j.end()) c.source = source_model_from_json(*it);
  if (auto it = j.find("drift"); it != j.end()) {
    c.drift.dimension = it->value("dimension", c.drift.dimension);
    c.drift.c_step = it->value("c_step", c.drift.c_step);
    c.drift.human_band_lo = it->value("human_band_lo", c.drift.human_band_lo);
    c.drift.human_band_hi = it->value("human_band_hi", c.drift.human_band_hi);
  }
  c.llm_count = j.value("llm_count", c.llm_count);
  c.human_count = j.value("human_count", c.human_count);
  c.depth = j.value("depth", c.depth);
  c.seed = j.value("seed", c.seed);
  if (auto it = j.find("calibration"); it != j.end()) {
    c.calibration.min = it->value("min", c.calibration.min);
    c.calibration.max = it->value("max", c.calibration.max);
  }
  return c;
}

SyntheticStream gen_stream(const SynthConfig& config) {
  config.validate();
  const std::size_t d = config.drift.dimension;
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                    static_cast<std::uint32_t>(config.seed >> 32), 0x5EFDu};
  std::mt19937_64 rng(seq);
  SyntheticScoreProvider scores(config.source, config.seed);

  SyntheticStream out;
  out.seed = config.seed;
  out.config_snapshot = to_json(config);
  auto& texts = out.texts;
  texts.reserve(config.llm_count * (1 + static_cast<std::size_t>(config.depth)) +
                config.human_count);

  auto emit = [&](std::string id, TruthLabel label, std::optional<std::string> parent, Vec v) {
    CandidateText c;
    c.id = std::move(id);
    c.truth = label;
    c.parent_id = std::move(parent);
    c.raw_score = scores.get_score(c);
    c.embedding = std::move(v);
    texts.push_back(std::move(c));
  };

  std::vector<Vec> anchors;
  anchors.reserve(config.llm_count);
  for (std::size_t i = 0; i < config.llm_count; ++i) {
    anchors.push_back(random_unit(rng, d));
    emit("llm-" + padded(i), TruthLabel::llm(), std::nullopt, anchors.back());
  }

  std::uniform_real_distribution<double> band(config.drift.human_band_lo,
                                               config.drift.human_band_hi);
  for (std::size_t j = 0; j < config.human_count; ++j) {
    Vec h;
    if (anchors.empty() || d < 2) {
      h = random_unit(rng, d);
    } else {
      const Vec& a = anchors[j % anchors.size()];
      h = at_cosine(a, band(rng), *random_orthogonal(rng, d, {&a}));
    }
    emit("human-" + padded(j), TruthLabel::human(), std::nullopt, std::move(h));
  }

  std::vector<Vec> current = anchors;
  for (int k = 1; k <= config.depth; ++k) {
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      current[i] = drift_step(rng, anchors[i], current[i], config.drift.c_step);
      const std::string parent =
          k == 1 ? "llm-" + padded(i) : "pp" + std::to_string(k - 1) + "-" + padded(i);
      emit("pp" + std::to_string(k) + "-" + padded(i), TruthLabel::paraphrase(k), parent,
           current[i]);
    }
  }
  return out;
}

RetrievalPool gen_pool_init(std::span<const CandidateText> stream, double fraction,
                            std::uint64_t seed, std::size_t dimension) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ConfigError("pool fraction must lie in [0, 1]");
  }
  std::vector<std::size_t> originals;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (stream[i].truth && stream[i].truth->kind == TruthLabel::Kind::LLM) originals.push_back(i);
  }
  const auto take = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(originals.size()) + 1e-9));

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x9001u};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(originals.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(take, order.size()));
  std::sort(order.begin(), order.end());

  RetrievalPool pool(dimension);
  for (std::size_t k : order) {
    const auto& c = stream[originals[k]];
    if (!c.embedding) throw MissingDataError("original '" + c.id + "' has no embedding");
    pool.add(*c.embedding, c.id);
  }
  pool.mark_initial();
  return pool;
}

}  // namespace sefd
