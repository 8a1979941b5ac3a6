#include "sefd/pipeline.hpp"

#include <cmath>

#include "sefd/errors.hpp"
#include "sefd/jsonl.hpp"

namespace sefd {

void Thresholds::validate() const {
  if (!std::isfinite(epsilon_det)) throw ConfigError("epsilon_det must be finite");
  if (!(epsilon_sim >= 0.0 && epsilon_sim <= 1.0)) {
    throw ConfigError("epsilon_sim must lie in [0, 1], got " + std::to_string(epsilon_sim));
  }
}

int situation_for(double oriented_raw, const SimilarityResult& sim, const Thresholds& t) {
  const bool det_high = oriented_raw >= t.epsilon_det;
  const bool sim_high = sim.argmax_index.has_value() && sim.score >= t.epsilon_sim;
  if (det_high) return sim_high ? 1 : 2;
  return sim_high ? 3 : 4;
}

PoolAction pool_action_for(double oriented_raw, const SimilarityResult& sim, const Thresholds& t) {
  switch (situation_for(oriented_raw, sim, t)) {
    case 2:
      return {PoolActionKind::Add, std::nullopt};
    case 3:
      return {PoolActionKind::Replace, sim.argmax_index};
    default:
      return {};
  }
}

void PipelineConfig::validate() const {
  detector.validate();
  thresholds().validate();
  fusion.validate();
}

namespace {

const char* action_name(PoolActionKind k) {
  switch (k) {
    case PoolActionKind::Add:
      return "add";
    case PoolActionKind::Replace:
      return "replace";
    case PoolActionKind::None:
      break;
  }
  return "none";
}

StreamError::Kind kind_of(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError&) {
    return StreamError::Kind::Config;
  } catch (const MissingDataError&) {
    return StreamError::Kind::MissingData;
  } catch (const InputError&) {
    return StreamError::Kind::Input;
  } catch (...) {
    return StreamError::Kind::Runtime;
  }
}

}  // namespace

nlohmann::json to_json(const StepOutcome& o) {
  nlohmann::json j;
  j["id"] = o.id;
  j["raw_score"] = o.raw_score;
  j["normalized_score"] = o.normalized_score;
  j["similarity"] = o.similarity;
  j["argmax_index"] = o.argmax_index ? nlohmann::json(*o.argmax_index) : nlohmann::json(nullptr);
  j["fused"] = o.fused;
  j["decision"] = o.decision ? nlohmann::json(*o.decision) : nlohmann::json(nullptr);
  j["situation"] = o.situation;
  j["pool_action"] = action_name(o.pool_action.kind);
  if (o.pool_action.index) j["replace_index"] = *o.pool_action.index;
  j["pool_size_after"] = o.pool_size_after;
  return j;
}

StepOutcome outcome_from_json(const nlohmann::json& j) {
  StepOutcome o;
  o.id = jsonl::require_string(j, "id");
  o.raw_score = jsonl::require_number(j, "raw_score");
  o.normalized_score = jsonl::require_number(j, "normalized_score");
  o.similarity = jsonl::require_number(j, "similarity");
  if (auto it = j.find("argmax_index"); it != j.end() && !it->is_null()) {
    o.argmax_index = it->get<std::size_t>();
  }
  o.fused = jsonl::require_number(j, "fused");
  if (auto it = j.find("decision"); it != j.end() && !it->is_null()) o.decision = it->get<int>();
  o.situation = j.value("situation", 4);
  const auto action = j.value("pool_action", std::string("none"));
  if (action == "add") {
    o.pool_action.kind = PoolActionKind::Add;
  } else if (action == "replace") {
    o.pool_action.kind = PoolActionKind::Replace;
    o.pool_action.index = j.at("replace_index").get<std::size_t>();
  } else if (action != "none") {
    throw InputError("unknown pool_action '" + action + "'");
  }
  o.pool_size_after = j.value("pool_size_after", std::size_t{0});
  return o;
}

std::vector<StepOutcome> read_outcomes(const std::string& path) {
  std::vector<StepOutcome> out;
  jsonl::for_each_record(path, [&](const jsonl::Json& r, std::size_t) {
    out.push_back(outcome_from_json(r));
  });
  return out;
}

void write_outcomes(const std::string& path, std::span<const StepOutcome> outcomes) {
  std::vector<nlohmann::json> records;
  records.reserve(outcomes.size());
  for (const auto& o : outcomes) records.push_back(to_json(o));
  jsonl::write_all(path, records);
}

Pipeline::Pipeline(PipelineConfig config, std::optional<RetrievalPool> initial_pool,
                   ScoreProvider* scores, EmbeddingProvider* embeddings)
    : config_(std::move(config)),
      pool_(std::move(initial_pool)),
      scores_(scores),
      embeddings_(embeddings) {
  config_.validate();
  if (pool_ && embeddings_) {
    if (auto d = embeddings_->dimension(); d && *d != pool_->dimension()) {
      throw InputError("embedding dimension mismatch: pool has d=" +
                       std::to_string(pool_->dimension()) + ", encoder announces d=" +
                       std::to_string(*d));
    }
  }
}

double Pipeline::resolve_score(const CandidateText& text) {
  double s;
  if (text.raw_score) {
    s = *text.raw_score;
  } else if (scores_) {
    s = scores_->get_score(text);
  } else {
    throw MissingDataError("no detector score for id '" + text.id + "'");
  }
  if (!std::isfinite(s)) throw InputError("non-finite detector score for id '" + text.id + "'");
  return s;
}

std::vector<double> Pipeline::resolve_embedding(const CandidateText& text) {
  if (text.embedding) return *text.embedding;
  if (embeddings_) return embeddings_->embed(text);
  throw MissingDataError("no embedding for id '" + text.id + "'");
}

StepOutcome Pipeline::step(const CandidateText& text) {
  // Step I: raw score, orientation, normalization.
  const double raw = resolve_score(text);
  const double oriented = orient(raw, config_.detector);
  RunningMinMax running = running_;
  const double normalized = config_.running_minmax
                                ? running.observe(oriented)
                                : *normalize(raw, config_.detector).normalized;

  // Step II: max-cosine retrieval. Independent of Step I.
  const std::vector<double> v = resolve_embedding(text);
  if (v.empty()) throw InputError("empty embedding for id '" + text.id + "'");
  SimilarityResult sim;
  if (pool_) {
    sim = pool_->query_max_cosine(v);
  } else {
    sim = RetrievalPool(v.size()).query_max_cosine(v);
  }

  // Step III: fusion and decision.
  StepOutcome out;
  out.id = text.id;
  out.raw_score = raw;
  out.normalized_score = normalized;
  out.similarity = sim.score;
  out.argmax_index = sim.argmax_index;
  out.fused = config_.use_fusion ? fuse(normalized, sim.score, config_.fusion) : normalized;
  if (config_.fusion.decision_epsilon) {
    out.decision = static_cast<int>(classify(out.fused, *config_.fusion.decision_epsilon));
  }

  // Pool update.
  out.situation = situation_for(oriented, sim, config_.thresholds());
  if (config_.update_pool) {
    out.pool_action = pool_action_for(oriented, sim, config_.thresholds());
    if (out.pool_action.kind == PoolActionKind::Add) {
      if (!pool_) {
        pool_.emplace(v.size());
        pool_->mark_initial();
      }
      pool_->add(v, text.id);
    } else if (out.pool_action.kind == PoolActionKind::Replace) {
      pool_->replace(*out.pool_action.index, v, text.id);
    }
  }
  out.pool_size_after = pool_ ? pool_->size() : 0;
  running_ = running;
  ++steps_;
  return out;
}

std::vector<StepOutcome> Pipeline::run(std::span<const CandidateText> stream) {
  std::vector<StepOutcome> outcomes;
  outcomes.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    try {
      outcomes.push_back(step(stream[i]));
    } catch (const std::exception& e) {
      throw StreamError(i, stream[i].id, kind_of(std::current_exception()), e.what());
    }
  }
  return outcomes;
}

}  // namespace sefd
