#include "sefd/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "sefd/errors.hpp"
#include "sefd/jsonl.hpp"

namespace sefd {

Providers make_providers(const RunConfig& config) {
  Providers p;
  const auto& o = config.options;
  switch (config.score_source) {
    case ScoreSource::File:
      p.scores = std::make_unique<FileScoreProvider>(FileScoreProvider::load(*o.scores_path));
      break;
    case ScoreSource::Synthetic: {
      SourceModel model;
      try {
        auto j = jsonl::read_json_file(*o.synthetic_scores_path);
        // Accept either a bare source model or a full synthgen config.
        model = source_model_from_json(j.contains("source") ? j.at("source") : j);
      } catch (const InputError& e) {
        throw ConfigError(std::string("synthetic scores: ") + e.what());
      }
      p.scores = std::make_unique<SyntheticScoreProvider>(model, config.seed);
      break;
    }
    case ScoreSource::Inline:
      break;
  }
  switch (config.embedding_source) {
    case EmbeddingSource::File:
      p.embeddings =
          std::make_unique<FileEmbeddingProvider>(FileEmbeddingProvider::load(*o.embeddings_path));
      break;
    case EmbeddingSource::StdioBridge:
      p.embeddings = std::make_unique<StdioBridgeProvider>(*o.bridge_command);
      break;
    case EmbeddingSource::HttpBridge:
      p.embeddings = std::make_unique<HttpBridgeProvider>(*o.bridge_url);
      break;
    case EmbeddingSource::Inline:
      break;
  }
  return p;
}

std::vector<CandidateText> materialize(std::span<const CandidateText> stream,
                                       Providers& providers) {
  std::vector<CandidateText> out(stream.begin(), stream.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& c = out[i];
    try {
      if (!c.raw_score) {
        if (!providers.scores) throw MissingDataError("no detector score for id '" + c.id + "'");
        c.raw_score = providers.scores->get_score(c);
      }
      if (!c.embedding) {
        if (!providers.embeddings) throw MissingDataError("no embedding for id '" + c.id + "'");
        c.embedding = providers.embeddings->embed(c);
      }
    } catch (const MissingDataError& e) {
      throw StreamError(i, c.id, StreamError::Kind::MissingData, e.what());
    }
  }
  return out;
}

std::optional<RetrievalPool> initial_pool(const RunConfig& config,
                                          std::span<const CandidateText> stream,
                                          Providers& providers) {
  const auto& o = config.options;
  std::optional<std::size_t> announced;
  if (providers.embeddings) announced = providers.embeddings->dimension();
  if (o.pool_path) {
    auto pool = RetrievalPool::load(*o.pool_path, announced);
    pool.mark_initial();
    return pool;
  }
  if (!o.pool_fraction) return std::nullopt;

  std::vector<CandidateText> originals;
  for (const auto& c : stream) {
    if (c.truth && c.truth->kind == TruthLabel::Kind::LLM) originals.push_back(c);
  }
  originals = materialize(originals, providers);
  std::optional<std::size_t> d = announced;
  if (!d && !originals.empty()) d = originals.front().embedding->size();
  if (!d) {
    for (const auto& c : stream) {
      if (c.embedding) {
        d = c.embedding->size();
        break;
      }
    }
  }
  if (!d) return std::nullopt;
  return gen_pool_init(originals, *o.pool_fraction, config.seed, *d);
}

DetectRun run_detection(const RunConfig& config, std::span<const CandidateText> stream,
                        Providers& providers) {
  Pipeline pipeline(config.pipeline, initial_pool(config, stream, providers),
                    providers.scores.get(), providers.embeddings.get());
  DetectRun run;
  run.outcomes = pipeline.run(stream);
  run.final_pool = pipeline.pool();
  return run;
}

DetectRun cmd_detect(const DetectArgs& args) {
  const RunConfig config = RunConfig::resolve(args.options);
  const auto stream = read_stream(args.stream_path);
  Providers providers = make_providers(config);
  DetectRun run = run_detection(config, stream, providers);

  write_outcomes(args.out_path, run.outcomes);
  auto snapshot = config.snapshot();
  snapshot["stream"] = args.stream_path;
  jsonl::write_json_file(args.config_out.value_or(args.out_path + ".config.json"), snapshot);
  if (args.pool_out) {
    if (run.final_pool) {
      run.final_pool->save(*args.pool_out);
    } else {
      std::cerr << "note: no pool was created (no embeddings seen); '" << *args.pool_out
                << "' not written\n";
    }
  }
  return run;
}

std::vector<MetricsReport> cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  for (double t : args.fpr_targets) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("FPR targets must lie in [0, 1]");
  }
  const auto outcomes = read_outcomes(args.outcomes_path);
  const auto stream = read_stream(args.stream_path);
  auto reports = evaluate_groups(outcomes, stream, args.fpr_targets, args.field);

  std::optional<nlohmann::json> run_meta;
  if (args.run_config_path) run_meta = jsonl::read_json_file(*args.run_config_path);
  std::vector<nlohmann::json> records;
  for (const auto& r : reports) {
    auto j = to_json(r);
    j["score_field"] = args.field == ScoreField::Fused ? "fused" : "normalized";
    if (run_meta) j["run"] = *run_meta;
    records.push_back(std::move(j));
  }
  if (args.out_path) {
    jsonl::write_all(*args.out_path, records);
  } else {
    for (const auto& r : records) out << r.dump() << '\n';
  }
  return reports;
}

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "pool_fraction") return SweepAxis::PoolFraction;
  if (s == "recursion_depth") return SweepAxis::RecursionDepth;
  if (s == "lambda" || s == "lambda-grid" || s == "lambda_grid") return SweepAxis::LambdaGrid;
  throw ConfigError("unknown sweep axis '" + s +
                    "' (expected pool_fraction, recursion_depth or lambda-grid)");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::PoolFraction:
      return "pool_fraction";
    case SweepAxis::RecursionDepth:
      return "recursion_depth";
    case SweepAxis::LambdaGrid:
      return "lambda";
  }
  return "unknown";
}

namespace {

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(v)) {
    throw ConfigError("sweep value '" + s + "' is not a finite number");
  }
  return v;
}

std::pair<double, double> parse_lambda_pair(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("lambda grid value '" + s + "' must look like <lambda1>:<lambda2>");
  }
  return {parse_number(s.substr(0, colon)), parse_number(s.substr(colon + 1))};
}

std::vector<MetricsReport> run_and_score(const RunConfig& config,
                                         std::span<const CandidateText> stream,
                                         std::optional<RetrievalPool> pool,
                                         std::span<const double> fpr_targets) {
  Pipeline pipeline(config.pipeline, std::move(pool));
  const auto outcomes = pipeline.run(stream);
  return evaluate_groups(outcomes, stream, fpr_targets);
}

}  // namespace

std::vector<SweepRow> run_sweep(const RunConfig& config, std::span<const CandidateText> stream,
                                SweepAxis axis, const std::vector<std::string>& values,
                                std::span<const double> fpr_targets) {
  if (values.empty()) throw ConfigError("sweep needs at least one axis value");
  Providers none;
  std::vector<SweepRow> rows;

  if (axis == SweepAxis::RecursionDepth) {
    std::vector<double> depths;
    for (const auto& v : values) depths.push_back(parse_number(v));
    for (std::size_t i = 1; i < depths.size(); ++i) {
      if (!(depths[i] > depths[i - 1])) throw ConfigError("recursion depths must be increasing");
    }
    const auto reports =
        run_and_score(config, stream, initial_pool(config, stream, none), fpr_targets);
    for (std::size_t i = 0; i < depths.size(); ++i) {
      const double k = depths[i];
      if (k < 0 || k != std::floor(k)) throw ConfigError("recursion depth must be a whole number");
      const auto label = k == 0 ? TruthLabel::llm() : TruthLabel::paraphrase(static_cast<int>(k));
      const auto it = std::find_if(reports.begin(), reports.end(), [&](const MetricsReport& r) {
        return r.group == label.to_string();
      });
      if (it == reports.end()) {
        throw InputError("stream has no texts labelled '" + label.to_string() + "'");
      }
      rows.push_back({values[i], *it});
    }
    return rows;
  }

  std::vector<RunConfig> configs;
  if (axis == SweepAxis::PoolFraction) {
    double prev = -1.0;
    for (const auto& v : values) {
      const double f = parse_number(v);
      if (!(f > prev)) throw ConfigError("pool fractions must be increasing");
      prev = f;
      RunOptions o = config.options;
      o.pool_path.reset();
      o.pool_fraction = f;
      configs.push_back(RunConfig::resolve(o));
    }
  } else {
    for (const auto& v : values) {
      const auto [l1, l2] = parse_lambda_pair(v);
      RunOptions o = config.options;
      o.lambda1 = l1;
      o.lambda2 = l2;
      configs.push_back(RunConfig::resolve(o));
    }
  }

  std::vector<std::future<std::vector<MetricsReport>>> jobs;
  for (const auto& c : configs) {
    jobs.push_back(std::async(std::launch::async, [&c, stream, fpr_targets] {
      Providers local;
      return run_and_score(c, stream, initial_pool(c, stream, local), fpr_targets);
    }));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (auto& r : jobs[i].get()) rows.push_back({values[i], std::move(r)});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, std::span<const SweepRow> rows,
                     std::span<const double> fpr_targets) {
  out << "axis,value,group,auroc";
  for (double t : fpr_targets) out << ",tpr_at_fpr_" << fpr_key(t);
  out << ",positives,negatives\n";
  for (const auto& row : rows) {
    out << to_string(axis) << ',' << row.value << ',' << row.report.group << ','
        << nlohmann::json(row.report.auroc).dump();
    for (double t : fpr_targets) out << ',' << nlohmann::json(row.report.tpr_at_fpr.at(t)).dump();
    out << ',' << row.report.positives << ',' << row.report.negatives << '\n';
  }
}

std::vector<SweepRow> cmd_sweep(const SweepArgs& args) {
  const RunConfig config = RunConfig::resolve(args.options);
  const auto raw_stream = read_stream(args.stream_path);
  Providers providers = make_providers(config);
  const auto stream = materialize(raw_stream, providers);
  const auto rows = run_sweep(config, stream, args.axis, args.values, args.fpr_targets);

  std::ofstream out(args.out_path, std::ios::trunc);
  if (!out) throw InputError("cannot open '" + args.out_path + "' for writing");
  write_sweep_csv(out, args.axis, rows, args.fpr_targets);
  auto snapshot = config.snapshot();
  snapshot["stream"] = args.stream_path;
  snapshot["sweep"] = {{"axis", to_string(args.axis)}, {"values", args.values},
                       {"fpr_targets", args.fpr_targets}};
  jsonl::write_json_file(args.out_path + ".config.json", snapshot);
  return rows;
}

SyntheticStream cmd_gen(const GenArgs& args) {
  SynthConfig cfg;
  if (args.config_path) {
    try {
      cfg = synth_config_from_json(jsonl::read_json_file(*args.config_path));
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("synthgen config: ") + e.what());
    }
  }
  if (args.llm_count) cfg.llm_count = *args.llm_count;
  if (args.human_count) cfg.human_count = *args.human_count;
  if (args.depth) cfg.depth = *args.depth;
  if (args.seed) cfg.seed = *args.seed;
  if (args.dimension) cfg.drift.dimension = *args.dimension;
  if (args.c_step) cfg.drift.c_step = *args.c_step;

  auto stream = gen_stream(cfg);
  write_stream(args.out_path, stream.texts);
  jsonl::write_json_file(args.out_path + ".config.json", stream.config_snapshot);
  if (args.pool_fraction || args.pool_out) {
    if (!args.pool_out) throw ConfigError("--pool-fraction needs --pool-out");
    const auto pool =
        gen_pool_init(stream.texts, args.pool_fraction.value_or(0.0), cfg.seed, cfg.drift.dimension);
    pool.save(*args.pool_out);
  }
  if (args.calibration_out) write_calibration(*args.calibration_out, cfg.calibration);
  return stream;
}

CalibrationBounds cmd_calibrate(const std::string& scores_path, const std::string& out_path) {
  const auto provider = FileScoreProvider::load(scores_path);
  const auto values = provider.values();
  const auto bounds = calibrate(values);
  write_calibration(out_path, bounds);
  return bounds;
}

void cmd_pool_inspect(const std::string& pool_path, std::ostream& out) {
  const auto pool = RetrievalPool::load(pool_path);
  nlohmann::json ids = nlohmann::json::array();
  for (std::size_t i = 0; i < pool.size(); ++i) ids.push_back(pool.source_id_at(i));
  out << nlohmann::json{{"dimension", pool.dimension()}, {"size", pool.size()},
                        {"source_ids", ids}}
             .dump()
      << '\n';
}

RetrievalPool cmd_pool_build(const std::string& stream_path, const std::string& truth,
                             const std::string& out_path) {
  const auto stream = read_stream(stream_path);
  std::optional<TruthLabel> filter;
  if (!truth.empty()) filter = TruthLabel::parse(truth);
  std::optional<RetrievalPool> pool;
  for (const auto& c : stream) {
    if (filter && (!c.truth || *c.truth != *filter)) continue;
    if (!c.embedding) throw MissingDataError("text '" + c.id + "' has no inline embedding");
    if (!pool) pool.emplace(c.embedding->size());
    pool->add(*c.embedding, c.id);
  }
  if (!pool) throw InputError("no matching texts with embeddings in '" + stream_path + "'");
  pool->mark_initial();
  pool->save(out_path);
  return std::move(*pool);
}

void cmd_pool_query(const std::string& pool_path, const std::string& stream_path,
                    std::ostream& out) {
  const auto pool = RetrievalPool::load(pool_path);
  for (const auto& c : read_stream(stream_path)) {
    if (!c.embedding) throw MissingDataError("text '" + c.id + "' has no inline embedding");
    const auto r = pool.query_max_cosine(*c.embedding);
    nlohmann::json j{{"id", c.id}, {"similarity", r.score}};
    j["argmax_index"] = r.argmax_index ? nlohmann::json(*r.argmax_index) : nlohmann::json(nullptr);
    j["source_id"] =
        r.argmax_index ? nlohmann::json(pool.source_id_at(*r.argmax_index)) : nlohmann::json(nullptr);
    out << j.dump() << '\n';
  }
}

int exit_code_for(const std::exception& e) {
  if (const auto* s = dynamic_cast<const StreamError*>(&e)) {
    switch (s->kind()) {
      case StreamError::Kind::Config:
        return exit_code::kConfig;
      case StreamError::Kind::Input:
        return exit_code::kInput;
      case StreamError::Kind::MissingData:
        return exit_code::kMissingData;
      case StreamError::Kind::Runtime:
        return exit_code::kRuntime;
    }
  }
  if (dynamic_cast<const ConfigError*>(&e)) return exit_code::kConfig;
  if (dynamic_cast<const MissingDataError*>(&e)) return exit_code::kMissingData;
  if (dynamic_cast<const InputError*>(&e)) return exit_code::kInput;
  if (dynamic_cast<const UndefinedMetricError*>(&e)) return exit_code::kInput;
  return exit_code::kRuntime;
}

}  // namespace sefd
