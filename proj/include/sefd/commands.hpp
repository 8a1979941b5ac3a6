#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sefd/embedding_provider.hpp"
#include "sefd/metrics.hpp"
#include "sefd/pipeline.hpp"
#include "sefd/run_config.hpp"
#include "sefd/scoring.hpp"
#include "sefd/synthgen.hpp"

namespace sefd {

struct Providers {
  std::unique_ptr<ScoreProvider> scores;
  std::unique_ptr<EmbeddingProvider> embeddings;
};

Providers make_providers(const RunConfig& config);

// Fills raw_score and embedding of every text from the providers where they
// are not given inline.
std::vector<CandidateText> materialize(std::span<const CandidateText> stream, Providers& providers);

// Initial pool per the config: loaded from file, sampled from the stream's
// LLM originals by fraction, or absent.
std::optional<RetrievalPool> initial_pool(const RunConfig& config,
                                          std::span<const CandidateText> stream,
                                          Providers& providers);

struct DetectRun {
  std::vector<StepOutcome> outcomes;
  std::optional<RetrievalPool> final_pool;
};

DetectRun run_detection(const RunConfig& config, std::span<const CandidateText> stream,
                        Providers& providers);

struct DetectArgs {
  RunOptions options;
  std::string stream_path;
  std::string out_path;
  std::optional<std::string> pool_out;
  std::optional<std::string> config_out;  // default: <out_path>.config.json
};

DetectRun cmd_detect(const DetectArgs& args);

struct EvaluateArgs {
  std::string outcomes_path;
  std::string stream_path;
  std::vector<double> fpr_targets{0.01};
  std::optional<std::string> out_path;  // JSONL, one report per group
  ScoreField field = ScoreField::Fused;
  std::optional<std::string> run_config_path;  // copied into each report
};

std::vector<MetricsReport> cmd_evaluate(const EvaluateArgs& args, std::ostream& out);

enum class SweepAxis { PoolFraction, RecursionDepth, LambdaGrid };
SweepAxis parse_sweep_axis(const std::string& s);
std::string to_string(SweepAxis a);

struct SweepRow {
  std::string value;
  MetricsReport report;
};

// One run per axis value (recursion_depth: one run, one row per depth).
// Runs are independent and fan out across threads; row order follows
// `values`, then group order.
std::vector<SweepRow> run_sweep(const RunConfig& config, std::span<const CandidateText> stream,
                                SweepAxis axis, const std::vector<std::string>& values,
                                std::span<const double> fpr_targets);

void write_sweep_csv(std::ostream& out, SweepAxis axis, std::span<const SweepRow> rows,
                     std::span<const double> fpr_targets);

struct SweepArgs {
  RunOptions options;
  std::string stream_path;
  SweepAxis axis = SweepAxis::PoolFraction;
  std::vector<std::string> values;
  std::vector<double> fpr_targets{0.01};
  std::string out_path;
};

std::vector<SweepRow> cmd_sweep(const SweepArgs& args);

struct GenArgs {
  std::optional<std::string> config_path;
  std::optional<std::size_t> llm_count;
  std::optional<std::size_t> human_count;
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> dimension;
  std::optional<double> c_step;
  std::string out_path;
  std::optional<double> pool_fraction;
  std::optional<std::string> pool_out;
  std::optional<std::string> calibration_out;
};

SyntheticStream cmd_gen(const GenArgs& args);

CalibrationBounds cmd_calibrate(const std::string& scores_path, const std::string& out_path);

void cmd_pool_inspect(const std::string& pool_path, std::ostream& out);
// Pool of the embeddings of stream texts whose truth label is `truth` (all
// texts when empty).
RetrievalPool cmd_pool_build(const std::string& stream_path, const std::string& truth,
                             const std::string& out_path);
void cmd_pool_query(const std::string& pool_path, const std::string& stream_path,
                    std::ostream& out);

// Maps an exception escaping a command to the CLI exit code.
int exit_code_for(const std::exception& e);

}  // namespace sefd
