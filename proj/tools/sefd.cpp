#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "sefd/commands.hpp"
#include "sefd/errors.hpp"
#include "sefd/jsonl.hpp"

namespace {

// Flags shared by detect and sweep; they mirror RunOptions one to one.
void add_run_options(CLI::App* cmd, sefd::RunOptions& o, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON run config (flags override it)");
  cmd->add_option("--preset", o.preset,
                  "Detector preset: log-likelihood, detectgpt, id-mle, watermark");
  cmd->add_option("--orientation", o.orientation, "higher | lower (which side means LLM)");
  cmd->add_option("--calibration", o.calibration_path, "Calibration file {\"min\", \"max\"}");
  cmd->add_option("--cal-min", o.calibration_min, "Calibration lower bound (raw scale)");
  cmd->add_option("--cal-max", o.calibration_max, "Calibration upper bound (raw scale)");
  cmd->add_option("--epsilon-det", o.epsilon_det, "Pool-update threshold, oriented raw scale");
  cmd->add_option("--epsilon-sim", o.epsilon_sim, "Pool-update similarity threshold");
  cmd->add_option("--lambda1", o.lambda1);
  cmd->add_option("--lambda2", o.lambda2);
  cmd->add_option("--decision-epsilon", o.decision_epsilon,
                  "Decision threshold on the fused score (no default)");
  cmd->add_option("--pool", o.pool_path, "Initial pool file");
  cmd->add_option("--pool-fraction", o.pool_fraction,
                  "Seed the pool with this fraction of the stream's LLM originals");
  cmd->add_option("--scores", o.scores_path, "Score file {\"id\", \"score\"} per line");
  cmd->add_option("--synthetic-scores", o.synthetic_scores_path,
                  "Sample scores from a source-model / synthgen config");
  cmd->add_option("--embeddings", o.embeddings_path, "Embedding file {\"id\", \"vector\"} per line");
  cmd->add_option("--bridge-cmd", o.bridge_command, "Encoder worker command (stdio protocol)");
  cmd->add_option("--bridge-url", o.bridge_url, "Encoder worker base URL (HTTP protocol)");
  cmd->add_flag("--no-pool-update", o.no_pool_update, "Freeze the pool");
  cmd->add_flag("--no-fusion", o.no_fusion, "Decide on the normalized detector score alone");
  cmd->add_flag("--running-minmax", o.running_minmax,
                "Normalize against running min/max instead of calibration bounds");
  cmd->add_option("--seed", o.seed);
}

sefd::RunOptions with_config(const sefd::RunOptions& flags, const std::string& config_path) {
  if (config_path.empty()) return flags;
  auto merged = sefd::load_run_options(config_path);
  merged.merge(flags);
  return merged;
}

// A snapshot written by detect/sweep records its stream; use it when
// --stream is not given.
std::string stream_or_snapshot(const std::string& flag, const std::string& config_path) {
  if (!flag.empty()) return flag;
  if (!config_path.empty()) {
    const auto j = sefd::jsonl::read_json_file(config_path);
    if (auto it = j.find("stream"); it != j.end() && it->is_string()) return it->get<std::string>();
  }
  throw CLI::RequiredError("--stream");
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"sefd: semantic-enhanced streaming detection of LLM-generated text"};
  app.require_subcommand(1);

  sefd::DetectArgs detect;
  std::string detect_config;
  auto* detect_cmd = app.add_subcommand("detect", "Run the detector over a stream");
  add_run_options(detect_cmd, detect.options, detect_config);
  detect_cmd->add_option("--stream", detect.stream_path,
                         "Input stream (JSONL); defaults to the one named in --config");
  detect_cmd->add_option("--out", detect.out_path, "Outcome file (JSONL)")->required();
  detect_cmd->add_option("--pool-out", detect.pool_out, "Write the final pool here");
  detect_cmd->add_option("--config-out", detect.config_out,
                         "Config snapshot path (default <out>.config.json)");

  sefd::EvaluateArgs eval;
  std::string eval_field = "fused";
  auto* eval_cmd = app.add_subcommand("evaluate", "AUROC and TPR@FPR per truth group");
  eval_cmd->add_option("--outcomes", eval.outcomes_path)->required();
  eval_cmd->add_option("--stream", eval.stream_path, "Truth-bearing stream")->required();
  eval_cmd->add_option("--fpr", eval.fpr_targets, "FPR targets (default 0.01)");
  eval_cmd->add_option("--out", eval.out_path, "Report file (JSONL); stdout if absent");
  eval_cmd->add_option("--score-field", eval_field, "fused | normalized")
      ->check(CLI::IsMember({"fused", "normalized"}));
  eval_cmd->add_option("--run-config", eval.run_config_path, "Attach this run snapshot");

  sefd::SweepArgs sweep;
  std::string sweep_config;
  std::string sweep_axis;
  auto* sweep_cmd = app.add_subcommand("sweep", "Metrics across pool fractions, depths or lambdas");
  add_run_options(sweep_cmd, sweep.options, sweep_config);
  sweep_cmd->add_option("--stream", sweep.stream_path,
                        "Input stream (JSONL); defaults to the one named in --config");
  sweep_cmd->add_option("--axis", sweep_axis, "pool_fraction | recursion_depth | lambda-grid")
      ->required();
  sweep_cmd->add_option("--values", sweep.values, "Axis values (lambda grid: l1:l2)")->required();
  sweep_cmd->add_option("--fpr", sweep.fpr_targets, "FPR targets (default 0.01)");
  sweep_cmd->add_option("--out", sweep.out_path, "CSV output")->required();

  sefd::GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic labelled stream");
  gen_cmd->add_option("--config", gen.config_path, "Synthgen config (JSON)");
  gen_cmd->add_option("--llm", gen.llm_count, "Number of LLM originals");
  gen_cmd->add_option("--human", gen.human_count, "Number of human texts");
  gen_cmd->add_option("--depth", gen.depth, "Paraphrase rounds");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--dimension", gen.dimension);
  gen_cmd->add_option("--c-step", gen.c_step, "Cosine between consecutive paraphrases");
  gen_cmd->add_option("--out", gen.out_path)->required();
  gen_cmd->add_option("--pool-fraction", gen.pool_fraction);
  gen_cmd->add_option("--pool-out", gen.pool_out);
  gen_cmd->add_option("--calibration-out", gen.calibration_out);
  auto* gen_defaults_cmd =
      app.add_subcommand("gen-defaults", "Print the default synthgen config");

  std::string cal_scores, cal_out;
  auto* cal_cmd = app.add_subcommand("calibrate", "Min/max calibration bounds from a score file");
  cal_cmd->add_option("--scores", cal_scores)->required();
  cal_cmd->add_option("--out", cal_out)->required();

  auto* pool_cmd = app.add_subcommand("pool", "Inspect, build or query pool files");
  pool_cmd->require_subcommand(1);
  std::string pool_in, pool_stream, pool_truth, pool_out;
  auto* inspect_cmd = pool_cmd->add_subcommand("inspect", "Print dimension, size and ids");
  inspect_cmd->add_option("--pool", pool_in)->required();
  auto* build_cmd = pool_cmd->add_subcommand("build", "Save stream embeddings as a pool");
  build_cmd->add_option("--stream", pool_stream)->required();
  build_cmd->add_option("--truth", pool_truth, "Only texts with this label (e.g. llm)");
  build_cmd->add_option("--out", pool_out)->required();
  auto* query_cmd = pool_cmd->add_subcommand("query", "Max-cosine lookup for each stream text");
  query_cmd->add_option("--pool", pool_in)->required();
  query_cmd->add_option("--stream", pool_stream)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : sefd::exit_code::kUsage;
  }

  try {
    if (*detect_cmd) {
      detect.stream_path = stream_or_snapshot(detect.stream_path, detect_config);
      detect.options = with_config(detect.options, detect_config);
      const auto run = sefd::cmd_detect(detect);
      std::cerr << "processed " << run.outcomes.size() << " texts; pool size "
                << (run.final_pool ? run.final_pool->size() : 0) << '\n';
    } else if (*eval_cmd) {
      eval.field = eval_field == "fused" ? sefd::ScoreField::Fused : sefd::ScoreField::Normalized;
      sefd::cmd_evaluate(eval, std::cout);
    } else if (*sweep_cmd) {
      sweep.stream_path = stream_or_snapshot(sweep.stream_path, sweep_config);
      sweep.options = with_config(sweep.options, sweep_config);
      sweep.axis = sefd::parse_sweep_axis(sweep_axis);
      sefd::cmd_sweep(sweep);
    } else if (*gen_cmd) {
      const auto s = sefd::cmd_gen(gen);
      std::cerr << "generated " << s.texts.size() << " texts (seed " << s.seed << ")\n";
    } else if (*gen_defaults_cmd) {
      std::cout << sefd::to_json(sefd::SynthConfig{}).dump(2) << '\n';
    } else if (*cal_cmd) {
      const auto b = sefd::cmd_calibrate(cal_scores, cal_out);
      std::cerr << "min " << b.min << " max " << b.max << '\n';
    } else if (*inspect_cmd) {
      sefd::cmd_pool_inspect(pool_in, std::cout);
    } else if (*build_cmd) {
      const auto pool = sefd::cmd_pool_build(pool_stream, pool_truth, pool_out);
      std::cerr << "pool of " << pool.size() << " entries, d=" << pool.dimension() << '\n';
    } else if (*query_cmd) {
      sefd::cmd_pool_query(pool_in, pool_stream, std::cout);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : sefd::exit_code::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sefd::exit_code_for(e);
  }
  return sefd::exit_code::kOk;
}
