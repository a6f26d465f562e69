#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cptc/datagen.hpp"
#include "cptc/engine.hpp"

namespace cptc {

enum class DatasetKind { kBouncingBall, kThreeMode, kCsv };
enum class PredictorKind { kOracle, kNoisyOracle, kMarkov };
enum class BaselineForecast { kGlobal, kPerState };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kBouncingBall;
  BouncingBallConfig ball;
  ThreeModeConfig three_mode;
  std::string csv_path;
  CsvColumns csv_columns;
};

struct PredictorConfig {
  PredictorKind kind = PredictorKind::kOracle;
  double epsilon = 0.0;
};

struct MethodConfig {
  std::string name = "cptc";  // "cptc" | "aci" | "online_cp"
  double alpha = 0.1;
  double gamma = 0.005;
  AggregationMode aggregation = AggregationMode::kUnion;
  double resolution = 0.02;
  std::size_t warm_size = 50;
  WarmStartMode warm_mode = WarmStartMode::kSampled;
  SampleMode sample_mode = SampleMode::kSampled;
  std::optional<std::size_t> pool_capacity;
  // Baselines forecast with the pooled fit by default; kPerState gives them
  // the same per-state point forecasts a CPTC run would see.
  BaselineForecast baseline_forecast = BaselineForecast::kGlobal;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  PredictorConfig predictor;
  std::vector<MethodConfig> methods;
  std::vector<std::uint64_t> seeds = {1};
  std::size_t lookback = 5;
  double train_frac = 0.7;
  double val_frac = 0.1;
  double test_frac = 0.2;
  std::size_t jobs = 1;
};

// Strict JSON parsing: unknown keys, wrong types, and out-of-range values all
// raise ValidationError naming the field.
ExperimentConfig config_from_json(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);
std::string default_config_json();

struct RunSummary {
  std::string method;
  std::uint64_t seed = 0;
  double coverage = 0.0;
  double mean_width = 0.0;
  std::size_t steps = 0;
  double runtime_sec = 0.0;
  std::string steps_file;
};

struct MethodAggregate {
  std::string method;
  std::size_t num_seeds = 0;
  double coverage_mean = 0.0;
  double coverage_std = 0.0;
  double width_mean = 0.0;
  double width_std = 0.0;
};

struct ExperimentResult {
  std::vector<RunSummary> runs;
  std::vector<MethodAggregate> aggregates;
};

// One (method, seed) run, entirely in memory: generate or load the series,
// split, fit, warm start, stream the test segment.
struct SingleRun {
  std::vector<StepRecord> records;
  double runtime_sec = 0.0;
};

SingleRun run_single(const ExperimentConfig& cfg, const MethodConfig& method,
                     std::uint64_t seed);

// Runs the full method x seed grid, writes one per-step CSV per run plus
// summary.csv and summary.json under out_dir, and returns the summaries.
// Runs are independent and may execute in parallel (cfg.jobs); the per-step
// files are byte-identical regardless of job count (summaries embed wall
// times, which are not).
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir);

// Re-runs the experiment once per value of a single swept parameter
// ("epsilon", "alpha", "gamma", "aggregation", "warm_size", "warm_mode",
// "resolution", "lookback"); each value writes under its own subdirectory
// and the merged summary is keyed by value.
struct SweepResult {
  std::string parameter;
  std::vector<std::string> values;
  std::vector<ExperimentResult> per_value;
};

SweepResult sweep_experiment(const ExperimentConfig& cfg,
                             const std::string& parameter,
                             const std::vector<std::string>& values,
                             const std::string& out_dir);

// Rebuilds summaries from the per-step CSVs found in a directory (written by
// run_experiment); recomputed coverage and width match the original run
// exactly.
ExperimentResult report_directory(const std::string& dir);

std::string result_to_json(const ExperimentResult& result);
std::string sweep_to_json(const SweepResult& result);

// Per-step CSV schema shared by writer, reader and external tooling:
// t,y_true,set,covered,width,sampled_state,alpha_1..alpha_K. The set column
// is semicolon-joined lo:hi pairs (empty for the empty set), doubles are
// printed round-trip exact, infinities as inf/-inf.
void write_steps_csv(const std::vector<StepRecord>& records,
                     const std::string& path);

}  // namespace cptc
