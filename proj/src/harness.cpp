#include "cptc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "cptc/errors.hpp"
#include "cptc/metrics.hpp"
#include "cptc/statepred.hpp"
#include "textio.hpp"

namespace cptc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Seed stream tags: one generator-independent substream per role.
constexpr std::uint64_t kStreamPredictor = 0x70;
constexpr std::uint64_t kStreamEngine = 0x71;
constexpr std::uint64_t kStreamBaselineWarm = 0x72;
constexpr std::uint64_t kStreamBaselineRun = 0x73;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ValidationError("config: " + field + ": " + why);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad_field(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) bad_field(where + "." + it.key(), "unknown field");
  }
}

double get_double(const json& obj, const std::string& where, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad_field(where + "." + key, "expected a number");
  return v.get<double>();
}

std::size_t get_size(const json& obj, const std::string& where,
                     const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    bad_field(where + "." + key, "expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::string get_string(const json& obj, const std::string& where,
                       const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) bad_field(where + "." + key, "expected a string");
  return v.get<std::string>();
}

DatasetConfig dataset_from_json(const json& obj) {
  DatasetConfig out;
  std::string kind = get_string(obj, "dataset", "kind", "bouncing_ball");
  if (kind == "bouncing_ball") {
    out.kind = DatasetKind::kBouncingBall;
    check_keys(obj, "dataset",
               {"kind", "length", "wall_low", "wall_high", "speed", "noise",
                "sigma_up", "sigma_down", "seed"});
    out.ball.length = get_size(obj, "dataset", "length", out.ball.length);
    out.ball.wall_low =
        get_double(obj, "dataset", "wall_low", out.ball.wall_low);
    out.ball.wall_high =
        get_double(obj, "dataset", "wall_high", out.ball.wall_high);
    out.ball.speed = get_double(obj, "dataset", "speed", out.ball.speed);
    std::string noise = get_string(obj, "dataset", "noise", "observation");
    if (noise == "observation") {
      out.ball.noise = BallNoise::kObservation;
    } else if (noise == "dynamics") {
      out.ball.noise = BallNoise::kDynamics;
    } else {
      bad_field("dataset.noise", "must be 'observation' or 'dynamics'");
    }
    out.ball.sigma_up =
        get_double(obj, "dataset", "sigma_up", out.ball.sigma_up);
    out.ball.sigma_down =
        get_double(obj, "dataset", "sigma_down", out.ball.sigma_down);
    out.ball.seed = get_size(obj, "dataset", "seed", out.ball.seed);
  } else if (kind == "three_mode") {
    out.kind = DatasetKind::kThreeMode;
    check_keys(obj, "dataset",
               {"kind", "length", "ar", "offset", "sigma", "duration_lambda",
                "seed"});
    out.three_mode.length =
        get_size(obj, "dataset", "length", out.three_mode.length);
    auto triple = [&](const char* key, std::array<double, 3>& dst) {
      if (!obj.contains(key)) return;
      const json& v = obj.at(key);
      if (!v.is_array() || v.size() != 3) {
        bad_field(std::string("dataset.") + key,
                  "expected an array of 3 numbers");
      }
      for (std::size_t i = 0; i < 3; ++i) {
        if (!v[i].is_number()) {
          bad_field(std::string("dataset.") + key,
                    "expected an array of 3 numbers");
        }
        dst[i] = v[i].get<double>();
      }
    };
    triple("ar", out.three_mode.ar);
    triple("offset", out.three_mode.offset);
    triple("sigma", out.three_mode.sigma);
    out.three_mode.duration_lambda = get_double(
        obj, "dataset", "duration_lambda", out.three_mode.duration_lambda);
    out.three_mode.seed = get_size(obj, "dataset", "seed", out.three_mode.seed);
  } else if (kind == "csv") {
    out.kind = DatasetKind::kCsv;
    check_keys(obj, "dataset",
               {"kind", "path", "t_column", "y_column", "z_column"});
    out.csv_path = get_string(obj, "dataset", "path", "");
    if (out.csv_path.empty()) bad_field("dataset.path", "required");
    out.csv_columns.t =
        get_string(obj, "dataset", "t_column", out.csv_columns.t);
    out.csv_columns.y =
        get_string(obj, "dataset", "y_column", out.csv_columns.y);
    out.csv_columns.z =
        get_string(obj, "dataset", "z_column", out.csv_columns.z);
  } else {
    bad_field("dataset.kind",
              "must be 'bouncing_ball', 'three_mode' or 'csv'");
  }
  return out;
}

PredictorConfig predictor_from_json(const json& obj) {
  PredictorConfig out;
  check_keys(obj, "predictor", {"kind", "epsilon"});
  std::string kind = get_string(obj, "predictor", "kind", "oracle");
  if (kind == "oracle") {
    out.kind = PredictorKind::kOracle;
  } else if (kind == "noisy_oracle") {
    out.kind = PredictorKind::kNoisyOracle;
  } else if (kind == "markov") {
    out.kind = PredictorKind::kMarkov;
  } else {
    bad_field("predictor.kind", "must be 'oracle', 'noisy_oracle' or 'markov'");
  }
  out.epsilon = get_double(obj, "predictor", "epsilon", 0.0);
  if (!(out.epsilon >= 0.0 && out.epsilon <= 1.0)) {
    bad_field("predictor.epsilon", "must be in [0, 1]");
  }
  return out;
}

MethodConfig method_from_json(const json& obj, std::size_t index) {
  const std::string where = "methods[" + std::to_string(index) + "]";
  check_keys(obj, where,
             {"name", "alpha", "gamma", "aggregation", "resolution",
              "warm_size", "warm_mode", "sample_mode", "pool_capacity",
              "baseline_forecast"});
  MethodConfig out;
  out.name = get_string(obj, where, "name", "");
  if (out.name != "cptc" && out.name != "aci" && out.name != "online_cp") {
    bad_field(where + ".name", "must be 'cptc', 'aci' or 'online_cp'");
  }
  out.alpha = get_double(obj, where, "alpha", out.alpha);
  if (!(out.alpha > 0.0 && out.alpha < 1.0)) {
    bad_field(where + ".alpha", "must be in (0, 1)");
  }
  out.gamma = get_double(obj, where, "gamma", out.gamma);
  if (!(out.gamma >= 0.0) || !std::isfinite(out.gamma)) {
    bad_field(where + ".gamma", "must be finite and >= 0");
  }
  std::string agg = get_string(obj, where, "aggregation", "union");
  if (agg == "union") {
    out.aggregation = AggregationMode::kUnion;
  } else if (agg == "levelset") {
    out.aggregation = AggregationMode::kLevelSet;
  } else {
    bad_field(where + ".aggregation", "must be 'union' or 'levelset'");
  }
  out.resolution = get_double(obj, where, "resolution", out.resolution);
  if (!(out.resolution > 0.0)) {
    bad_field(where + ".resolution", "must be > 0");
  }
  out.warm_size = get_size(obj, where, "warm_size", out.warm_size);
  std::string warm = get_string(obj, where, "warm_mode", "sampled");
  if (warm == "sampled") {
    out.warm_mode = WarmStartMode::kSampled;
  } else if (warm == "shared") {
    out.warm_mode = WarmStartMode::kShared;
  } else {
    bad_field(where + ".warm_mode", "must be 'sampled' or 'shared'");
  }
  std::string sample = get_string(obj, where, "sample_mode", "sampled");
  if (sample == "sampled") {
    out.sample_mode = SampleMode::kSampled;
  } else if (sample == "argmax") {
    out.sample_mode = SampleMode::kArgmax;
  } else {
    bad_field(where + ".sample_mode", "must be 'sampled' or 'argmax'");
  }
  if (obj.contains("pool_capacity") && !obj.at("pool_capacity").is_null()) {
    std::size_t cap = get_size(obj, where, "pool_capacity", 0);
    if (cap == 0) bad_field(where + ".pool_capacity", "must be >= 1 or null");
    out.pool_capacity = cap;
  }
  std::string bf = get_string(obj, where, "baseline_forecast", "global");
  if (bf == "global") {
    out.baseline_forecast = BaselineForecast::kGlobal;
  } else if (bf == "per_state") {
    out.baseline_forecast = BaselineForecast::kPerState;
  } else {
    bad_field(where + ".baseline_forecast", "must be 'global' or 'per_state'");
  }
  return out;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) {
    throw ValidationError("config: not valid JSON");
  }
  check_keys(root, "config",
             {"dataset", "predictor", "methods", "seeds", "lookback", "split",
              "jobs"});
  ExperimentConfig cfg;
  if (root.contains("dataset")) {
    cfg.dataset = dataset_from_json(root.at("dataset"));
  }
  if (root.contains("predictor")) {
    cfg.predictor = predictor_from_json(root.at("predictor"));
  }
  if (root.contains("methods")) {
    const json& methods = root.at("methods");
    if (!methods.is_array() || methods.empty()) {
      bad_field("methods", "expected a nonempty array");
    }
    cfg.methods.clear();
    for (std::size_t i = 0; i < methods.size(); ++i) {
      cfg.methods.push_back(method_from_json(methods[i], i));
    }
  }
  std::set<std::string> names;
  for (const MethodConfig& m : cfg.methods) {
    if (!names.insert(m.name).second) {
      bad_field("methods", "duplicate method name '" + m.name + "'");
    }
  }
  if (root.contains("seeds")) {
    const json& seeds = root.at("seeds");
    if (!seeds.is_array() || seeds.empty()) {
      bad_field("seeds", "expected a nonempty array of integers");
    }
    cfg.seeds.clear();
    for (const json& s : seeds) {
      if (!s.is_number_unsigned()) {
        bad_field("seeds", "expected a nonempty array of integers");
      }
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  cfg.lookback = get_size(root, "config", "lookback", cfg.lookback);
  if (cfg.lookback < 1) bad_field("lookback", "must be >= 1");
  if (root.contains("split")) {
    const json& split = root.at("split");
    check_keys(split, "split", {"train", "val", "test"});
    cfg.train_frac = get_double(split, "split", "train", cfg.train_frac);
    cfg.val_frac = get_double(split, "split", "val", cfg.val_frac);
    cfg.test_frac = get_double(split, "split", "test", cfg.test_frac);
  }
  if (!(cfg.train_frac > 0.0) || !(cfg.val_frac >= 0.0) ||
      !(cfg.test_frac > 0.0) ||
      std::abs(cfg.train_frac + cfg.val_frac + cfg.test_frac - 1.0) > 1e-9) {
    bad_field("split", "fractions must be positive and sum to 1");
  }
  cfg.jobs = get_size(root, "config", "jobs", cfg.jobs);
  if (cfg.jobs < 1) bad_field("jobs", "must be >= 1");
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json root;
  json ds;
  switch (cfg.dataset.kind) {
    case DatasetKind::kBouncingBall:
      ds["kind"] = "bouncing_ball";
      ds["length"] = cfg.dataset.ball.length;
      ds["wall_low"] = cfg.dataset.ball.wall_low;
      ds["wall_high"] = cfg.dataset.ball.wall_high;
      ds["speed"] = cfg.dataset.ball.speed;
      ds["noise"] = cfg.dataset.ball.noise == BallNoise::kObservation
                        ? "observation"
                        : "dynamics";
      ds["sigma_up"] = cfg.dataset.ball.sigma_up;
      ds["sigma_down"] = cfg.dataset.ball.sigma_down;
      ds["seed"] = cfg.dataset.ball.seed;
      break;
    case DatasetKind::kThreeMode:
      ds["kind"] = "three_mode";
      ds["length"] = cfg.dataset.three_mode.length;
      ds["ar"] = cfg.dataset.three_mode.ar;
      ds["offset"] = cfg.dataset.three_mode.offset;
      ds["sigma"] = cfg.dataset.three_mode.sigma;
      ds["duration_lambda"] = cfg.dataset.three_mode.duration_lambda;
      ds["seed"] = cfg.dataset.three_mode.seed;
      break;
    case DatasetKind::kCsv:
      ds["kind"] = "csv";
      ds["path"] = cfg.dataset.csv_path;
      ds["t_column"] = cfg.dataset.csv_columns.t;
      ds["y_column"] = cfg.dataset.csv_columns.y;
      ds["z_column"] = cfg.dataset.csv_columns.z;
      break;
  }
  root["dataset"] = ds;
  json pred;
  switch (cfg.predictor.kind) {
    case PredictorKind::kOracle:
      pred["kind"] = "oracle";
      break;
    case PredictorKind::kNoisyOracle:
      pred["kind"] = "noisy_oracle";
      break;
    case PredictorKind::kMarkov:
      pred["kind"] = "markov";
      break;
  }
  pred["epsilon"] = cfg.predictor.epsilon;
  root["predictor"] = pred;
  json methods = json::array();
  for (const MethodConfig& m : cfg.methods) {
    json jm;
    jm["name"] = m.name;
    jm["alpha"] = m.alpha;
    jm["gamma"] = m.gamma;
    jm["aggregation"] =
        m.aggregation == AggregationMode::kUnion ? "union" : "levelset";
    jm["resolution"] = m.resolution;
    jm["warm_size"] = m.warm_size;
    jm["warm_mode"] =
        m.warm_mode == WarmStartMode::kSampled ? "sampled" : "shared";
    jm["sample_mode"] =
        m.sample_mode == SampleMode::kSampled ? "sampled" : "argmax";
    if (m.pool_capacity) {
      jm["pool_capacity"] = *m.pool_capacity;
    } else {
      jm["pool_capacity"] = nullptr;
    }
    jm["baseline_forecast"] =
        m.baseline_forecast == BaselineForecast::kGlobal ? "global"
                                                         : "per_state";
    methods.push_back(jm);
  }
  root["methods"] = methods;
  root["seeds"] = cfg.seeds;
  root["lookback"] = cfg.lookback;
  root["split"] = {{"train", cfg.train_frac},
                   {"val", cfg.val_frac},
                   {"test", cfg.test_frac}};
  root["jobs"] = cfg.jobs;
  return root.dump(2) + "\n";
}

std::string default_config_json() {
  ExperimentConfig cfg;
  cfg.methods = {MethodConfig{}, MethodConfig{}, MethodConfig{}};
  cfg.methods[1].name = "aci";
  cfg.methods[2].name = "online_cp";
  cfg.seeds = {1, 2, 3, 4, 5};
  return config_to_json(cfg);
}

namespace {

SyntheticSeries make_series(const DatasetConfig& dataset, std::uint64_t seed) {
  switch (dataset.kind) {
    case DatasetKind::kBouncingBall: {
      BouncingBallConfig c = dataset.ball;
      c.seed = seed;
      return gen_bouncing_ball(c);
    }
    case DatasetKind::kThreeMode: {
      ThreeModeConfig c = dataset.three_mode;
      c.seed = seed;
      return gen_three_mode(c);
    }
    case DatasetKind::kCsv:
      return load_csv(dataset.csv_path, dataset.csv_columns);
  }
  throw ValidationError("dataset: unknown kind");
}

struct RunContext {
  SyntheticSeries series;
  std::vector<int> z;
  SplitIndices split{};
  int num_states = 0;
  std::shared_ptr<const StateLinearForecaster> forecaster;
  std::unique_ptr<StatePredictor> predictor;
};

RunContext prepare_run(const ExperimentConfig& cfg, std::uint64_t seed) {
  RunContext ctx;
  ctx.series = make_series(cfg.dataset, seed);
  const std::size_t n = ctx.series.y.size();
  ctx.split = split_series(n, cfg.train_frac, cfg.val_frac);
  ctx.z = ctx.series.z;
  ctx.num_states = ctx.series.num_states;
  if (ctx.z.empty()) {
    // Stateless data runs single-state: every label is trivially known.
    ctx.num_states = 1;
    ctx.z.assign(n, 1);
  }
  if (ctx.split.val_end >= n) {
    throw ValidationError("run: test segment is empty");
  }
  if (ctx.split.train_end <= cfg.lookback) {
    throw ValidationError("run: train segment shorter than the lookback");
  }

  std::vector<Observation> train;
  train.reserve(ctx.split.train_end - cfg.lookback);
  for (std::size_t t = cfg.lookback; t < ctx.split.train_end; ++t) {
    Observation obs;
    obs.t = static_cast<std::int64_t>(t);
    obs.x.assign(ctx.series.y.begin() + static_cast<std::ptrdiff_t>(t - cfg.lookback),
                 ctx.series.y.begin() + static_cast<std::ptrdiff_t>(t));
    obs.y = ctx.series.y[t];
    obs.z = ctx.z[t];
    train.push_back(std::move(obs));
  }
  ctx.forecaster = std::make_shared<const StateLinearForecaster>(
      StateLinearForecaster::fit(train, ctx.num_states));

  switch (cfg.predictor.kind) {
    case PredictorKind::kOracle:
      ctx.predictor = std::make_unique<OracleStatePredictor>(ctx.num_states);
      break;
    case PredictorKind::kNoisyOracle:
      ctx.predictor = std::make_unique<NoisyOracleStatePredictor>(
          ctx.num_states, cfg.predictor.epsilon,
          Rng::derive(seed, kStreamPredictor));
      break;
    case PredictorKind::kMarkov:
      ctx.predictor = std::make_unique<MarkovFilterStatePredictor>(
          fit_markov(train, ctx.num_states, *ctx.forecaster), ctx.forecaster);
      break;
  }
  return ctx;
}

}  // namespace

SingleRun run_single(const ExperimentConfig& cfg, const MethodConfig& method,
                     std::uint64_t seed) {
  auto started = std::chrono::steady_clock::now();
  RunContext ctx = prepare_run(cfg, seed);
  const std::size_t n = ctx.series.y.size();
  const std::size_t warm = method.warm_size;
  if (warm > 0 && ctx.split.val_end < warm + cfg.lookback) {
    throw ValidationError(
        "run: warm window does not fit before the test segment");
  }
  const std::size_t warm_begin = ctx.split.val_end - warm;

  SeriesView view;
  view.y = ctx.series.y;
  view.z_true = ctx.z;
  view.begin = ctx.split.val_end;
  view.end = n;

  std::vector<double> x(cfg.lookback);
  auto fill_x = [&](std::size_t t) {
    for (std::size_t j = 0; j < cfg.lookback; ++j) {
      x[j] = ctx.series.y[t - cfg.lookback + j];
    }
  };

  std::vector<StepRecord> records;
  if (method.name == "cptc") {
    CptcConfig ec;
    ec.num_states = ctx.num_states;
    ec.alpha = method.alpha;
    ec.gamma = method.gamma;
    ec.aggregation = method.aggregation;
    ec.levelset_resolution = method.resolution;
    ec.pool_capacity = method.pool_capacity;
    ec.sample_mode = method.sample_mode;
    ec.seed = Rng::derive(seed, kStreamEngine);
    CptcEngine engine(ec);
    std::vector<double> y_hat(static_cast<std::size_t>(ctx.num_states));
    for (std::size_t t = warm_begin; t < ctx.split.val_end; ++t) {
      fill_x(t);
      for (int z = 1; z <= ctx.num_states; ++z) {
        y_hat[static_cast<std::size_t>(z - 1)] = ctx.forecaster->predict(x, z);
      }
      if (method.warm_mode == WarmStartMode::kShared) {
        engine.warm_add_shared(y_hat, ctx.series.y[t]);
      } else {
        StateDistribution dist = ctx.predictor->predict_dist(x, ctx.z[t]);
        engine.warm_add(dist, y_hat, ctx.series.y[t]);
      }
      ctx.predictor->observe(x, ctx.series.y[t]);
    }
    records = run_stream(engine, view, *ctx.predictor, *ctx.forecaster,
                         cfg.lookback);
  } else {
    const bool per_state =
        method.baseline_forecast == BaselineForecast::kPerState;
    Rng warm_rng(Rng::derive(seed, kStreamBaselineWarm));
    auto warm_forecast = [&](std::size_t t) {
      if (!per_state) return ctx.forecaster->predict_global(x);
      StateDistribution dist = ctx.predictor->predict_dist(x, ctx.z[t]);
      return ctx.forecaster->predict(x, sample_state(dist, warm_rng));
    };
    auto warm_into = [&](auto& engine) {
      for (std::size_t t = warm_begin; t < ctx.split.val_end; ++t) {
        fill_x(t);
        engine.warm_insert(nonconformity(ctx.series.y[t], warm_forecast(t)));
        if (per_state) ctx.predictor->observe(x, ctx.series.y[t]);
      }
    };
    StatePredictor* stream_pred = per_state ? ctx.predictor.get() : nullptr;
    std::uint64_t run_seed = Rng::derive(seed, kStreamBaselineRun);
    if (method.name == "aci") {
      AciEngine engine(method.alpha, method.gamma, method.pool_capacity);
      warm_into(engine);
      records = run_stream(engine, view, *ctx.forecaster, cfg.lookback,
                           stream_pred, run_seed);
    } else if (method.name == "online_cp") {
      OnlineCpEngine engine(method.alpha, method.pool_capacity);
      warm_into(engine);
      records = run_stream(engine, view, *ctx.forecaster, cfg.lookback,
                           stream_pred, run_seed);
    } else {
      throw ValidationError("run: unknown method '" + method.name + "'");
    }
  }

  SingleRun out;
  out.records = std::move(records);
  out.runtime_sec = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - started)
                        .count();
  return out;
}

namespace {

std::string set_to_field(const PredictionSet& set) {
  std::string out;
  for (std::size_t i = 0; i < set.intervals.size(); ++i) {
    if (i > 0) out += ';';
    out += textio::fmt(set.intervals[i].lower);
    out += ':';
    out += textio::fmt(set.intervals[i].upper);
  }
  return out;
}

}  // namespace

void write_steps_csv(const std::vector<StepRecord>& records,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << "t,y_true,set,covered,width,sampled_state";
  const std::size_t k = records.empty() ? 0 : records.front().alphas.size();
  for (std::size_t z = 1; z <= k; ++z) out << ",alpha_" << z;
  out << '\n';
  for (const StepRecord& rec : records) {
    out << textio::fmt(rec.t) << ',' << textio::fmt(rec.y_true) << ','
        << set_to_field(rec.set) << ',' << (rec.covered ? 1 : 0) << ','
        << textio::fmt(rec.width) << ',' << rec.sampled_state;
    for (double a : rec.alphas) out << ',' << textio::fmt(a);
    out << '\n';
  }
  if (!out) throw IoError(path + ": write failed");
}

namespace {

std::string steps_basename(const std::string& method, std::uint64_t seed) {
  return "steps_" + method + "_seed" + textio::fmt(seed) + ".csv";
}

std::vector<MethodAggregate> aggregate_runs(
    const std::vector<RunSummary>& runs,
    const std::vector<std::string>& method_order) {
  std::vector<MethodAggregate> out;
  for (const std::string& name : method_order) {
    MethodAggregate agg;
    agg.method = name;
    std::vector<double> covs, widths;
    for (const RunSummary& run : runs) {
      if (run.method != name) continue;
      covs.push_back(run.coverage);
      widths.push_back(run.mean_width);
    }
    if (covs.empty()) continue;
    agg.num_seeds = covs.size();
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    auto sample_std = [&](const std::vector<double>& v, double m) {
      if (v.size() < 2) return 0.0;
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    agg.coverage_mean = mean(covs);
    agg.coverage_std = sample_std(covs, agg.coverage_mean);
    agg.width_mean = mean(widths);
    agg.width_std = sample_std(widths, agg.width_mean);
    out.push_back(agg);
  }
  return out;
}

json run_to_json(const RunSummary& run) {
  json j;
  j["method"] = run.method;
  j["seed"] = run.seed;
  j["coverage"] = run.coverage;
  j["mean_width"] = run.mean_width;
  j["steps"] = run.steps;
  j["runtime_sec"] = run.runtime_sec;
  j["steps_file"] = run.steps_file;
  return j;
}

json result_to_json_obj(const ExperimentResult& result) {
  json root;
  root["runs"] = json::array();
  for (const RunSummary& run : result.runs) {
    root["runs"].push_back(run_to_json(run));
  }
  root["methods"] = json::array();
  for (const MethodAggregate& agg : result.aggregates) {
    json j;
    j["method"] = agg.method;
    j["num_seeds"] = agg.num_seeds;
    j["coverage_mean"] = agg.coverage_mean;
    j["coverage_std"] = agg.coverage_std;
    j["width_mean"] = agg.width_mean;
    j["width_std"] = agg.width_std;
    root["methods"].push_back(j);
  }
  return root;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << text;
  if (!out) throw IoError(path + ": write failed");
}

void write_summary_files(const ExperimentResult& result,
                         const std::string& out_dir) {
  std::string csv =
      "method,seed,coverage,mean_width,steps,runtime_sec,steps_file\n";
  for (const RunSummary& run : result.runs) {
    csv += run.method;
    csv += ',';
    csv += textio::fmt(run.seed);
    csv += ',';
    csv += textio::fmt(run.coverage);
    csv += ',';
    csv += textio::fmt(run.mean_width);
    csv += ',';
    csv += textio::fmt(static_cast<std::uint64_t>(run.steps));
    csv += ',';
    csv += textio::fmt(run.runtime_sec);
    csv += ',';
    csv += run.steps_file;
    csv += '\n';
  }
  write_text(out_dir + "/summary.csv", csv);
  write_text(out_dir + "/summary.json", result_to_json(result));
}

}  // namespace

std::string result_to_json(const ExperimentResult& result) {
  return result_to_json_obj(result).dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  if (cfg.methods.empty()) {
    throw ValidationError("run: no methods configured");
  }
  if (cfg.seeds.empty()) {
    throw ValidationError("run: no seeds configured");
  }
  if (out_dir.empty()) {
    throw ValidationError("run: output directory required");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir + ": cannot create directory");

  struct Task {
    const MethodConfig* method;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const MethodConfig& method : cfg.methods) {
    for (std::uint64_t seed : cfg.seeds) {
      tasks.push_back({&method, seed});
    }
  }

  std::vector<RunSummary> summaries(tasks.size());
  auto work = [&](std::size_t i) {
    const Task& task = tasks[i];
    SingleRun run = run_single(cfg, *task.method, task.seed);
    std::string file = steps_basename(task.method->name, task.seed);
    write_steps_csv(run.records, out_dir + "/" + file);
    RunSummary s;
    s.method = task.method->name;
    s.seed = task.seed;
    s.coverage = coverage(run.records);
    s.mean_width = mean_width(run.records);
    s.steps = run.records.size();
    s.runtime_sec = run.runtime_sec;
    s.steps_file = file;
    summaries[i] = std::move(s);
  };

  std::size_t jobs = std::min(cfg.jobs, tasks.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          try {
            work(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentResult result;
  result.runs = std::move(summaries);
  std::vector<std::string> order;
  for (const MethodConfig& m : cfg.methods) order.push_back(m.name);
  result.aggregates = aggregate_runs(result.runs, order);
  write_summary_files(result, out_dir);
  return result;
}

namespace {

ExperimentConfig apply_sweep_value(const ExperimentConfig& base,
                                   const std::string& parameter,
                                   const std::string& value) {
  ExperimentConfig cfg = base;
  auto as_double = [&]() {
    double v = 0.0;
    if (!textio::parse(std::string_view(value), v)) {
      throw ValidationError("sweep: value '" + value + "' is not a number");
    }
    return v;
  };
  auto as_size = [&]() {
    std::uint64_t v = 0;
    if (!textio::parse(std::string_view(value), v)) {
      throw ValidationError("sweep: value '" + value +
                            "' is not a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
  };
  if (parameter == "epsilon") {
    double v = as_double();
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("sweep: epsilon must be in [0, 1]");
    }
    cfg.predictor.kind = PredictorKind::kNoisyOracle;
    cfg.predictor.epsilon = v;
  } else if (parameter == "alpha") {
    double v = as_double();
    for (MethodConfig& m : cfg.methods) m.alpha = v;
  } else if (parameter == "gamma") {
    double v = as_double();
    for (MethodConfig& m : cfg.methods) m.gamma = v;
  } else if (parameter == "aggregation") {
    AggregationMode mode;
    if (value == "union") {
      mode = AggregationMode::kUnion;
    } else if (value == "levelset") {
      mode = AggregationMode::kLevelSet;
    } else {
      throw ValidationError("sweep: aggregation must be 'union' or 'levelset'");
    }
    for (MethodConfig& m : cfg.methods) m.aggregation = mode;
  } else if (parameter == "resolution") {
    double v = as_double();
    if (!(v > 0.0)) throw ValidationError("sweep: resolution must be > 0");
    for (MethodConfig& m : cfg.methods) m.resolution = v;
  } else if (parameter == "warm_size") {
    std::size_t v = as_size();
    for (MethodConfig& m : cfg.methods) m.warm_size = v;
  } else if (parameter == "warm_mode") {
    WarmStartMode mode;
    if (value == "sampled") {
      mode = WarmStartMode::kSampled;
    } else if (value == "shared") {
      mode = WarmStartMode::kShared;
    } else {
      throw ValidationError("sweep: warm_mode must be 'sampled' or 'shared'");
    }
    for (MethodConfig& m : cfg.methods) m.warm_mode = mode;
  } else if (parameter == "lookback") {
    std::size_t v = as_size();
    if (v < 1) throw ValidationError("sweep: lookback must be >= 1");
    cfg.lookback = v;
  } else {
    throw ValidationError("sweep: unknown parameter '" + parameter + "'");
  }
  return cfg;
}

std::string sanitize_value(const std::string& value) {
  std::string out;
  for (char c : value) {
    bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
              (c >= 'A' && c <= 'Z') || c == '.' || c == '-' || c == '+';
    out += ok ? c : '_';
  }
  return out;
}

}  // namespace

std::string sweep_to_json(const SweepResult& result) {
  json root;
  root["parameter"] = result.parameter;
  root["values"] = result.values;
  root["results"] = json::array();
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    json entry = result_to_json_obj(result.per_value[i]);
    entry["value"] = result.values[i];
    root["results"].push_back(entry);
  }
  return root.dump(2) + "\n";
}

SweepResult sweep_experiment(const ExperimentConfig& cfg,
                             const std::string& parameter,
                             const std::vector<std::string>& values,
                             const std::string& out_dir) {
  if (values.empty()) {
    throw ValidationError("sweep: at least one value required");
  }
  if (out_dir.empty()) {
    throw ValidationError("sweep: output directory required");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir + ": cannot create directory");

  SweepResult result;
  result.parameter = parameter;
  result.values = values;
  for (const std::string& value : values) {
    ExperimentConfig swept = apply_sweep_value(cfg, parameter, value);
    std::string sub = out_dir + "/" + parameter + "_" + sanitize_value(value);
    result.per_value.push_back(run_experiment(swept, sub));
  }

  std::string csv =
      "parameter,value,method,seed,coverage,mean_width,steps,runtime_sec\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (const RunSummary& run : result.per_value[i].runs) {
      csv += parameter;
      csv += ',';
      csv += values[i];
      csv += ',';
      csv += run.method;
      csv += ',';
      csv += textio::fmt(run.seed);
      csv += ',';
      csv += textio::fmt(run.coverage);
      csv += ',';
      csv += textio::fmt(run.mean_width);
      csv += ',';
      csv += textio::fmt(static_cast<std::uint64_t>(run.steps));
      csv += ',';
      csv += textio::fmt(run.runtime_sec);
      csv += '\n';
    }
  }
  write_text(out_dir + "/sweep_summary.csv", csv);
  write_text(out_dir + "/sweep_summary.json", sweep_to_json(result));
  return result;
}

ExperimentResult report_directory(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError(dir + ": not a directory");
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.rfind("steps_", 0) == 0 && name.size() > 4 &&
        name.substr(name.size() - 4) == ".csv") {
      files.push_back(name);
    }
  }
  if (files.empty()) {
    throw IoError(dir + ": no steps_*.csv files found");
  }
  std::sort(files.begin(), files.end());

  ExperimentResult result;
  std::vector<std::string> order;
  for (const std::string& name : files) {
    // steps_<method>_seed<NUM>.csv
    std::string stem = name.substr(6, name.size() - 10);
    std::size_t pos = stem.rfind("_seed");
    std::uint64_t seed = 0;
    if (pos == std::string::npos ||
        !textio::parse(std::string_view(stem).substr(pos + 5), seed)) {
      throw IoError(dir + "/" + name + ": file name does not follow "
                    "steps_<method>_seed<seed>.csv");
    }
    std::string method = stem.substr(0, pos);

    std::string path = dir + "/" + name;
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ":1: missing header");
    auto header = textio::split(textio::strip_cr(line), ',');
    std::size_t covered_idx = header.size(), width_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == "covered") covered_idx = i;
      if (header[i] == "width") width_idx = i;
    }
    if (covered_idx == header.size() || width_idx == header.size()) {
      throw IoError(path + ":1: missing 'covered' or 'width' column");
    }
    std::size_t lineno = 1;
    std::size_t steps = 0, hits = 0;
    double width_sum = 0.0;
    while (std::getline(in, line)) {
      ++lineno;
      auto fields = textio::split(textio::strip_cr(line), ',');
      if (fields.size() != header.size()) {
        throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
      }
      std::int64_t covered = 0;
      double width = 0.0;
      if (!textio::parse(fields[covered_idx], covered) ||
          (covered != 0 && covered != 1)) {
        throw IoError(path + ":" + std::to_string(lineno) +
                      ": 'covered' must be 0 or 1");
      }
      if (!textio::parse(fields[width_idx], width)) {
        throw IoError(path + ":" + std::to_string(lineno) +
                      ": 'width' is not a number");
      }
      ++steps;
      hits += static_cast<std::size_t>(covered);
      width_sum += width;
    }
    if (steps == 0) throw IoError(path + ": no data rows");

    RunSummary s;
    s.method = method;
    s.seed = seed;
    s.coverage = static_cast<double>(hits) / static_cast<double>(steps);
    s.mean_width = width_sum / static_cast<double>(steps);
    s.steps = steps;
    s.runtime_sec = 0.0;
    s.steps_file = name;
    result.runs.push_back(std::move(s));
    if (std::find(order.begin(), order.end(), method) == order.end()) {
      order.push_back(method);
    }
  }
  result.aggregates = aggregate_runs(result.runs, order);
  return result;
}

}  // namespace cptc
