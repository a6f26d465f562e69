// End-to-end acceptance suite for the streaming engines, generators and
// harness. Each numbered criterion prints one [PASS]/[FAIL] line with its
// measured values; the exit code is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "cptc/aggregate.hpp"
#include "cptc/datagen.hpp"
#include "cptc/engine.hpp"
#include "cptc/engines.hpp"
#include "cptc/forecast.hpp"
#include "cptc/harness.hpp"
#include "cptc/metrics.hpp"
#include "cptc/rng.hpp"
#include "cptc/scores.hpp"
#include "cptc/statepred.hpp"
#include "cptc/types.hpp"

using namespace cptc;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt4(double x) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << x;
  return out.str();
}

// Per-state iterate identity: over the steps that charged state z, the final
// iterate must equal alpha + gamma * (steps * alpha - misses).
bool iterates_telescope(const std::vector<StepRecord>& records, double alpha,
                        double gamma, int num_states) {
  if (records.empty()) return true;
  std::vector<std::size_t> charged(static_cast<std::size_t>(num_states), 0);
  std::vector<std::size_t> missed(static_cast<std::size_t>(num_states), 0);
  for (const StepRecord& rec : records) {
    auto zi = static_cast<std::size_t>(rec.sampled_state - 1);
    ++charged[zi];
    if (!rec.covered) ++missed[zi];
  }
  for (std::size_t z = 0; z < charged.size(); ++z) {
    double expected =
        alpha + gamma * (static_cast<double>(charged[z]) * alpha -
                         static_cast<double>(missed[z]));
    if (std::abs(records.back().alphas[z] - expected) > 1e-9) return false;
  }
  return true;
}

// ---- criteria 1 and 2 share one batch of bouncing-ball runs ----

struct BbCell {
  std::vector<double> coverages;
  std::vector<double> widths;
};

struct BbBatch {
  // [dataset 0=obs,1=dyn][setting 0=true labels,1=eps .2,2=eps .5]
  BbCell cells[2][3];
  double elapsed_sec = 0.0;
  bool telescoped = true;
};

BbBatch run_bb_batch() {
  const int num_seeds = 20;
  const double epsilons[3] = {0.0, 0.2, 0.5};
  BbBatch batch;
  auto started = std::chrono::steady_clock::now();
  for (int d = 0; d < 2; ++d) {
    for (int p = 0; p < 3; ++p) {
      ExperimentConfig cfg;
      cfg.dataset.kind = DatasetKind::kBouncingBall;
      // wide walls and a fast drift separate the per-state forecasts, so
      // hedging across states costs visibly more than knowing the state
      cfg.dataset.ball.wall_high = 4.0;
      cfg.dataset.ball.speed = 0.4;
      cfg.dataset.ball.sigma_up = 0.05;
      cfg.dataset.ball.sigma_down = 0.15;
      cfg.dataset.ball.noise =
          d == 0 ? BallNoise::kObservation : BallNoise::kDynamics;
      cfg.predictor.kind =
          p == 0 ? PredictorKind::kOracle : PredictorKind::kNoisyOracle;
      cfg.predictor.epsilon = epsilons[p];
      MethodConfig method;
      method.name = "cptc";
      method.alpha = 0.1;
      method.gamma = 0.005;
      method.warm_size = 50;
      cfg.methods = {method};
      for (int seed = 1; seed <= num_seeds; ++seed) {
        SingleRun run = run_single(cfg, method, static_cast<std::uint64_t>(seed));
        batch.cells[d][p].coverages.push_back(coverage(run.records));
        batch.cells[d][p].widths.push_back(mean_width(run.records));
        batch.telescoped = batch.telescoped &&
                           iterates_telescope(run.records, method.alpha,
                                              method.gamma, 2);
      }
    }
  }
  batch.elapsed_sec = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  return batch;
}

bool criterion1(const BbBatch& batch, std::string& detail) {
  bool pass = batch.elapsed_sec < 30.0;
  std::ostringstream out;
  const char* ds_names[2] = {"obs", "dyn"};
  for (int d = 0; d < 2; ++d) {
    out << ds_names[d] << " cov";
    for (int p = 0; p < 3; ++p) {
      double m = mean_of(batch.cells[d][p].coverages);
      pass = pass && m >= 0.89 && m <= 0.91;
      out << ' ' << fmt4(m);
    }
    out << (d == 0 ? " | " : "");
  }
  out << " | " << fmt4(batch.elapsed_sec) << "s";
  detail = "state-noise coverage invariance: " + out.str();
  return pass;
}

bool criterion2(const BbBatch& batch, std::string& detail) {
  bool pass = true;
  std::ostringstream out;
  const char* ds_names[2] = {"obs", "dyn"};
  for (int d = 0; d < 2; ++d) {
    double w0 = median_of(batch.cells[d][0].widths);
    double w2 = median_of(batch.cells[d][1].widths);
    double w5 = median_of(batch.cells[d][2].widths);
    pass = pass && w0 < w2 && w2 < w5 && w0 < 0.5 * w5;
    out << ds_names[d] << " width " << fmt4(w0) << " < " << fmt4(w2) << " < "
        << fmt4(w5) << " ratio " << fmt4(w0 / w5)
        << (d == 0 ? " | " : "");
  }
  detail = "width grows with state noise: " + out.str();
  return pass;
}

bool criterion3(std::string& detail) {
  const int num_seeds = 20;
  MethodConfig method;
  method.name = "cptc";
  method.alpha = 0.1;
  method.gamma = 0.005;
  method.warm_size = 50;
  auto config_for = [&](std::size_t length) {
    ExperimentConfig cfg;
    cfg.dataset.kind = DatasetKind::kThreeMode;
    cfg.dataset.three_mode.length = length;
    cfg.predictor.kind = PredictorKind::kNoisyOracle;
    cfg.predictor.epsilon = 0.2;
    cfg.methods = {method};
    return cfg;
  };
  ExperimentConfig short_cfg = config_for(2500);   // 500 test steps
  ExperimentConfig long_cfg = config_for(25000);   // 5000 test steps
  int improved = 0;
  double worst_long = 0.0;
  bool all_small = true;
  for (int seed = 1; seed <= num_seeds; ++seed) {
    auto s = static_cast<std::uint64_t>(seed);
    double dev_short =
        std::abs(coverage(run_single(short_cfg, method, s).records) - 0.9);
    double dev_long =
        std::abs(coverage(run_single(long_cfg, method, s).records) - 0.9);
    if (dev_long <= dev_short) ++improved;
    worst_long = std::max(worst_long, dev_long);
    all_small = all_small && dev_long <= 0.02;
  }
  bool pass = improved >= 14 && all_small;
  detail = "coverage error shrinks with horizon: improved " +
           std::to_string(improved) + "/20, worst long-run dev " +
           fmt4(worst_long);
  return pass;
}

bool criterion4(const BbBatch& batch, std::string& detail) {
  // the batch already checked every bouncing-ball run; add a spread of other
  // configurations
  bool pass = batch.telescoped;
  int checked = 120;
  struct Case {
    DatasetKind dataset;
    PredictorKind predictor;
    double epsilon;
    AggregationMode aggregation;
    SampleMode sample;
    std::uint64_t seed;
  };
  const Case cases[] = {
      {DatasetKind::kThreeMode, PredictorKind::kNoisyOracle, 0.3,
       AggregationMode::kUnion, SampleMode::kSampled, 2},
      {DatasetKind::kThreeMode, PredictorKind::kMarkov, 0.0,
       AggregationMode::kLevelSet, SampleMode::kSampled, 3},
      {DatasetKind::kThreeMode, PredictorKind::kMarkov, 0.0,
       AggregationMode::kUnion, SampleMode::kArgmax, 4},
      {DatasetKind::kBouncingBall, PredictorKind::kMarkov, 0.0,
       AggregationMode::kLevelSet, SampleMode::kSampled, 5},
  };
  for (const Case& c : cases) {
    ExperimentConfig cfg;
    cfg.dataset.kind = c.dataset;
    cfg.predictor.kind = c.predictor;
    cfg.predictor.epsilon = c.epsilon;
    MethodConfig method;
    method.name = "cptc";
    method.alpha = 0.1;
    method.gamma = 0.01;
    method.warm_size = 50;
    method.aggregation = c.aggregation;
    method.resolution = 0.02;
    method.sample_mode = c.sample;
    cfg.methods = {method};
    SingleRun run = run_single(cfg, method, c.seed);
    int k = c.dataset == DatasetKind::kThreeMode ? 3 : 2;
    pass = pass && iterates_telescope(run.records, method.alpha, method.gamma,
                                      k);
    ++checked;
  }
  detail = "per-state iterate telescoping within 1e-9 on " +
           std::to_string(checked) + " runs";
  return pass;
}

// ---- criterion 5: adaptation after a regime change, engine level ----

struct AciRunCheck {
  double coverage = 0.0;
  double alpha_start = 0.0;
  double alpha_end = 0.0;
  double gamma = 0.0;
  std::size_t steps = 0;
};

std::vector<AciRunCheck> g_aci_runs;

struct ShiftOutcome {
  double dev_cptc = 0.0;
  double dev_aci = 0.0;
};

// Two AR(1) modes sharing dynamics but not noise scale; the test segment has
// one long block per mode so the change hits at a known index.
ShiftOutcome run_shift_pair(std::uint64_t seed) {
  const double ar = 0.8;
  const double sigma[2] = {0.1, 1.0};
  const std::size_t lookback = 2;
  std::vector<double> y;
  std::vector<int> z;
  Rng rng(Rng::derive(seed, 0x5151));
  double prev = 0.0;
  auto push = [&](int mode, int steps) {
    for (int i = 0; i < steps; ++i) {
      prev = ar * prev + rng.normal(0.0, sigma[mode - 1]);
      y.push_back(prev);
      z.push_back(mode);
    }
  };
  for (int block = 0; block < 12; ++block) push(1 + block % 2, 50);  // train
  push(1, 50);                                                       // warm
  push(2, 50);
  push(1, 250);  // test: one long segment per mode
  push(2, 250);
  const std::size_t train_end = 600;
  const std::size_t test_begin = 700;

  std::vector<Observation> rows;
  for (std::size_t t = lookback; t < train_end; ++t) {
    Observation obs;
    obs.t = static_cast<std::int64_t>(t);
    obs.x = {y[t - 2], y[t - 1]};
    obs.y = y[t];
    obs.z = z[t];
    rows.push_back(std::move(obs));
  }
  auto fc = StateLinearForecaster::fit(rows, 2);

  CptcConfig cc;
  cc.num_states = 2;
  cc.alpha = 0.1;
  cc.gamma = 0.005;
  cc.seed = Rng::derive(seed, 0x52);
  CptcEngine cptc_engine(cc);
  AciEngine aci_engine(0.1, 0.005);

  std::vector<double> x(lookback), y_hat(2);
  for (std::size_t t = train_end; t < test_begin; ++t) {
    x = {y[t - 2], y[t - 1]};
    y_hat = {fc.predict(x, 1), fc.predict(x, 2)};
    cptc_engine.warm_add(StateDistribution::point_mass(2, z[t]), y_hat, y[t]);
    aci_engine.warm_insert(nonconformity(y[t], fc.predict_global(x)));
  }

  SeriesView view{y, z, test_begin, y.size()};
  OracleStatePredictor oracle(2);
  auto cptc_records = run_stream(cptc_engine, view, oracle, fc, lookback);
  auto aci_records = run_stream(aci_engine, view, fc, lookback);

  g_aci_runs.push_back({coverage(aci_records), 0.1, aci_engine.alpha_raw(),
                        aci_engine.gamma(), aci_records.size()});

  std::vector<std::size_t> shifts = {250};  // record index of the mode change
  ShiftOutcome out;
  out.dev_cptc = post_shift_deviation(cptc_records, shifts, 50, 0.1);
  out.dev_aci = post_shift_deviation(aci_records, shifts, 50, 0.1);
  return out;
}

bool criterion5(std::string& detail) {
  const int num_seeds = 40;
  std::vector<double> dev_cptc, dev_aci;
  int wins = 0;
  for (int seed = 1; seed <= num_seeds; ++seed) {
    ShiftOutcome out = run_shift_pair(static_cast<std::uint64_t>(seed));
    dev_cptc.push_back(out.dev_cptc);
    dev_aci.push_back(out.dev_aci);
    if (out.dev_cptc < out.dev_aci) ++wins;
  }
  double med_cptc = median_of(dev_cptc);
  double med_aci = median_of(dev_aci);
  bool pass = med_cptc <= med_aci &&
              wins * 10 >= num_seeds * 7;  // wins / seeds >= 0.7
  detail = "post-change calibration: median dev " + fmt4(med_cptc) +
           " vs baseline " + fmt4(med_aci) + ", wins " + std::to_string(wins) +
           "/" + std::to_string(num_seeds);
  return pass;
}

// ---- criterion 6: streaming quantile vs. sorted-rank reference ----

double brute_quantile(std::vector<double> scores, double level) {
  std::sort(scores.begin(), scores.end());
  scores.push_back(kInf);
  double n1 = static_cast<double>(scores.size());
  std::size_t r = 1;
  while (static_cast<double>(r) + 1e-9 < level * n1) ++r;
  return scores[r - 1];
}

bool criterion6(std::string& detail) {
  Rng rng(606);
  int bad = 0;
  int cases = 0;
  for (int c = 0; c < 1000; ++c) {
    int n = rng.uniform_int(51);
    std::vector<double> scores;
    ScorePool pool;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      switch (rng.uniform_int(3)) {
        case 0: s = rng.uniform(); break;
        case 1: s = std::exp(rng.normal(0.0, 1.5)); break;
        default: s = static_cast<double>(rng.uniform_int(8)); break;
      }
      scores.push_back(s);
      pool.insert(s);
    }
    for (int li = 0; li <= 20; ++li) {
      double level = 0.05 * static_cast<double>(li);
      ++cases;
      if (conformal_quantile(pool, level) != brute_quantile(scores, level)) {
        ++bad;
      }
    }
  }
  detail = "quantile matches sorted-rank reference on " +
           std::to_string(cases) + " cases (" + std::to_string(bad) +
           " mismatches)";
  return bad == 0;
}

// ---- criterion 7: aggregation rules vs. brute-force references ----

PredictionSet grid_levelset(const std::vector<PredictionSet>& per_state,
                            const StateDistribution& dist, double alpha,
                            double res) {
  const double need = 1.0 - alpha;
  double w_left = 0.0, w_right = 0.0;
  double lo = kInf, hi = -kInf;
  bool any_finite = false;
  for (std::size_t z = 0; z < per_state.size(); ++z) {
    if (dist.probs[z] <= 0.0 || per_state[z].intervals.empty()) continue;
    if (per_state[z].intervals.front().lower == -kInf) w_left += dist.probs[z];
    if (per_state[z].intervals.back().upper == kInf) w_right += dist.probs[z];
    for (const Interval& iv : per_state[z].intervals) {
      for (double e : {iv.lower, iv.upper}) {
        if (std::isfinite(e)) {
          any_finite = true;
          lo = std::min(lo, e);
          hi = std::max(hi, e);
        }
      }
    }
  }
  if (!any_finite) {
    PredictionSet out;
    if (w_left >= need) out.intervals.push_back({-kInf, kInf});
    return out;
  }
  double g0 = lo - res;
  auto cells =
      static_cast<std::size_t>(std::ceil((hi + res - g0) / res - 1e-9));
  if (cells < 1) cells = 1;
  std::vector<Interval> pieces;
  if (w_left >= need) pieces.push_back({-kInf, g0});
  for (std::size_t i = 0; i < cells; ++i) {
    double center = g0 + (static_cast<double>(i) + 0.5) * res;
    double w = 0.0;
    for (std::size_t z = 0; z < per_state.size(); ++z) {
      if (dist.probs[z] > 0.0 && per_state[z].contains(center)) {
        w += dist.probs[z];
      }
    }
    if (w >= need) {
      pieces.push_back({g0 + static_cast<double>(i) * res,
                        g0 + static_cast<double>(i + 1) * res});
    }
  }
  double gend = g0 + static_cast<double>(cells) * res;
  if (w_right >= need) pieces.push_back({gend, kInf});
  return normalize(pieces);
}

struct MinSubset {
  std::size_t size = 0;
  bool unique = false;
  std::vector<int> states;
};

MinSubset exhaustive_min_subset(const StateDistribution& dist, double alpha) {
  const double need = 1.0 - alpha;
  const int k = dist.num_states();
  MinSubset best;
  best.size = static_cast<std::size_t>(k) + 1;
  int hits = 0;
  for (int mask = 0; mask < (1 << k); ++mask) {
    double mass = 0.0;
    std::size_t size = 0;
    for (int z = 0; z < k; ++z) {
      if (mask & (1 << z)) {
        mass += dist.probs[static_cast<std::size_t>(z)];
        ++size;
      }
    }
    if (mass < need) continue;
    if (size < best.size) {
      best.size = size;
      best.states.clear();
      for (int z = 0; z < k; ++z) {
        if (mask & (1 << z)) best.states.push_back(z + 1);
      }
      hits = 1;
    } else if (size == best.size) {
      ++hits;
    }
  }
  best.unique = hits == 1;
  return best;
}

StateDistribution dyadic_dist(Rng& rng, int k) {
  std::vector<int> grains(static_cast<std::size_t>(k), 0);
  for (int g = 0; g < 64; ++g) {
    grains[static_cast<std::size_t>(rng.uniform_int(k))] += 1;
  }
  StateDistribution d;
  for (int g : grains) d.probs.push_back(static_cast<double>(g) / 64.0);
  return d;
}

PredictionSet random_set(Rng& rng) {
  std::vector<Interval> pieces;
  int count = rng.uniform_int(3);  // 0..2 intervals
  for (int i = 0; i < count; ++i) {
    double a = -3.0 + 6.0 * rng.uniform();
    double w = 2.0 * rng.uniform();
    Interval iv{a, a + w};
    if (rng.uniform() < 0.15) iv.lower = -kInf;
    if (rng.uniform() < 0.15) iv.upper = kInf;
    pieces.push_back(iv);
  }
  return normalize(pieces);
}

bool criterion7(std::string& detail) {
  int levelset_bad = 0;
  int union_bad = 0;
  {
    Rng rng(4242);
    for (int c = 0; c < 1000; ++c) {
      int k = 2 + rng.uniform_int(2);  // 2..3 states
      StateDistribution dist = dyadic_dist(rng, k);
      std::vector<PredictionSet> per_state;
      for (int z = 0; z < k; ++z) per_state.push_back(random_set(rng));
      double alpha = 0.05 + 0.4 * rng.uniform();
      if (!(levelset_aggregate(per_state, dist, alpha, 0.02) ==
            grid_levelset(per_state, dist, alpha, 0.02))) {
        ++levelset_bad;
      }
    }
  }
  {
    // dyadic probabilities and levels keep both sides' mass sums exact
    Rng rng(4343);
    for (int c = 0; c < 1000; ++c) {
      int k = 1 + rng.uniform_int(3);  // 1..3 states
      StateDistribution dist = dyadic_dist(rng, k);
      double alpha = static_cast<double>(rng.uniform_int(33)) / 64.0;
      std::vector<int> chosen = select_union_states(dist, alpha);
      MinSubset best = exhaustive_min_subset(dist, alpha);
      double mass = 0.0;
      for (int z : chosen) mass += dist.probs[static_cast<std::size_t>(z - 1)];
      std::vector<int> sorted_chosen = chosen;
      std::sort(sorted_chosen.begin(), sorted_chosen.end());
      if (chosen.size() != best.size || mass < 1.0 - alpha ||
          (best.unique && sorted_chosen != best.states)) {
        ++union_bad;
      }
    }
  }

  // the two rules land on nearby empirical coverage in full runs; long
  // streams give both time to settle at the target
  ExperimentConfig cfg;
  cfg.dataset.kind = DatasetKind::kThreeMode;
  cfg.dataset.three_mode.length = 25000;
  cfg.predictor.kind = PredictorKind::kMarkov;
  MethodConfig method;
  method.name = "cptc";
  method.alpha = 0.1;
  method.gamma = 0.005;
  method.warm_size = 50;
  double worst_gap = 0.0;
  for (int seed = 1; seed <= 5; ++seed) {
    MethodConfig union_m = method;
    union_m.aggregation = AggregationMode::kUnion;
    MethodConfig level_m = method;
    level_m.aggregation = AggregationMode::kLevelSet;
    level_m.resolution = 0.02;
    cfg.methods = {union_m, level_m};
    auto s = static_cast<std::uint64_t>(seed);
    double cov_union = coverage(run_single(cfg, union_m, s).records);
    double cov_level = coverage(run_single(cfg, level_m, s).records);
    worst_gap = std::max(worst_gap, std::abs(cov_union - cov_level));
  }

  bool pass = levelset_bad == 0 && union_bad == 0 && worst_gap <= 0.04;
  detail = "aggregation vs references: levelset mismatches " +
           std::to_string(levelset_bad) + ", subset mismatches " +
           std::to_string(union_bad) + ", max coverage gap " +
           fmt4(worst_gap);
  return pass;
}

bool criterion8(std::string& detail) {
  bool pass = true;
  for (auto aggregation :
       {AggregationMode::kUnion, AggregationMode::kLevelSet}) {
    const std::size_t lookback = 2;
    std::vector<double> y;
    std::vector<int> z;
    Rng rng(Rng::derive(88, aggregation == AggregationMode::kUnion ? 1 : 2));
    double prev = 0.0;
    for (int t = 0; t < 1300; ++t) {
      prev = 0.7 * prev + rng.normal(0.0, 0.5);
      y.push_back(prev);
      z.push_back(1);
    }
    std::vector<Observation> rows;
    for (std::size_t t = lookback; t < 250; ++t) {
      Observation obs;
      obs.t = static_cast<std::int64_t>(t);
      obs.x = {y[t - 2], y[t - 1]};
      obs.y = y[t];
      obs.z = 1;
      rows.push_back(std::move(obs));
    }
    auto fc = StateLinearForecaster::fit(rows, 1);

    CptcConfig cc;
    cc.num_states = 1;
    cc.alpha = 0.1;
    cc.gamma = 0.005;
    cc.aggregation = aggregation;
    cc.levelset_resolution = 0.02;
    cc.seed = 999;
    CptcEngine cptc_engine(cc);
    AciEngine aci_engine(0.1, 0.005);

    std::vector<double> x(lookback);
    for (std::size_t t = 250; t < 300; ++t) {
      x = {y[t - 2], y[t - 1]};
      double f = fc.predict(x, 1);
      std::vector<double> y_hat = {f};
      cptc_engine.warm_add_shared(y_hat, y[t]);
      aci_engine.warm_insert(nonconformity(y[t], f));
    }

    SeriesView view{y, z, 300, 1300};
    OracleStatePredictor oracle_a(1), oracle_b(1);
    auto cptc_records = run_stream(cptc_engine, view, oracle_a, fc, lookback);
    auto aci_records =
        run_stream(aci_engine, view, fc, lookback, &oracle_b, 31337);
    pass = pass && cptc_records.size() == 1000 && aci_records.size() == 1000;
    for (std::size_t i = 0; i < cptc_records.size(); ++i) {
      const StepRecord& a = cptc_records[i];
      const StepRecord& b = aci_records[i];
      bool same = a.set == b.set && a.covered == b.covered &&
                  a.width == b.width && a.alphas[0] == b.alphas[0];
      if (!same) {
        pass = false;
        break;
      }
    }
  }
  detail = std::string("single-state point-mass runs match the adaptive ") +
           "baseline bitwise over 1000 steps (both aggregations)";
  return pass;
}

bool criterion9(std::string& detail) {
  bool pass = true;
  double worst_cov = 1.0;
  // fixed-level engine on exchangeable data stays near target
  for (std::uint64_t seed : {91, 92, 93}) {
    OnlineCpEngine engine(0.1);
    Rng rng(seed);
    std::size_t hits = 0;
    const std::size_t steps = 5000;
    for (std::size_t t = 0; t < steps; ++t) {
      PredictionSet set = engine.predict(0.0);
      double y = rng.normal(0.0, 1.0);
      if (engine.update(y, 0.0, set).covered) ++hits;
    }
    double cov = static_cast<double>(hits) / static_cast<double>(steps);
    worst_cov = std::min(worst_cov, cov);
  }
  double se = std::sqrt(0.9 * 0.1 / 5000.0);
  pass = pass && worst_cov >= 0.9 - 3.0 * se;

  // adaptive baseline obeys the iterate-difference coverage bound
  {
    AciEngine engine(0.1, 0.005);
    Rng rng(94);
    std::size_t hits = 0;
    const std::size_t steps = 5000;
    for (std::size_t t = 0; t < steps; ++t) {
      PredictionSet set = engine.predict(0.0);
      double y = rng.normal(0.0, 1.0);
      if (engine.update(y, 0.0, set).covered) ++hits;
    }
    g_aci_runs.push_back({static_cast<double>(hits) /
                              static_cast<double>(steps),
                          0.1, engine.alpha_raw(), engine.gamma(), steps});
  }
  double worst_slack = 0.0;
  for (const AciRunCheck& run : g_aci_runs) {
    double bound = (std::abs(run.alpha_start) + std::abs(run.alpha_end)) /
                   (run.gamma * static_cast<double>(run.steps));
    double dev = std::abs(run.coverage - 0.9);
    worst_slack = std::max(worst_slack, dev - bound);
    pass = pass && dev <= bound + 1e-9;
  }
  detail = "baseline sanity: worst in-target coverage " + fmt4(worst_cov) +
           " (floor " + fmt4(0.9 - 3.0 * se) + "), iterate bound slack " +
           fmt4(worst_slack) + " on " + std::to_string(g_aci_runs.size()) +
           " runs";
  return pass;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  };

  BbBatch batch = run_bb_batch();
  std::string detail;

  bool ok(criterion1(batch, detail));
  report(1, ok, detail);
  ok = criterion2(batch, detail);
  report(2, ok, detail);
  ok = criterion3(detail);
  report(3, ok, detail);
  ok = criterion4(batch, detail);
  report(4, ok, detail);
  ok = criterion5(detail);
  report(5, ok, detail);
  ok = criterion6(detail);
  report(6, ok, detail);
  ok = criterion7(detail);
  report(7, ok, detail);
  ok = criterion8(detail);
  report(8, ok, detail);
  ok = criterion9(detail);
  report(9, ok, detail);

  return failures;
}
