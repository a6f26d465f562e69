#include "cptc/datagen.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "cptc/errors.hpp"
#include "cptc/rng.hpp"
#include "textio.hpp"

namespace cptc {

std::vector<std::size_t> find_change_points(const std::vector<int>& z) {
  std::vector<std::size_t> cps;
  for (std::size_t t = 1; t < z.size(); ++t) {
    if (z[t] != z[t - 1]) cps.push_back(t);
  }
  return cps;
}

SyntheticSeries gen_bouncing_ball(const BouncingBallConfig& cfg) {
  if (cfg.length < 1) {
    throw ValidationError("bouncing_ball: length must be >= 1");
  }
  if (!(cfg.wall_low < cfg.wall_high) || !std::isfinite(cfg.wall_low) ||
      !std::isfinite(cfg.wall_high)) {
    throw ValidationError("bouncing_ball: walls must satisfy low < high");
  }
  double range = cfg.wall_high - cfg.wall_low;
  if (!(cfg.speed > 0.0) || cfg.speed >= range) {
    throw ValidationError("bouncing_ball: speed must be in (0, wall gap)");
  }
  if (!(cfg.sigma_up > 0.0) || !(cfg.sigma_down > 0.0)) {
    throw ValidationError("bouncing_ball: noise scales must be > 0");
  }

  Rng rng(cfg.seed);
  double h = cfg.wall_low + rng.uniform() * range;  // random initial phase
  int dir = rng.uniform() < 0.5 ? 1 : -1;

  SyntheticSeries series;
  series.seed = cfg.seed;
  series.num_states = 2;
  series.y.reserve(cfg.length);
  series.z.reserve(cfg.length);
  for (std::size_t t = 0; t < cfg.length; ++t) {
    double step = static_cast<double>(dir) * cfg.speed;
    if (cfg.noise == BallNoise::kDynamics) {
      step += rng.normal(0.0, dir > 0 ? cfg.sigma_up : cfg.sigma_down);
    }
    h += step;
    // Elastic reflection; a wild dynamics draw may bounce more than once.
    while (h < cfg.wall_low || h > cfg.wall_high) {
      h = h > cfg.wall_high ? 2.0 * cfg.wall_high - h : 2.0 * cfg.wall_low - h;
      dir = -dir;
    }
    int z = dir > 0 ? 1 : 2;
    double y = h;
    if (cfg.noise == BallNoise::kObservation) {
      y += rng.normal(0.0, z == 1 ? cfg.sigma_up : cfg.sigma_down);
    }
    series.y.push_back(y);
    series.z.push_back(z);
  }
  series.change_points = find_change_points(series.z);
  return series;
}

SyntheticSeries gen_three_mode(const ThreeModeConfig& cfg) {
  if (cfg.length < 1) {
    throw ValidationError("three_mode: length must be >= 1");
  }
  if (!(cfg.duration_lambda > 0.0)) {
    throw ValidationError("three_mode: duration_lambda must be > 0");
  }
  for (double s : cfg.sigma) {
    if (!(s > 0.0)) throw ValidationError("three_mode: sigmas must be > 0");
  }

  Rng rng(cfg.seed);
  int mode = 1 + rng.uniform_int(3);
  double y_prev = 0.0;

  SyntheticSeries series;
  series.seed = cfg.seed;
  series.num_states = 3;
  series.y.reserve(cfg.length);
  series.z.reserve(cfg.length);
  while (series.y.size() < cfg.length) {
    int run = 1 + rng.poisson(cfg.duration_lambda);
    for (int i = 0; i < run && series.y.size() < cfg.length; ++i) {
      auto m = static_cast<std::size_t>(mode - 1);
      double y = cfg.ar[m] * y_prev + cfg.offset[m] +
                 rng.normal(0.0, cfg.sigma[m]);
      series.y.push_back(y);
      series.z.push_back(mode);
      y_prev = y;
    }
    // switch to one of the other two modes uniformly
    mode = 1 + (mode - 1 + 1 + rng.uniform_int(2)) % 3;
  }
  series.change_points = find_change_points(series.z);
  return series;
}

namespace {

[[noreturn]] void csv_fail(const std::string& path, std::size_t lineno,
                           const std::string& what) {
  throw IoError(path + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace

SyntheticSeries load_csv(const std::string& path, const CsvColumns& cols) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open for reading");

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) csv_fail(path, 1, "empty file, header required");
  ++lineno;
  auto header = textio::split(textio::strip_cr(line), ',');
  std::size_t t_idx = header.size(), y_idx = header.size(),
              z_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == cols.t) t_idx = i;
    if (header[i] == cols.y) y_idx = i;
    if (header[i] == cols.z) z_idx = i;
  }
  if (t_idx == header.size()) {
    csv_fail(path, 1, "missing required column '" + cols.t + "'");
  }
  if (y_idx == header.size()) {
    csv_fail(path, 1, "missing required column '" + cols.y + "'");
  }
  const bool has_z = z_idx != header.size();

  SyntheticSeries series;
  std::vector<std::string> label_order;
  std::map<std::string, int> label_ids;
  std::int64_t prev_t = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    auto row = textio::strip_cr(line);
    if (row.empty()) csv_fail(path, lineno, "empty row");
    auto fields = textio::split(row, ',');
    if (fields.size() != header.size()) {
      csv_fail(path, lineno,
               "expected " + std::to_string(header.size()) + " fields, got " +
                   std::to_string(fields.size()));
    }
    std::int64_t t = 0;
    if (!textio::parse(fields[t_idx], t)) {
      csv_fail(path, lineno, "column '" + cols.t + "' is not an integer");
    }
    if (!first && t <= prev_t) {
      csv_fail(path, lineno, "time index must be strictly increasing");
    }
    prev_t = t;
    first = false;
    double y = 0.0;
    if (!textio::parse(fields[y_idx], y)) {
      csv_fail(path, lineno, "column '" + cols.y + "' is not a number");
    }
    series.y.push_back(y);
    if (has_z) {
      std::string label(fields[z_idx]);
      if (label.empty()) {
        csv_fail(path, lineno, "column '" + cols.z + "' is empty");
      }
      auto it = label_ids.find(label);
      if (it == label_ids.end()) {
        // labels become 1..K in order of first appearance
        it = label_ids.emplace(label, static_cast<int>(label_order.size()) + 1)
                 .first;
        label_order.push_back(label);
      }
      series.z.push_back(it->second);
    }
  }
  if (series.y.empty()) csv_fail(path, lineno, "no data rows");
  series.num_states = static_cast<int>(label_order.size());
  series.change_points = find_change_points(series.z);
  return series;
}

void write_csv(const SyntheticSeries& series, const std::string& path,
               const CsvColumns& cols) {
  if (!series.z.empty() && series.z.size() != series.y.size()) {
    throw ValidationError("write_csv: state labels not aligned with series");
  }
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot open for writing");
  const bool has_z = !series.z.empty();
  out << cols.t << ',' << cols.y;
  if (has_z) out << ',' << cols.z;
  out << '\n';
  for (std::size_t t = 0; t < series.y.size(); ++t) {
    out << textio::fmt(static_cast<std::int64_t>(t)) << ','
        << textio::fmt(series.y[t]);
    if (has_z) out << ',' << series.z[t];
    out << '\n';
  }
  if (!out) throw IoError(path + ": write failed");
}

SplitIndices split_series(std::size_t n, double train_frac, double val_frac) {
  if (n < 1) throw ValidationError("split: empty series");
  if (!(train_frac > 0.0) || !(val_frac >= 0.0) ||
      train_frac + val_frac >= 1.0 + 1e-12) {
    throw ValidationError(
        "split: fractions must satisfy train > 0, val >= 0, train + val < 1");
  }
  auto dn = static_cast<double>(n);
  // floor with a hair of slack so 0.7 * 2500 lands on 1750, not 1749
  SplitIndices s;
  s.train_end = static_cast<std::size_t>(dn * train_frac + 1e-9);
  s.val_end = static_cast<std::size_t>(dn * (train_frac + val_frac) + 1e-9);
  if (s.val_end > n) s.val_end = n;
  return s;
}

}  // namespace cptc
