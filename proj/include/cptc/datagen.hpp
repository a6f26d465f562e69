#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cptc {

// A generated or loaded series. z holds 1-based state labels and is empty for
// stateless data; change_points are the 0-based indices t with z[t] != z[t-1].
struct SyntheticSeries {
  std::vector<double> y;
  std::vector<int> z;
  std::vector<std::size_t> change_points;
  int num_states = 0;
  std::uint64_t seed = 0;
};

std::vector<std::size_t> find_change_points(const std::vector<int>& z);

enum class BallNoise { kObservation, kDynamics };

// Latent level bouncing between two walls at constant speed with elastic
// reflection. State 1 is moving up, state 2 moving down, recorded after any
// reflection at that step. Observation noise perturbs the emitted y only;
// dynamics noise accumulates in the level itself (and y is emitted exactly).
// The noise scale follows the current state. Initial position and direction
// are drawn from the seed.
struct BouncingBallConfig {
  std::size_t length = 2500;
  double wall_low = 0.0;
  double wall_high = 1.0;
  double speed = 0.05;
  BallNoise noise = BallNoise::kObservation;
  double sigma_up = 0.05;
  double sigma_down = 0.3;
  std::uint64_t seed = 1;
};

SyntheticSeries gen_bouncing_ball(const BouncingBallConfig& cfg);

// Three AR(1) modes with distinct coefficient, offset and noise scale. Modes
// persist for 1 + Poisson(duration_lambda) steps, then switch to one of the
// other two uniformly.
struct ThreeModeConfig {
  std::size_t length = 2500;
  std::array<double, 3> ar = {0.9, 0.5, -0.7};
  std::array<double, 3> offset = {0.0, 1.0, -1.0};
  std::array<double, 3> sigma = {0.1, 0.3, 0.5};
  double duration_lambda = 20.0;
  std::uint64_t seed = 1;
};

SyntheticSeries gen_three_mode(const ThreeModeConfig& cfg);

// CSV exchange format: header row naming the configured columns, one row per
// step, t strictly increasing integers. The state column is optional; when
// present, labels are remapped to 1..K by first appearance. Parse failures
// raise IoError naming the offending line.
struct CsvColumns {
  std::string t = "t";
  std::string y = "y";
  std::string z = "z";
};

SyntheticSeries load_csv(const std::string& path, const CsvColumns& cols = {});
void write_csv(const SyntheticSeries& series, const std::string& path,
               const CsvColumns& cols = {});

// Deterministic fractional split boundaries: [0, train_end) train,
// [train_end, val_end) validation, [val_end, n) test.
struct SplitIndices {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
};

SplitIndices split_series(std::size_t n, double train_frac = 0.7,
                          double val_frac = 0.1);

}  // namespace cptc
