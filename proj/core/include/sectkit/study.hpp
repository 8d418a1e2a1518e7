#pragma once

#include <cstdint>
#include <vector>

#include "sectkit/infer.hpp"
#include "sectkit/shapes.hpp"

namespace sectkit {

/// Direction grid used by the simulation studies: angles (p - 1) * pi / 4,
/// p = 1..count.
DirectionGrid study_direction_grid(int count);

/// Rejection-rate study configuration.  Defaults are desk scale: 50
/// replicates, 500 permutations, epsilon grid {0, 0.025, 0.05, 0.1}.
struct StudyConfig {
  std::vector<double> epsilons{0.0, 0.025, 0.05, 0.1};
  int shapes_per_group = 100;  // n
  int replicates = 50;
  int directions = 4;   // Gamma
  int levels = 50;      // Delta
  double alpha = 0.05;
  int permutations = 500;  // Pi
  std::uint64_t seed = 20230915;
  std::vector<int> algorithms{1, 2, 3};
  FamilyParams family{};  // epsilon is overridden per study cell
  NerveOptions nerve{};
  int threads = 0;

  void validate() const;
};

struct RejectionCell {
  double epsilon = 0.0;
  int algorithm = 0;
  double rejection_rate = 0.0;
  double mean_r_frobenius = 0.0;
  double mean_r_max = 0.0;
  double mean_runtime_seconds = 0.0;  // test runtime, generation excluded
  int replicates = 0;
};

struct StudyResult {
  std::vector<RejectionCell> cells;

  const RejectionCell* find(double epsilon, int algorithm) const;
};

/// For each epsilon and replicate: draw one group from the null family and
/// one from the epsilon family, compute SECT/ECT fields over the study grid,
/// run the selected algorithms, and tally rejections.  Fully deterministic
/// given the seed; replicates derive their streams from
/// (seed, epsilon index, replicate).
StudyResult run_rejection_study(const StudyConfig& config);

/// Runtime study over the (Gamma, Delta, n) grid.  Inputs are synthesized
/// SECT arrays of the right shape (timing measures the testing algorithms
/// only; shape generation and transform computation are excluded).  Short
/// runs are repeated in batches until each measurement spans a minimum wall
/// time.
struct RuntimeConfig {
  std::vector<int> direction_counts{2, 4, 8};
  std::vector<int> level_counts{25, 50, 100};
  std::vector<int> group_sizes{25, 50, 100};
  int replicates = 20;
  int permutations = 100;
  double alpha = 0.05;
  std::uint64_t seed = 20230915;
  int threads = 0;

  void validate() const;
};

struct RuntimeCell {
  int algorithm = 0;
  int directions = 0;
  int levels = 0;
  int group_size = 0;
  double mean_seconds = 0.0;
  double sd_seconds = 0.0;
};

struct RuntimeResult {
  std::vector<RuntimeCell> cells;

  const RuntimeCell* find(int algorithm, int directions, int levels,
                          int group_size) const;
};

RuntimeResult run_runtime_study(const RuntimeConfig& config);

}  // namespace sectkit
