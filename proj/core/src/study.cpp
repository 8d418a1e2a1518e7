#include "sectkit/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "sectkit/errors.hpp"
#include "sectkit/parallel.hpp"

namespace sectkit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct ReplicateOutcome {
  bool rejected[3] = {false, false, false};
  double runtime[3] = {0.0, 0.0, 0.0};
  bool ran[3] = {false, false, false};
  double r_frobenius = 0.0;
  double r_max = 0.0;
};

GroupSample make_group(const StudyConfig& config, double epsilon,
                       std::uint64_t epsilon_index, std::uint64_t replicate,
                       std::uint64_t group_tag, const DirectionGrid& grid,
                       const LevelGrid& levels) {
  FamilyParams params = config.family;
  params.epsilon = epsilon;
  ComputeBackend backend;
  backend.kind = ComputeBackend::Kind::cech_nerve;
  backend.nerve = config.nerve;

  GroupSample group;
  group.sect.reserve(static_cast<std::size_t>(config.shapes_per_group));
  group.ect.reserve(static_cast<std::size_t>(config.shapes_per_group));
  for (int i = 0; i < config.shapes_per_group; ++i) {
    RandomStream stream = RandomStream::keyed(
        config.seed,
        {epsilon_index, replicate, group_tag, static_cast<std::uint64_t>(i)});
    const ShapeSpec shape = sample_random_shape(params, stream);
    FieldPair fields =
        compute_fields(shape, grid, levels, backend, "family", 1);
    group.sect.push_back(std::move(fields.sect));
    group.ect.push_back(std::move(fields.ect));
  }
  return group;
}

}  // namespace

DirectionGrid study_direction_grid(int count) {
  return step_grid(count, std::numbers::pi / 4.0);
}

void StudyConfig::validate() const {
  if (epsilons.empty()) throw ValidationError("study: empty epsilon list");
  for (double e : epsilons)
    if (!(e >= 0.0)) throw ValidationError("study: negative epsilon");
  if (shapes_per_group < 2) throw ValidationError("study: need n >= 2");
  if (replicates < 1) throw ValidationError("study: need replicates >= 1");
  if (directions < 1 || levels < 2)
    throw ValidationError("study: bad grid sizes");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("study: alpha outside (0, 1)");
  if (permutations < 1) throw ValidationError("study: need permutations >= 1");
  if (algorithms.empty()) throw ValidationError("study: no algorithms selected");
  for (int a : algorithms)
    if (a < 1 || a > 3) throw ValidationError("study: unknown algorithm");
}

const RejectionCell* StudyResult::find(double epsilon, int algorithm) const {
  for (const auto& cell : cells)
    if (cell.algorithm == algorithm &&
        std::abs(cell.epsilon - epsilon) <= 1e-12)
      return &cell;
  return nullptr;
}

StudyResult run_rejection_study(const StudyConfig& config) {
  config.validate();
  const DirectionGrid grid = study_direction_grid(config.directions);
  const LevelGrid levels{3.0, config.levels};
  const auto wants = [&config](int algorithm) {
    return std::find(config.algorithms.begin(), config.algorithms.end(),
                     algorithm) != config.algorithms.end();
  };

  StudyResult result;
  for (std::size_t e = 0; e < config.epsilons.size(); ++e) {
    const double epsilon = config.epsilons[e];
    std::vector<ReplicateOutcome> outcomes(
        static_cast<std::size_t>(config.replicates));

    parallel_for(
        outcomes.size(),
        [&](std::size_t rep) {
          const auto e64 = static_cast<std::uint64_t>(e);
          const auto r64 = static_cast<std::uint64_t>(rep);
          GroupSample null_group =
              make_group(config, 0.0, e64, r64, 1, grid, levels);
          GroupSample alt_group =
              make_group(config, epsilon, e64, r64, 2, grid, levels);

          ReplicateOutcome& out = outcomes[rep];
          {
            // Covariance equality diagnostics, independent of which
            // algorithms were selected.
            const Eigen::MatrixXd m1 = mean_field(null_group.sect);
            const Eigen::MatrixXd m2 = mean_field(alt_group.sect);
            const std::size_t nu_star = distinguishing_direction(m1, m2);
            const auto [rf, rinf] =
                norm_ratios(covariance_group(null_group.sect, nu_star),
                            covariance_group(alt_group.sect, nu_star));
            out.r_frobenius = rf;
            out.r_max = rinf;
          }

          if (wants(1)) {
            const auto start = Clock::now();
            const TestReport report =
                algorithm1_chi2(null_group, alt_group, config.alpha);
            out.runtime[0] = seconds_since(start);
            out.rejected[0] = report.rejected();
            out.ran[0] = true;
          }
          if (wants(2)) {
            const std::uint64_t seed =
                RandomStream::keyed(config.seed, {0xA2, e64, r64}).next_u64();
            const auto start = Clock::now();
            const TestReport report = algorithm2_permutation(
                null_group, alt_group, config.alpha, config.permutations,
                seed, PermutationScheme::balanced, 1);
            out.runtime[1] = seconds_since(start);
            out.rejected[1] = report.rejected();
            out.ran[1] = true;
          }
          if (wants(3)) {
            const std::uint64_t seed =
                RandomStream::keyed(config.seed, {0xA3, e64, r64}).next_u64();
            const auto start = Clock::now();
            const TestReport report =
                algorithm3_nhst(null_group, alt_group, config.alpha,
                                config.permutations, seed, 1);
            out.runtime[2] = seconds_since(start);
            out.rejected[2] = report.rejected();
            out.ran[2] = true;
          }
        },
        config.threads);

    double mean_rf = 0.0, mean_rinf = 0.0;
    for (const auto& out : outcomes) {
      mean_rf += out.r_frobenius;
      mean_rinf += out.r_max;
    }
    mean_rf /= static_cast<double>(outcomes.size());
    mean_rinf /= static_cast<double>(outcomes.size());

    for (int algorithm = 1; algorithm <= 3; ++algorithm) {
      if (!wants(algorithm)) continue;
      const int slot = algorithm - 1;
      int rejections = 0;
      double runtime = 0.0;
      for (const auto& out : outcomes) {
        rejections += out.rejected[slot] ? 1 : 0;
        runtime += out.runtime[slot];
      }
      RejectionCell cell;
      cell.epsilon = epsilon;
      cell.algorithm = algorithm;
      cell.rejection_rate =
          static_cast<double>(rejections) / config.replicates;
      cell.mean_r_frobenius = mean_rf;
      cell.mean_r_max = mean_rinf;
      cell.mean_runtime_seconds = runtime / config.replicates;
      cell.replicates = config.replicates;
      result.cells.push_back(cell);
    }
  }
  return result;
}

void RuntimeConfig::validate() const {
  if (direction_counts.empty() || level_counts.empty() || group_sizes.empty())
    throw ValidationError("runtime study: empty grid axis");
  for (int v : level_counts)
    if (v < 2) throw ValidationError("runtime study: levels must be >= 2");
  for (int v : group_sizes)
    if (v < 2) throw ValidationError("runtime study: group size must be >= 2");
  if (replicates < 1)
    throw ValidationError("runtime study: need replicates >= 1");
  if (permutations < 1)
    throw ValidationError("runtime study: need permutations >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("runtime study: alpha outside (0, 1)");
}

const RuntimeCell* RuntimeResult::find(int algorithm, int directions,
                                       int levels, int group_size) const {
  for (const auto& cell : cells)
    if (cell.algorithm == algorithm && cell.directions == directions &&
        cell.levels == levels && cell.group_size == group_size)
      return &cell;
  return nullptr;
}

namespace {

GroupSample synthetic_sect_group(const DirectionGrid& grid,
                                 const LevelGrid& levels, int n,
                                 RandomStream stream) {
  GroupSample group;
  group.sect.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RandomStream field_stream = stream.child(static_cast<std::uint64_t>(i));
    SECTField field{grid, levels,
                    Eigen::MatrixXd(static_cast<Eigen::Index>(grid.size()),
                                    levels.count),
                    "synthetic", levels.horizon / 2.0};
    for (Eigen::Index p = 0; p < field.values.rows(); ++p)
      for (Eigen::Index q = 0; q < field.values.cols(); ++q)
        field.values(p, q) = field_stream.next_normal(0.0, 1.0);
    group.sect.push_back(std::move(field));
  }
  return group;
}

// Mean seconds per invocation; short calls are repeated in growing batches
// until the batch spans at least `min_span` seconds.
template <typename Fn>
double timed_mean_seconds(Fn&& fn, double min_span = 0.02) {
  int batch = 1;
  for (;;) {
    const auto start = Clock::now();
    for (int k = 0; k < batch; ++k) fn();
    const double span = seconds_since(start);
    if (span >= min_span || batch >= (1 << 20))
      return span / batch;
    batch *= 4;
  }
}

}  // namespace

RuntimeResult run_runtime_study(const RuntimeConfig& config) {
  config.validate();
  RuntimeResult result;
  std::uint64_t cell_index = 0;
  for (int gamma : config.direction_counts) {
    for (int delta : config.level_counts) {
      for (int n : config.group_sizes) {
        const DirectionGrid grid = study_direction_grid(gamma);
        const LevelGrid levels{3.0, delta};
        std::vector<double> alg1_seconds, alg2_seconds;
        alg1_seconds.reserve(static_cast<std::size_t>(config.replicates));
        alg2_seconds.reserve(static_cast<std::size_t>(config.replicates));

        for (int rep = 0; rep < config.replicates; ++rep) {
          RandomStream stream = RandomStream::keyed(
              config.seed, {cell_index, static_cast<std::uint64_t>(rep)});
          const GroupSample g1 =
              synthetic_sect_group(grid, levels, n, stream.child(1));
          const GroupSample g2 =
              synthetic_sect_group(grid, levels, n, stream.child(2));
          const std::uint64_t perm_seed = stream.child(3).next_u64();

          alg1_seconds.push_back(timed_mean_seconds(
              [&] { algorithm1_chi2(g1, g2, config.alpha); }));
          alg2_seconds.push_back(timed_mean_seconds([&] {
            algorithm2_permutation(g1, g2, config.alpha, config.permutations,
                                   perm_seed, PermutationScheme::balanced,
                                   config.threads);
          }));
        }

        auto summarize = [&](int algorithm, const std::vector<double>& xs) {
          double mean = 0.0;
          for (double x : xs) mean += x;
          mean /= static_cast<double>(xs.size());
          double var = 0.0;
          for (double x : xs) var += (x - mean) * (x - mean);
          var = xs.size() > 1 ? var / (static_cast<double>(xs.size()) - 1.0)
                              : 0.0;
          result.cells.push_back(RuntimeCell{algorithm, gamma, delta, n, mean,
                                             std::sqrt(var)});
        };
        summarize(1, alg1_seconds);
        summarize(2, alg2_seconds);
        ++cell_index;
      }
    }
  }
  return result;
}

}  // namespace sectkit
