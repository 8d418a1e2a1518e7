#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace sectkit {

/// Quantile function of the standard normal distribution (Wichura's AS 241
/// rational approximations, accurate to near machine precision).
double inverse_normal_cdf(double p);

/// Counter-based deterministic random stream.
///
/// Draws are pure functions of (key, counter), so a stream can be split into
/// independent child streams keyed by an index.  Parallel consumers that each
/// own a child produce results independent of scheduling, and the same seed
/// reproduces the same values on any machine.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  /// Derive a stream from a seed and a path of identifiers, e.g.
  /// keyed(seed, {epsilon_index, replicate, group}).
  static RandomStream keyed(std::uint64_t seed,
                            std::initializer_list<std::uint64_t> path);

  /// Independent child stream; children with distinct indices are
  /// statistically independent of each other and of the parent.
  RandomStream child(std::uint64_t index) const;

  std::uint64_t next_u64();

  /// Uniform draw in the open interval (0, 1).
  double next_uniform();

  /// Normal draw via the inverse CDF, one uniform per variate.
  double next_normal(double mean, double sd);

  /// Uniform integer in [0, bound), unbiased (Lemire rejection).
  std::uint64_t next_below(std::uint64_t bound);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sectkit
