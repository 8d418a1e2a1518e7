#include <doctest.h>

#include <cmath>
#include <vector>

#include "sectkit/random.hpp"

using namespace sectkit;

TEST_CASE("inverse normal cdf matches reference quantiles") {
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(inverse_normal_cdf(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.05) ==
        doctest::Approx(-1.6448536269514722).epsilon(1e-12));
  CHECK(inverse_normal_cdf(1e-10) ==
        doctest::Approx(-6.361340902404056).epsilon(1e-9));
  CHECK(inverse_normal_cdf(0.9) == -inverse_normal_cdf(0.1));
  CHECK_THROWS(inverse_normal_cdf(0.0));
  CHECK_THROWS(inverse_normal_cdf(1.0));
}

TEST_CASE("streams are deterministic and splittable") {
  RandomStream a = RandomStream::keyed(42, {1, 2});
  RandomStream b = RandomStream::keyed(42, {1, 2});
  for (int i = 0; i < 20; ++i) CHECK(a.next_u64() == b.next_u64());

  RandomStream parent = RandomStream::keyed(42, {});
  RandomStream c0 = parent.child(0);
  RandomStream c1 = parent.child(1);
  CHECK(c0.next_u64() != c1.next_u64());
  // Splitting does not disturb the parent.
  RandomStream parent2 = RandomStream::keyed(42, {});
  (void)parent2.child(7);
  RandomStream parent3 = RandomStream::keyed(42, {});
  CHECK(parent2.next_u64() == parent3.next_u64());
}

TEST_CASE("uniforms stay inside the open interval") {
  RandomStream s(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.next_uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws have roughly the requested moments") {
  RandomStream s(11);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = s.next_normal(1.0, 0.05);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::sqrt(var) == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("bounded draws are unbiased across the range") {
  RandomStream s(3);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 50000; ++i) ++counts[s.next_below(10)];
  for (int c : counts) CHECK(std::abs(c - 5000) < 400);
}

TEST_CASE("shuffle produces a permutation") {
  RandomStream s(5);
  std::vector<int> items{0, 1, 2, 3, 4, 5, 6, 7};
  s.shuffle(items);
  std::vector<int> sorted = items;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 8; ++i) CHECK(sorted[i] == i);
}
