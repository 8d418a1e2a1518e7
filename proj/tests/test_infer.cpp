#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sectkit/errors.hpp"
#include "sectkit/infer.hpp"
#include "sectkit/random.hpp"

using namespace sectkit;

namespace {

const DirectionGrid kGrid = uniform_circle_grid(3);
const LevelGrid kLevels{3.0, 6};

SECTField field_from(const Eigen::MatrixXd& values) {
  return SECTField{kGrid, kLevels, values, "synthetic", 1.5};
}

// Group whose nu*-rows are draws of a fixed Gaussian process; all other
// rows share the same law, so the selection step sees exchangeable noise.
GroupSample gaussian_group(RandomStream stream, int n, int gamma, int delta,
                           const Eigen::MatrixXd& transform,
                           double mean_shift = 0.0) {
  GroupSample group;
  const DirectionGrid grid = uniform_circle_grid(gamma);
  const LevelGrid levels{3.0, delta};
  for (int i = 0; i < n; ++i) {
    RandomStream fs = stream.child(i);
    Eigen::MatrixXd values(gamma, delta);
    for (int p = 0; p < gamma; ++p) {
      Eigen::VectorXd z(delta);
      for (int q = 0; q < delta; ++q) z(q) = fs.next_normal(0.0, 1.0);
      values.row(p) = (transform * z).transpose();
      for (int q = 0; q < delta; ++q) values(p, q) += mean_shift;
    }
    group.sect.push_back(SECTField{grid, levels, values, "g", 1.5});
  }
  return group;
}

}  // namespace

TEST_CASE("mean field") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(3, 6, 2.0);
  Eigen::MatrixXd b = -a;
  const std::vector<SECTField> single{field_from(a)};
  CHECK(mean_field(single) == a);
  const std::vector<SECTField> pair{field_from(a), field_from(b)};
  CHECK(mean_field(pair).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(mean_field(std::vector<SECTField>{}), ValidationError);
}

TEST_CASE("distinguishing direction with tie rule") {
  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(4, 6);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(4, 6);
  m2(1, 4) = 0.5;  // direction p = 2 in 1-based terms
  CHECK(distinguishing_direction(m1, m2) == 1);
  CHECK(distinguishing_direction(m1, m1) == 0);  // all-zero gap: lowest index
  Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(3, 6);
  CHECK_THROWS_AS(distinguishing_direction(m1, wrong), GridMismatchError);
}

TEST_CASE("group covariance") {
  Eigen::MatrixXd base = Eigen::MatrixXd::Zero(3, 6);
  Eigen::MatrixXd bumped = base;
  bumped(0, 0) = 2.0;  // +-a at q = 1 with a = 1 after centering
  const std::vector<SECTField> group{field_from(base), field_from(bumped)};
  const Eigen::MatrixXd c = covariance_group(group, 0);
  CHECK(c(0, 0) == doctest::Approx(2.0));  // 2 a^2 with n = 2, a = 1
  CHECK(c.cwiseAbs().sum() == doctest::Approx(2.0));

  const std::vector<SECTField> identical{field_from(base), field_from(base)};
  CHECK(covariance_group(identical, 0).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(covariance_group(std::vector<SECTField>{field_from(base)}, 0),
                  ValidationError);
}

TEST_CASE("norm ratios") {
  Eigen::MatrixXd c1 = Eigen::MatrixXd::Identity(4, 4);
  const auto [rf_same, rinf_same] = norm_ratios(c1, c1);
  CHECK(rf_same == 0.0);
  CHECK(rinf_same == 0.0);
  const auto [rf_zero, rinf_zero] =
      norm_ratios(c1, Eigen::MatrixXd::Zero(4, 4));
  CHECK(rf_zero == doctest::Approx(1.0));
  CHECK(rinf_zero == doctest::Approx(1.0));
  CHECK_THROWS_AS(norm_ratios(Eigen::MatrixXd::Zero(4, 4), c1),
                  NumericalError);
}

TEST_CASE("pooled covariance is symmetric PSD and consistent") {
  RandomStream stream(1234);
  // Known covariance: transform z -> L z with Sigma = L L^T.
  const int delta = 6;
  Eigen::MatrixXd l_factor = Eigen::MatrixXd::Zero(delta, delta);
  RandomStream ls = stream.child(0);
  for (int i = 0; i < delta; ++i)
    for (int j = 0; j <= i; ++j)
      l_factor(i, j) = ls.next_normal(0.0, 1.0) * (i == j ? 1.0 : 0.3);
  for (int i = 0; i < delta; ++i) l_factor(i, i) = std::abs(l_factor(i, i)) + 0.5;
  const Eigen::MatrixXd sigma = l_factor * l_factor.transpose();

  auto frobenius_error = [&](int n) {
    const GroupSample g1 = gaussian_group(stream.child(n), n, 1, delta,
                                          l_factor, 0.7);
    const GroupSample g2 = gaussian_group(stream.child(n + 1), n, 1, delta,
                                          l_factor, -0.4);
    const Eigen::MatrixXd pooled =
        covariance_pooled(g1.sect, g2.sect, 0);
    CHECK((pooled - pooled.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pooled);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * eig.eigenvalues().maxCoeff());
    return (pooled - sigma).norm();
  };
  const double err_small = frobenius_error(40);
  const double err_large = frobenius_error(1200);
  CHECK(err_large < err_small);
  CHECK(err_large < 0.35 * sigma.norm());

  // Identical constant groups give the zero matrix.
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(3, 6, 1.25);
  const std::vector<SECTField> g{field_from(constant), field_from(constant)};
  CHECK(covariance_pooled(g, g, 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kl decomposition") {
  SUBCASE("identity covariance") {
    const int delta = 5;
    const double horizon = 3.0;
    const KLSystem kl =
        kl_decompose(Eigen::MatrixXd::Identity(delta, delta), horizon);
    for (int l = 0; l < delta; ++l)
      CHECK(kl.eigenvalues(l) == doctest::Approx(horizon / delta));
    // Discrete orthonormality under the (T / Delta) weight.
    const Eigen::MatrixXd gram = (horizon / delta) *
                                 kl.eigenfunctions.transpose() *
                                 kl.eigenfunctions;
    CHECK((gram - Eigen::MatrixXd::Identity(delta, delta))
              .cwiseAbs()
              .maxCoeff() <= 1e-8);
  }
  SUBCASE("rank one") {
    Eigen::VectorXd u(4);
    u << 1.0, -2.0, 0.5, 0.0;
    const KLSystem kl = kl_decompose(u * u.transpose(), 2.0);
    CHECK(kl.eigenvalues(0) == doctest::Approx(0.5 * u.squaredNorm()));
    for (int l = 1; l < 4; ++l)
      CHECK(std::abs(kl.eigenvalues(l)) <= 1e-12 * kl.eigenvalues(0));
  }
  SUBCASE("spectral reconstruction and sign convention") {
    RandomStream stream(55);
    const int delta = 12;
    Eigen::MatrixXd x(30, delta);
    for (int i = 0; i < 30; ++i)
      for (int q = 0; q < delta; ++q) x(i, q) = stream.next_normal(0.0, 1.0);
    const Eigen::MatrixXd c = x.transpose() * x / 29.0;
    const KLSystem kl = kl_decompose(c, 3.0);
    // lambda = (T / Delta) Lambda and phi = sqrt(Delta / T) v undo each other.
    Eigen::MatrixXd reconstructed = Eigen::MatrixXd::Zero(delta, delta);
    for (int l = 0; l < delta; ++l) {
      const Eigen::VectorXd v =
          kl.eigenfunctions.col(l) / std::sqrt(delta / 3.0);
      reconstructed += (kl.eigenvalues(l) / (3.0 / delta)) * v * v.transpose();
    }
    CHECK((reconstructed - c).norm() <= 1e-8);
    for (int l = 0; l < delta; ++l) {
      int first = 0;
      while (std::abs(kl.eigenfunctions(first, l)) <=
             1e-12 * kl.eigenfunctions.col(l).cwiseAbs().maxCoeff())
        ++first;
      CHECK(kl.eigenfunctions(first, l) > 0.0);
    }
  }
  SUBCASE("asymmetric input is rejected") {
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 3);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(kl_decompose(bad, 1.0), ValidationError);
  }
}

TEST_CASE("component count selection") {
  Eigen::VectorXd a(4);
  a << 0.9, 0.05, 0.03, 0.02;
  CHECK(select_l(a) == 3);  // 0.95 is not > 0.95
  Eigen::VectorXd b(1);
  b << 1.0;
  CHECK(select_l(b) == 1);
  Eigen::VectorXd c(3);
  c << 0.9, -0.06, 0.04;  // absolute values: 0.96 > 0.95
  CHECK(select_l(c) == 2);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(select_l(zero), NumericalError);
}

TEST_CASE("xi statistics") {
  RandomStream stream(808);
  const GroupSample g1 = gaussian_group(stream.child(1), 12, 2, 8,
                                        Eigen::MatrixXd::Identity(8, 8));
  const KLSystem kl =
      kl_decompose(covariance_pooled(g1.sect, g1.sect, 0), 3.0);

  SUBCASE("identical groups give zeros") {
    const Eigen::MatrixXd xi = xi_statistics(g1.sect, g1.sect, 0, kl, 3);
    CHECK(xi.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("sign flips leave the statistic unchanged") {
    const GroupSample g2 = gaussian_group(stream.child(2), 12, 2, 8,
                                          Eigen::MatrixXd::Identity(8, 8));
    KLSystem flipped = kl;
    flipped.eigenfunctions.col(0) = -flipped.eigenfunctions.col(0);
    const TestReport r1 =
        chi2_test(xi_statistics(g1.sect, g2.sect, 0, kl, 3), 0.05);
    const TestReport r2 =
        chi2_test(xi_statistics(g1.sect, g2.sect, 0, flipped, 3), 0.05);
    CHECK(r1.statistic == doctest::Approx(r2.statistic).epsilon(1e-12));
  }
  SUBCASE("degenerate eigenvalues are rejected") {
    KLSystem degenerate = kl;
    degenerate.eigenvalues.setZero();
    CHECK_THROWS_AS(xi_statistics(g1.sect, g1.sect, 0, degenerate, 2),
                    NumericalError);
  }
}

TEST_CASE("chi-squared machinery") {
  CHECK(chi_squared_quantile(1, 0.95) ==
        doctest::Approx(3.841458820694124).epsilon(1e-9));
  CHECK(chi_squared_quantile(5, 0.95) ==
        doctest::Approx(11.070497693516351).epsilon(1e-9));
  CHECK(chi_squared_survival(2, 5.99146454710798) ==
        doctest::Approx(0.05).epsilon(1e-10));
  CHECK(chi_squared_survival(3, 0.0) == 1.0);

  SUBCASE("all-zero xi accepts") {
    const TestReport report = chi2_test(Eigen::MatrixXd::Zero(3, 10), 0.05);
    CHECK(report.statistic == 0.0);
    CHECK_FALSE(report.rejected());
    CHECK(report.p_value == 1.0);
  }
  SUBCASE("column mean 0.3 with n = 100 gives S0 = 9") {
    const Eigen::MatrixXd xi = Eigen::MatrixXd::Constant(1, 100, 0.3);
    const TestReport report = chi2_test(xi, 0.05);
    CHECK(report.statistic == doctest::Approx(9.0));
    CHECK(report.l_hat == 1);
    CHECK(report.rejected());
  }
  CHECK_THROWS_AS(chi2_test(Eigen::MatrixXd::Zero(1, 4), 1.5),
                  ValidationError);
}

TEST_CASE("algorithm 1 on separated groups") {
  RandomStream stream(4242);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(10, 10);
  const GroupSample g1 = gaussian_group(stream.child(1), 40, 3, 10, id, 0.0);
  const GroupSample g2 = gaussian_group(stream.child(2), 40, 3, 10, id, 3.0);
  const TestReport report = algorithm1_chi2(g1, g2, 0.05);
  CHECK(report.rejected());
  CHECK(report.method == "chi2");
  CHECK(report.l_hat >= 1);
  CHECK(report.nu_star_index >= 1);
  CHECK(report.r_frobenius >= 0.0);

  // Identical groups: statistic is exactly zero.
  const TestReport same = algorithm1_chi2(g1, g1, 0.05);
  CHECK(same.statistic == 0.0);
  CHECK_FALSE(same.rejected());
}

TEST_CASE("permutation test") {
  RandomStream stream(31337);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(5, 5);

  SUBCASE("order statistic index matches the paper's convention") {
    const GroupSample g1 = gaussian_group(stream.child(1), 6, 1, 5, id);
    const GroupSample g2 = gaussian_group(stream.child(2), 6, 1, 5, id);
    const TestReport report =
        algorithm2_permutation(g1, g2, 0.05, 1000, 99);
    CHECK(report.k_star == 949);
    CHECK(report.permutations == 1000);
    CHECK(report.seed == 99);
  }
  SUBCASE("identical groups accept with statistic zero") {
    const GroupSample g1 = gaussian_group(stream.child(3), 6, 1, 5, id);
    const TestReport report = algorithm2_permutation(g1, g1, 0.05, 200, 7);
    CHECK(report.statistic == 0.0);
    CHECK_FALSE(report.rejected());
    CHECK(report.p_value > 0.9);
  }
  SUBCASE("deterministic across repeated runs and thread counts") {
    const GroupSample g1 = gaussian_group(stream.child(4), 8, 2, 6, id);
    const GroupSample g2 = gaussian_group(stream.child(5), 8, 2, 6, id, 0.5);
    const TestReport a =
        algorithm2_permutation(g1, g2, 0.05, 150, 11,
                               PermutationScheme::balanced, 1);
    const TestReport b =
        algorithm2_permutation(g1, g2, 0.05, 150, 11,
                               PermutationScheme::balanced, 3);
    CHECK(a.statistic == b.statistic);
    CHECK(a.reference == b.reference);
    CHECK(a.p_value == b.p_value);
    CHECK(a.rejected() == b.rejected());
  }
  SUBCASE("pair swap scheme runs") {
    const GroupSample g1 = gaussian_group(stream.child(6), 6, 1, 5, id);
    const GroupSample g2 = gaussian_group(stream.child(7), 6, 1, 5, id);
    const TestReport report = algorithm2_permutation(
        g1, g2, 0.05, 100, 3, PermutationScheme::pair_swap);
    CHECK(report.permutations == 100);
  }
  SUBCASE("too few permutations for alpha") {
    const GroupSample g1 = gaussian_group(stream.child(8), 6, 1, 5, id);
    CHECK_THROWS_AS(algorithm2_permutation(g1, g1, 0.05, 1, 1),
                    ValidationError);
  }
}

TEST_CASE("permutation p-values are roughly uniform under exchangeability") {
  RandomStream stream(271828);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(8, 8);
  std::vector<double> p_values;
  for (int rep = 0; rep < 60; ++rep) {
    const GroupSample g1 =
        gaussian_group(stream.child(2 * rep), 20, 1, 8, id);
    const GroupSample g2 =
        gaussian_group(stream.child(2 * rep + 1), 20, 1, 8, id);
    p_values.push_back(
        algorithm2_permutation(g1, g2, 0.05, 99, rep).p_value);
  }
  CHECK(oracles::ks_uniform(p_values) < 0.2);
}

TEST_CASE("chi-squared calibration smoke test") {
  RandomStream stream(1107);
  RandomStream transform_stream = stream.child(0);
  const int delta = 10;
  Eigen::MatrixXd l_factor = Eigen::MatrixXd::Zero(delta, delta);
  for (int i = 0; i < delta; ++i)
    for (int j = 0; j <= i; ++j)
      l_factor(i, j) = transform_stream.next_normal(0.0, 0.4);
  for (int i = 0; i < delta; ++i)
    l_factor(i, i) = std::abs(l_factor(i, i)) + 0.8;

  int rejections = 0;
  const int replicates = 200;
  for (int rep = 0; rep < replicates; ++rep) {
    const GroupSample g1 =
        gaussian_group(stream.child(2 * rep + 1), 80, 1, delta, l_factor);
    const GroupSample g2 =
        gaussian_group(stream.child(2 * rep + 2), 80, 1, delta, l_factor);
    if (algorithm1_chi2(g1, g2, 0.05).rejected()) ++rejections;
  }
  // Generous band (the acceptance suite runs the tight exact-interval check).
  const auto [lo, hi] = oracles::binomial_interval(replicates, 0.05, 0.002);
  CHECK(rejections >= lo);
  CHECK(rejections <= hi);
}

namespace {

ECTField ect_from(const Eigen::MatrixXi& values) {
  return ECTField{kGrid, kLevels, values, "e", 1.5};
}

}  // namespace

TEST_CASE("randomization nhst") {
  SUBCASE("loss matches a direct double-sum oracle") {
    // Two groups of two fields each; compute Eq.-style loss by hand.
    Eigen::MatrixXi a0 = Eigen::MatrixXi::Zero(3, 6);
    Eigen::MatrixXi a1 = a0;
    a1(0, 0) = 3;
    Eigen::MatrixXi b0 = a0;
    b0(1, 2) = 4;
    Eigen::MatrixXi b1 = a0;
    b1(2, 5) = -2;
    GroupSample g1, g2;
    g1.ect = {ect_from(a0), ect_from(a1)};
    g2.ect = {ect_from(b0), ect_from(b1)};

    const double rho_a = rho_discrete(g1.ect[0], g1.ect[1]);
    const double rho_b = rho_discrete(g2.ect[0], g2.ect[1]);
    const int n = 2;
    const double expected = (2.0 * rho_a + 2.0 * rho_b) / (2.0 * n * (n - 1));

    const TestReport report = algorithm3_nhst(g1, g2, 0.25, 40, 5);
    CHECK(report.statistic == doctest::Approx(expected).epsilon(1e-12));
    CHECK(report.method == "nhst");
    CHECK(report.k_star >= 1);
  }
  SUBCASE("copies within groups reject") {
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(3, 6);
    Eigen::MatrixXi b = Eigen::MatrixXi::Constant(3, 6, 5);
    GroupSample g1, g2;
    for (int i = 0; i < 4; ++i) {
      g1.ect.push_back(ect_from(a));
      g2.ect.push_back(ect_from(b));
    }
    const TestReport report = algorithm3_nhst(g1, g2, 0.05, 200, 17);
    CHECK(report.statistic == 0.0);
    CHECK(report.rejected());
  }
  SUBCASE("k star for alpha 0.05 and 1000 permutations is 49") {
    RandomStream stream(2);
    GroupSample g1, g2;
    for (int i = 0; i < 3; ++i) {
      Eigen::MatrixXi v(3, 6);
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 6; ++q)
          v(p, q) = static_cast<int>(stream.next_below(5));
      g1.ect.push_back(ect_from(v));
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 6; ++q)
          v(p, q) = static_cast<int>(stream.next_below(5));
      g2.ect.push_back(ect_from(v));
    }
    const TestReport report = algorithm3_nhst(g1, g2, 0.05, 1000, 3);
    CHECK(report.k_star == 49);
  }
}

TEST_CASE("group sample validation") {
  GroupSample group;
  CHECK_THROWS_AS(group.validate(), ValidationError);
  group.sect.push_back(field_from(Eigen::MatrixXd::Zero(3, 6)));
  CHECK_THROWS_AS(group.validate(), ValidationError);  // n < 2
  group.sect.push_back(field_from(Eigen::MatrixXd::Zero(3, 6)));
  CHECK_NOTHROW(group.validate());
  SECTField other = group.sect.front();
  other.levels = LevelGrid{3.0, 9};
  other.values = Eigen::MatrixXd::Zero(3, 9);
  group.sect.push_back(other);
  CHECK_THROWS_AS(group.validate(), GridMismatchError);
}
