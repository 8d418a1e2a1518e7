#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sectkit/sect.hpp"

namespace sectkit {

/// One group of shape transforms on a shared grid.  Either representation
/// may be absent (the chi-squared and permutation tests read SECT fields,
/// the randomization NHST reads ECT fields); when both are present they are
/// paired by index.
struct GroupSample {
  std::vector<SECTField> sect;
  std::vector<ECTField> ect;

  std::size_t size() const { return std::max(sect.size(), ect.size()); }
  void validate() const;  // n >= 2 and identical grids throughout
};

/// Discrete Karhunen-Loeve eigensystem of a level-grid covariance matrix.
/// eigenvalues are lambda_hat = (T / Delta) * Lambda, descending;
/// eigenfunctions column l holds phi_hat_l(t_q) = sqrt(Delta / T) * v_{l,q},
/// orthonormal under the (T / Delta)-weighted discrete inner product.
struct KLSystem {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenfunctions;
  double horizon = 0.0;
};

enum class Decision { accept, reject };

struct TestReport {
  std::string method;       // "chi2" | "permutation" | "nhst"
  double statistic = 0.0;   // S_0
  double reference = 0.0;   // chi-squared threshold or permutation S_(k*)
  double p_value = 1.0;
  int l_hat = 0;            // 0 when not applicable
  int nu_star_index = 0;    // 1-based direction index; 0 when not applicable
  Decision decision = Decision::accept;
  double r_frobenius = 0.0;
  double r_max = 0.0;
  std::uint64_t seed = 0;
  int permutations = 0;
  int k_star = 0;  // order-statistic index of `reference`; 0 for chi2

  bool rejected() const { return decision == Decision::reject; }
};

/// Entrywise sample mean over the group (n >= 1).
Eigen::MatrixXd mean_field(std::span<const SECTField> fields);

/// argmax_p max_q |m1 - m2|; ties resolved toward the lowest row index.
/// Returns a 0-based row index.
std::size_t distinguishing_direction(const Eigen::MatrixXd& m1,
                                     const Eigen::MatrixXd& m2);

/// Sample covariance (divisor n - 1) of the group's SECT rows in the given
/// direction, centered by the group mean.
Eigen::MatrixXd covariance_group(std::span<const SECTField> fields,
                                 std::size_t direction);

/// (R_F, R_inf): Frobenius and max-entry norm ratios of C1 - C2 against C1.
std::pair<double, double> norm_ratios(const Eigen::MatrixXd& c1,
                                      const Eigen::MatrixXd& c2);

/// Pooled covariance: rows of both groups centered by their own group mean,
/// divisor n1 + n2 - 2 (two estimated means).
Eigen::MatrixXd covariance_pooled(std::span<const SECTField> g1,
                                  std::span<const SECTField> g2,
                                  std::size_t direction);

/// Full symmetric eigendecomposition of a Delta x Delta covariance, scaled to
/// the Karhunen-Loeve estimates.  Sign convention: the first nonzero
/// component of each eigenvector is positive.
KLSystem kl_decompose(const Eigen::MatrixXd& covariance, double horizon);

/// Smallest l whose cumulative |eigenvalue| share strictly exceeds the
/// threshold.  Ratios within 1e-12 of the threshold count as not exceeding,
/// so exact-arithmetic ties behave as ties.
int select_l(const Eigen::VectorXd& eigenvalues, double threshold = 0.95);

/// Estimated KL scores of the paired SECT differences:
/// xi_{l,i} = (2 lambda_l)^{-1/2} (T / Delta) sum_q {S_i^1 - S_i^2}(t_q)
/// phi_l(t_q), for l = 1..l_count.  Pairing is by sample index.  Throws
/// NumericalError when an eigenvalue within the first l_count is below
/// 1e-12 * lambda_1.
Eigen::MatrixXd xi_statistics(std::span<const SECTField> g1,
                              std::span<const SECTField> g2,
                              std::size_t direction, const KLSystem& kl,
                              int l_count);

/// Chi-squared test on a precomputed xi matrix (rows l, columns i):
/// S_0 = sum_l (n^{-1/2} sum_i xi_{l,i})^2, rejected above the 1 - alpha
/// quantile of chi^2 with rows(xi) degrees of freedom.
TestReport chi2_test(const Eigen::MatrixXd& xi, double alpha);

/// Upper tail of the chi-squared distribution via the regularized incomplete
/// gamma function.
double chi_squared_survival(int dof, double x);

/// Lower 1 - alpha quantile, computed by bisection on the survival function.
double chi_squared_quantile(int dof, double probability);

enum class PermutationScheme {
  balanced,   // uniform relabeling into two groups of the original sizes
  pair_swap,  // independently swap each (i-th of A, i-th of B) pair
};

/// Algorithm drivers.  Groups of unequal size are truncated to the smaller
/// size n (the first n members of the larger group are used).
TestReport algorithm1_chi2(const GroupSample& g1, const GroupSample& g2,
                           double alpha);

TestReport algorithm2_permutation(
    const GroupSample& g1, const GroupSample& g2, double alpha,
    int permutations, std::uint64_t seed,
    PermutationScheme scheme = PermutationScheme::balanced, int threads = 0);

/// Randomization-style NHST on the within-group pairwise-distance loss.
/// When floor-like k* would fall below 1 it is clamped to 1 (documented).
TestReport algorithm3_nhst(const GroupSample& g1, const GroupSample& g2,
                           double alpha, int permutations, std::uint64_t seed,
                           int threads = 0);

}  // namespace sectkit
