#include "sectkit/infer.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>

#include "sectkit/errors.hpp"
#include "sectkit/parallel.hpp"
#include "sectkit/random.hpp"

namespace sectkit {
namespace {

constexpr double kEigenvalueFloor = 1e-12;

void require_same_grids(const SECTField& a, const SECTField& b) {
  if (a.grid != b.grid || !(a.levels == b.levels))
    throw GridMismatchError("group fields on different grids");
}

void require_same_grids(const ECTField& a, const ECTField& b) {
  if (a.grid != b.grid || !(a.levels == b.levels))
    throw GridMismatchError("group fields on different grids");
}

// Largest integer strictly smaller than x.  Values within 1e-9 of an
// integer are treated as that integer, so decimal inputs like 0.95 * 1000
// behave as in exact arithmetic.
int strictly_below_index(double x) {
  const double rounded = std::round(x);
  if (std::abs(x - rounded) <= 1e-9 * std::max(1.0, std::abs(x)))
    return static_cast<int>(rounded) - 1;
  return static_cast<int>(std::floor(x));
}

// Core of Algorithm 1 on raw per-shape matrices; forced_l < 1 selects L via
// the eigenvalue share rule.
struct PipelineOutcome {
  double statistic = 0.0;
  int l_hat = 0;
  std::size_t nu_star = 0;
};

PipelineOutcome chi2_pipeline(std::span<const Eigen::MatrixXd* const> a,
                              std::span<const Eigen::MatrixXd* const> b,
                              double horizon, int forced_l) {
  const std::size_t n = a.size();
  const auto rows = a.front()->rows();
  const auto cols = a.front()->cols();
  const double delta = static_cast<double>(cols);

  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto* f : a) m1 += *f;
  for (const auto* f : b) m2 += *f;
  m1 /= static_cast<double>(n);
  m2 /= static_cast<double>(n);

  // Distinguishing direction: row with the largest sup-norm mean gap.
  std::size_t nu_star = 0;
  double best_gap = -1.0;
  for (Eigen::Index p = 0; p < rows; ++p) {
    const double gap = (m1.row(p) - m2.row(p)).cwiseAbs().maxCoeff();
    if (gap > best_gap) {
      best_gap = gap;
      nu_star = static_cast<std::size_t>(p);
    }
  }

  // Pooled covariance of the within-group-centered rows at nu_star.
  Eigen::MatrixXd centered(2 * n, cols);
  for (std::size_t i = 0; i < n; ++i) {
    centered.row(static_cast<Eigen::Index>(i)) =
        a[i]->row(static_cast<Eigen::Index>(nu_star)) -
        m1.row(static_cast<Eigen::Index>(nu_star));
    centered.row(static_cast<Eigen::Index>(n + i)) =
        b[i]->row(static_cast<Eigen::Index>(nu_star)) -
        m2.row(static_cast<Eigen::Index>(nu_star));
  }
  const Eigen::MatrixXd covariance =
      centered.transpose() * centered / static_cast<double>(2 * n - 2);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed");
  // Ascending from Eigen; flip to descending.
  Eigen::VectorXd lambdas = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  lambdas *= horizon / delta;

  int l_hat = forced_l;
  if (l_hat < 1) l_hat = select_l(lambdas);

  const double lambda_top = std::abs(lambdas(0));
  const double scale = horizon / delta;  // T / Delta weight in the sums
  double statistic = 0.0;
  for (int l = 0; l < l_hat; ++l) {
    const double lambda = lambdas(l);
    if (!(lambda > kEigenvalueFloor * lambda_top))
      throw NumericalError(
          "degenerate eigenvalue within the first L components; lower the "
          "eigenvalue share threshold");
    // phi_hat = sqrt(Delta / T) * v; the (T / Delta) quadrature weight and
    // the eigenvector scaling combine to sqrt(T / Delta).
    double row_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double projection =
          (a[i]->row(static_cast<Eigen::Index>(nu_star)) -
           b[i]->row(static_cast<Eigen::Index>(nu_star)))
              .dot(vectors.col(l));
      row_sum += projection * std::sqrt(scale) / std::sqrt(2.0 * lambda);
    }
    const double normalized = row_sum / std::sqrt(static_cast<double>(n));
    statistic += normalized * normalized;
  }
  return PipelineOutcome{statistic, l_hat, nu_star};
}

std::vector<const Eigen::MatrixXd*> field_pointers(
    std::span<const SECTField> fields, std::size_t count) {
  std::vector<const Eigen::MatrixXd*> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(&fields[i].values);
  return out;
}

void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("alpha must lie in (0, 1)");
}

void attach_diagnostics(TestReport& report, std::span<const SECTField> g1,
                        std::span<const SECTField> g2, std::size_t nu_star) {
  const Eigen::MatrixXd c1 = covariance_group(g1, nu_star);
  const Eigen::MatrixXd c2 = covariance_group(g2, nu_star);
  const auto [rf, rinf] = norm_ratios(c1, c2);
  report.r_frobenius = rf;
  report.r_max = rinf;
}

}  // namespace

void GroupSample::validate() const {
  if (sect.empty() && ect.empty())
    throw ValidationError("group: no fields");
  if (!sect.empty() && !ect.empty() && sect.size() != ect.size())
    throw ValidationError("group: SECT/ECT pairing mismatch");
  if (size() < 2) throw ValidationError("group: need at least 2 samples");
  for (const auto& f : sect) {
    f.validate();
    require_same_grids(sect.front(), f);
  }
  for (const auto& f : ect) {
    f.validate();
    require_same_grids(ect.front(), f);
  }
}

Eigen::MatrixXd mean_field(std::span<const SECTField> fields) {
  if (fields.empty()) throw ValidationError("mean over an empty group");
  for (const auto& f : fields) require_same_grids(fields.front(), f);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(fields.front().values.rows(),
                                              fields.front().values.cols());
  for (const auto& f : fields) out += f.values;
  return out / static_cast<double>(fields.size());
}

std::size_t distinguishing_direction(const Eigen::MatrixXd& m1,
                                     const Eigen::MatrixXd& m2) {
  if (m1.rows() != m2.rows() || m1.cols() != m2.cols())
    throw GridMismatchError("distinguishing direction: shape mismatch");
  std::size_t best = 0;
  double best_gap = -1.0;
  for (Eigen::Index p = 0; p < m1.rows(); ++p) {
    const double gap = (m1.row(p) - m2.row(p)).cwiseAbs().maxCoeff();
    if (gap > best_gap) {
      best_gap = gap;
      best = static_cast<std::size_t>(p);
    }
  }
  return best;
}

Eigen::MatrixXd covariance_group(std::span<const SECTField> fields,
                                 std::size_t direction) {
  if (fields.size() < 2)
    throw ValidationError("group covariance: need at least 2 samples");
  const auto n = static_cast<Eigen::Index>(fields.size());
  const auto cols = fields.front().values.cols();
  const auto p = static_cast<Eigen::Index>(direction);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(cols);
  for (const auto& f : fields) mean += f.values.row(p);
  mean /= static_cast<double>(n);
  Eigen::MatrixXd centered(n, cols);
  for (Eigen::Index i = 0; i < n; ++i)
    centered.row(i) = fields[static_cast<std::size_t>(i)].values.row(p) - mean;
  return centered.transpose() * centered / static_cast<double>(n - 1);
}

std::pair<double, double> norm_ratios(const Eigen::MatrixXd& c1,
                                      const Eigen::MatrixXd& c2) {
  if (c1.rows() != c2.rows() || c1.cols() != c2.cols())
    throw GridMismatchError("norm ratios: shape mismatch");
  const double f1 = c1.norm();
  const double i1 = c1.cwiseAbs().maxCoeff();
  if (f1 == 0.0 || i1 == 0.0)
    throw NumericalError("norm ratios: zero reference covariance");
  return {(c1 - c2).norm() / f1, (c1 - c2).cwiseAbs().maxCoeff() / i1};
}

Eigen::MatrixXd covariance_pooled(std::span<const SECTField> g1,
                                  std::span<const SECTField> g2,
                                  std::size_t direction) {
  if (g1.size() < 2 || g2.size() < 2)
    throw ValidationError("pooled covariance: need at least 2 samples per group");
  require_same_grids(g1.front(), g2.front());
  const auto cols = g1.front().values.cols();
  const auto p = static_cast<Eigen::Index>(direction);
  const auto total = static_cast<Eigen::Index>(g1.size() + g2.size());

  Eigen::RowVectorXd mean1 = Eigen::RowVectorXd::Zero(cols);
  Eigen::RowVectorXd mean2 = Eigen::RowVectorXd::Zero(cols);
  for (const auto& f : g1) mean1 += f.values.row(p);
  for (const auto& f : g2) mean2 += f.values.row(p);
  mean1 /= static_cast<double>(g1.size());
  mean2 /= static_cast<double>(g2.size());

  Eigen::MatrixXd centered(total, cols);
  Eigen::Index row = 0;
  for (const auto& f : g1) centered.row(row++) = f.values.row(p) - mean1;
  for (const auto& f : g2) centered.row(row++) = f.values.row(p) - mean2;
  return centered.transpose() * centered / static_cast<double>(total - 2);
}

KLSystem kl_decompose(const Eigen::MatrixXd& covariance, double horizon) {
  if (covariance.rows() != covariance.cols())
    throw ValidationError("kl: covariance must be square");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * scale)
    throw ValidationError("kl: covariance is not symmetric");
  if (!(horizon > 0.0)) throw ValidationError("kl: horizon must be positive");

  const double delta = static_cast<double>(covariance.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success)
    throw NumericalError("kl: eigendecomposition failed");

  KLSystem kl;
  kl.horizon = horizon;
  kl.eigenvalues = solver.eigenvalues().reverse() * (horizon / delta);
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index l = 0; l < vectors.cols(); ++l) {
    const double top = vectors.col(l).cwiseAbs().maxCoeff();
    for (Eigen::Index q = 0; q < vectors.rows(); ++q) {
      if (std::abs(vectors(q, l)) > 1e-12 * top) {
        if (vectors(q, l) < 0.0) vectors.col(l) = -vectors.col(l);
        break;
      }
    }
  }
  kl.eigenfunctions = vectors * std::sqrt(delta / horizon);
  return kl;
}

int select_l(const Eigen::VectorXd& eigenvalues, double threshold) {
  if (eigenvalues.size() == 0)
    throw ValidationError("select_l: empty eigenvalue list");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ValidationError("select_l: threshold must lie in (0, 1)");
  const double total = eigenvalues.cwiseAbs().sum();
  if (total <= 0.0) throw NumericalError("select_l: all eigenvalues are zero");
  double cumulative = 0.0;
  for (Eigen::Index l = 0; l < eigenvalues.size(); ++l) {
    cumulative += std::abs(eigenvalues(l));
    // Strict inequality with a tie guard for decimal thresholds.
    if (cumulative > (threshold + 1e-12) * total)
      return static_cast<int>(l) + 1;
  }
  return static_cast<int>(eigenvalues.size());
}

Eigen::MatrixXd xi_statistics(std::span<const SECTField> g1,
                              std::span<const SECTField> g2,
                              std::size_t direction, const KLSystem& kl,
                              int l_count) {
  const std::size_t n = std::min(g1.size(), g2.size());
  if (n == 0) throw ValidationError("xi: empty group");
  if (l_count < 1 || l_count > kl.eigenvalues.size())
    throw ValidationError("xi: invalid component count");
  const auto p = static_cast<Eigen::Index>(direction);
  const double delta = static_cast<double>(kl.eigenfunctions.rows());
  const double weight = kl.horizon / delta;
  const double lambda_top = std::abs(kl.eigenvalues(0));

  Eigen::MatrixXd xi(l_count, static_cast<Eigen::Index>(n));
  for (int l = 0; l < l_count; ++l) {
    const double lambda = kl.eigenvalues(l);
    if (!(lambda > kEigenvalueFloor * lambda_top))
      throw NumericalError(
          "degenerate eigenvalue within the first L components; lower the "
          "eigenvalue share threshold");
    const double factor = weight / std::sqrt(2.0 * lambda);
    for (std::size_t i = 0; i < n; ++i) {
      const double projection =
          (g1[i].values.row(p) - g2[i].values.row(p))
              .dot(kl.eigenfunctions.col(l));
      xi(l, static_cast<Eigen::Index>(i)) = factor * projection;
    }
  }
  return xi;
}

TestReport chi2_test(const Eigen::MatrixXd& xi, double alpha) {
  validate_alpha(alpha);
  const auto l_count = xi.rows();
  const double n = static_cast<double>(xi.cols());
  double statistic = 0.0;
  for (Eigen::Index l = 0; l < l_count; ++l) {
    const double normalized = xi.row(l).sum() / std::sqrt(n);
    statistic += normalized * normalized;
  }
  TestReport report;
  report.method = "chi2";
  report.statistic = statistic;
  report.l_hat = static_cast<int>(l_count);
  report.reference = chi_squared_quantile(report.l_hat, 1.0 - alpha);
  report.p_value = chi_squared_survival(report.l_hat, statistic);
  report.decision =
      statistic > report.reference ? Decision::reject : Decision::accept;
  return report;
}

double chi_squared_survival(int dof, double x) {
  if (dof < 1) throw ValidationError("chi-squared: dof must be >= 1");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double chi_squared_quantile(int dof, double probability) {
  if (dof < 1) throw ValidationError("chi-squared: dof must be >= 1");
  if (!(probability > 0.0 && probability < 1.0))
    throw ValidationError("chi-squared quantile: probability outside (0, 1)");
  const double tail = 1.0 - probability;
  double lo = 0.0, hi = 1.0;
  while (chi_squared_survival(dof, hi) > tail) hi *= 2.0;
  for (int iteration = 0; iteration < 200; ++iteration) {
    const double mid = 0.5 * (lo + hi);
    if (chi_squared_survival(dof, mid) > tail)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

TestReport algorithm1_chi2(const GroupSample& g1, const GroupSample& g2,
                           double alpha) {
  validate_alpha(alpha);
  g1.validate();
  g2.validate();
  const std::size_t n = std::min(g1.sect.size(), g2.sect.size());
  if (n < 2) throw ValidationError("algorithm 1: need SECT fields, n >= 2");
  require_same_grids(g1.sect.front(), g2.sect.front());
  const std::span<const SECTField> a(g1.sect.data(), n);
  const std::span<const SECTField> b(g2.sect.data(), n);
  const double horizon = g1.sect.front().levels.horizon;

  const auto pa = field_pointers(a, n);
  const auto pb = field_pointers(b, n);
  const auto outcome = chi2_pipeline(pa, pb, horizon, -1);

  TestReport report;
  report.method = "chi2";
  report.statistic = outcome.statistic;
  report.l_hat = outcome.l_hat;
  report.nu_star_index = static_cast<int>(outcome.nu_star) + 1;
  report.reference = chi_squared_quantile(outcome.l_hat, 1.0 - alpha);
  report.p_value = chi_squared_survival(outcome.l_hat, outcome.statistic);
  report.decision = outcome.statistic > report.reference ? Decision::reject
                                                         : Decision::accept;
  attach_diagnostics(report, a, b, outcome.nu_star);
  return report;
}

TestReport algorithm2_permutation(const GroupSample& g1, const GroupSample& g2,
                                  double alpha, int permutations,
                                  std::uint64_t seed, PermutationScheme scheme,
                                  int threads) {
  validate_alpha(alpha);
  g1.validate();
  g2.validate();
  if (permutations < 1)
    throw ValidationError("permutation test: need at least one permutation");
  if (strictly_below_index((1.0 - alpha) * permutations) < 1)
    throw ValidationError("permutation test: too few permutations for alpha");
  const std::size_t n = std::min(g1.sect.size(), g2.sect.size());
  if (n < 2) throw ValidationError("algorithm 2: need SECT fields, n >= 2");
  require_same_grids(g1.sect.front(), g2.sect.front());
  const std::span<const SECTField> a(g1.sect.data(), n);
  const std::span<const SECTField> b(g2.sect.data(), n);
  const double horizon = g1.sect.front().levels.horizon;

  std::vector<const Eigen::MatrixXd*> pooled = field_pointers(a, n);
  {
    auto pb = field_pointers(b, n);
    pooled.insert(pooled.end(), pb.begin(), pb.end());
  }
  const std::span<const Eigen::MatrixXd* const> pa(pooled.data(), n);
  const std::span<const Eigen::MatrixXd* const> pb(pooled.data() + n, n);
  const auto original = chi2_pipeline(pa, pb, horizon, -1);

  std::vector<double> stats(static_cast<std::size_t>(permutations));
  parallel_for(
      stats.size(),
      [&](std::size_t k) {
        RandomStream stream = RandomStream::keyed(seed, {k});
        std::vector<const Eigen::MatrixXd*> shuffled = pooled;
        if (scheme == PermutationScheme::balanced) {
          stream.shuffle(shuffled);
        } else {
          for (std::size_t i = 0; i < n; ++i)
            if (stream.next_u64() & 1ull) std::swap(shuffled[i], shuffled[n + i]);
        }
        const std::span<const Eigen::MatrixXd* const> sa(shuffled.data(), n);
        const std::span<const Eigen::MatrixXd* const> sb(shuffled.data() + n, n);
        stats[k] =
            chi2_pipeline(sa, sb, horizon, original.l_hat).statistic;
      },
      threads);

  int greater_equal = 0;
  for (double s : stats)
    if (s >= original.statistic) ++greater_equal;
  std::sort(stats.begin(), stats.end());
  const int k_star = std::clamp(
      strictly_below_index((1.0 - alpha) * permutations), 1, permutations);

  TestReport report;
  report.method = "permutation";
  report.statistic = original.statistic;
  report.reference = stats[static_cast<std::size_t>(k_star) - 1];
  report.p_value =
      (1.0 + greater_equal) / (static_cast<double>(permutations) + 1.0);
  report.l_hat = original.l_hat;
  report.nu_star_index = static_cast<int>(original.nu_star) + 1;
  report.decision = original.statistic > report.reference ? Decision::reject
                                                          : Decision::accept;
  report.seed = seed;
  report.permutations = permutations;
  report.k_star = k_star;
  attach_diagnostics(report, a, b, original.nu_star);
  return report;
}

TestReport algorithm3_nhst(const GroupSample& g1, const GroupSample& g2,
                           double alpha, int permutations, std::uint64_t seed,
                           int threads) {
  validate_alpha(alpha);
  g1.validate();
  g2.validate();
  if (permutations < 1)
    throw ValidationError("nhst: need at least one permutation");
  const std::size_t n = std::min(g1.ect.size(), g2.ect.size());
  if (n < 2) throw ValidationError("algorithm 3: need ECT fields, n >= 2");
  require_same_grids(g1.ect.front(), g2.ect.front());

  // Pairwise distances over the pooled 2n fields; permutations only
  // re-index into this matrix.
  const std::size_t total = 2 * n;
  Eigen::MatrixXd distances(total, total);
  auto field_at = [&](std::size_t i) -> const ECTField& {
    return i < n ? g1.ect[i] : g2.ect[i - n];
  };
  for (std::size_t i = 0; i < total; ++i) {
    distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.0;
    for (std::size_t j = i + 1; j < total; ++j) {
      const double d = rho_discrete(field_at(i), field_at(j));
      distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
      distances(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
    }
  }

  const double normalizer = 2.0 * static_cast<double>(n) * (n - 1.0);
  auto loss = [&](std::span<const std::uint32_t> assignment) {
    // Within-group sums over ordered pairs; diagonal terms are zero.
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        acc += 2.0 * distances(assignment[i], assignment[j]) +
               2.0 * distances(assignment[n + i], assignment[n + j]);
    return acc / normalizer;
  };

  std::vector<std::uint32_t> identity(total);
  std::iota(identity.begin(), identity.end(), 0u);
  const double observed = loss(identity);

  std::vector<double> stats(static_cast<std::size_t>(permutations));
  parallel_for(
      stats.size(),
      [&](std::size_t k) {
        RandomStream stream = RandomStream::keyed(seed, {k});
        std::vector<std::uint32_t> assignment = identity;
        stream.shuffle(assignment);
        stats[k] = loss(assignment);
      },
      threads);

  int less_equal = 0;
  for (double s : stats)
    if (s <= observed) ++less_equal;
  std::sort(stats.begin(), stats.end());
  const int k_star =
      std::clamp(strictly_below_index(alpha * permutations), 1, permutations);

  TestReport report;
  report.method = "nhst";
  report.statistic = observed;
  report.reference = stats[static_cast<std::size_t>(k_star) - 1];
  report.p_value =
      (1.0 + less_equal) / (static_cast<double>(permutations) + 1.0);
  report.decision =
      observed < report.reference ? Decision::reject : Decision::accept;
  report.seed = seed;
  report.permutations = permutations;
  report.k_star = k_star;
  return report;
}

}  // namespace sectkit
