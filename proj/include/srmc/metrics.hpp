#pragma once

#include <vector>

#include "srmc/driver.hpp"

namespace srmc {

struct ClassHistogram {
  std::vector<long> counts;

  long total() const;
  std::vector<double> normalized() const;  // throws when total() == 0
  int classes() const { return static_cast<int>(counts.size()); }
};

/// Per-step squared Euclidean error of a running-mean series against the
/// ground truth.
std::vector<double> running_mse(const std::vector<Vec>& mu_series, const Vec& mu_star);

/// KL(p_hat || uniform) = sum_c p_c log(C p_c), with 0 log 0 = 0.
double kl_to_uniform(const ClassHistogram& h);

/// Total variation to uniform: sum |p_c - 1/C| / 2.
double tv_to_uniform(const ClassHistogram& h);

/// Shannon entropy of p_hat normalized by log C; 1 iff uniform.
double normalized_entropy(const ClassHistogram& h);

/// Effective number of distinct samples: exp of the Shannon entropy of
/// the eigenvalues of similarity / n. Requires a symmetric PSD matrix
/// with unit diagonal; eigenvalues below 1e-12 are treated as zero.
double vendi_score(const Mat& similarity);

/// Nearest mode center per state (ties to the lowest index).
int nearest_center(const Vec& x, const std::vector<Vec>& centers);

/// Cumulative count of distinct mode centers visited across all chains
/// up to each step. chains_states[c][t] is chain c at step t; all chains
/// must have equal length.
std::vector<long> mode_coverage(const std::vector<std::vector<Vec>>& chains_states,
                                const std::vector<Vec>& centers);

/// Re-index a per-step metric by cumulative cost under a cost model.
struct BudgetPoint {
  long budget;
  double value;
};
std::vector<BudgetPoint> budget_indexed_series(const RunRecord& record,
                                               const std::vector<double>& metric,
                                               CostModel model, int dim);

}  // namespace srmc
