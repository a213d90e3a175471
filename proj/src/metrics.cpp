#include "srmc/metrics.hpp"

#include <cmath>
#include <set>

namespace srmc {

long ClassHistogram::total() const {
  long t = 0;
  for (long c : counts) {
    if (c < 0) throw ConfigError("ClassHistogram: negative count");
    t += c;
  }
  return t;
}

std::vector<double> ClassHistogram::normalized() const {
  const long t = total();
  if (t == 0) throw ConfigError("ClassHistogram: empty histogram");
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(t);
  return p;
}

std::vector<double> running_mse(const std::vector<Vec>& mu_series, const Vec& mu_star) {
  if (mu_star.size() == 0) throw ConfigError("running_mse: missing ground truth");
  std::vector<double> out(mu_series.size());
  for (std::size_t i = 0; i < mu_series.size(); ++i) {
    if (mu_series[i].size() != mu_star.size())
      throw ConfigError("running_mse: dimension mismatch");
    out[i] = (mu_series[i] - mu_star).squaredNorm();
  }
  return out;
}

double kl_to_uniform(const ClassHistogram& h) {
  const auto p = h.normalized();
  const double c = static_cast<double>(p.size());
  double kl = 0;
  for (double pi : p)
    if (pi > 0) kl += pi * std::log(c * pi);
  return kl;
}

double tv_to_uniform(const ClassHistogram& h) {
  const auto p = h.normalized();
  const double u = 1.0 / static_cast<double>(p.size());
  double tv = 0;
  for (double pi : p) tv += std::abs(pi - u);
  return 0.5 * tv;
}

double normalized_entropy(const ClassHistogram& h) {
  const auto p = h.normalized();
  double ent = 0;
  for (double pi : p)
    if (pi > 0) ent -= pi * std::log(pi);
  return ent / std::log(static_cast<double>(p.size()));
}

double vendi_score(const Mat& similarity) {
  const int n = static_cast<int>(similarity.rows());
  if (similarity.cols() != n || n == 0)
    throw ConfigError("vendi_score: square matrix required");
  if ((similarity - similarity.transpose()).lpNorm<Eigen::Infinity>() > 1e-8)
    throw ConfigError("vendi_score: matrix must be symmetric");
  for (int i = 0; i < n; ++i)
    if (std::abs(similarity(i, i) - 1.0) > 1e-8)
      throw ConfigError("vendi_score: diagonal must be 1");

  Eigen::SelfAdjointEigenSolver<Mat> es(similarity / static_cast<double>(n));
  const Vec& ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-6)
    throw ConfigError("vendi_score: matrix is significantly non-PSD");
  double entropy = 0;
  for (int i = 0; i < n; ++i)
    if (ev[i] > 1e-12) entropy -= ev[i] * std::log(ev[i]);
  return std::exp(entropy);
}

int nearest_center(const Vec& x, const std::vector<Vec>& centers) {
  if (centers.empty()) throw ConfigError("nearest_center: no centers");
  int best = 0;
  double best_d = (x - centers[0]).squaredNorm();
  for (std::size_t k = 1; k < centers.size(); ++k) {
    const double dk = (x - centers[k]).squaredNorm();
    if (dk < best_d) {  // strict: ties keep the lowest index
      best_d = dk;
      best = static_cast<int>(k);
    }
  }
  return best;
}

std::vector<long> mode_coverage(const std::vector<std::vector<Vec>>& chains_states,
                                const std::vector<Vec>& centers) {
  if (centers.empty()) throw ConfigError("mode_coverage: no centers");
  std::size_t steps = 0;
  for (const auto& chain : chains_states) steps = std::max(steps, chain.size());

  std::set<int> visited;
  std::vector<long> coverage(steps, 0);
  for (std::size_t t = 0; t < steps; ++t) {
    for (const auto& chain : chains_states)
      if (t < chain.size()) visited.insert(nearest_center(chain[t], centers));
    coverage[t] = static_cast<long>(visited.size());
  }
  return coverage;
}

std::vector<BudgetPoint> budget_indexed_series(const RunRecord& record,
                                               const std::vector<double>& metric,
                                               CostModel model, int dim) {
  if (metric.size() != record.rows.size())
    throw ConfigError("budget_indexed_series: metric/rows length mismatch");
  std::vector<BudgetPoint> out(metric.size());
  for (std::size_t i = 0; i < metric.size(); ++i) {
    const RecordRow& row = record.rows[i];
    long budget;
    if (model == CostModel::Measured) {
      budget = row.cum_grad_evals;
    } else {
      budget = cost_per_iteration(model, dim, 0) * row.n;
    }
    out[i] = {budget, metric[i]};
  }
  return out;
}

}  // namespace srmc
