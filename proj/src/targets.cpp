#include "srmc/targets.hpp"

#include <cmath>
#include <numeric>

namespace srmc {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double softplus(double t) {
  // log(1 + e^t) without overflow
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

long TargetModel::state_count() const {
  if (domain != Domain::DiscreteConfiguration)
    throw ConfigError("state_count: continuous domain");
  long count = 1;
  for (int i = 0; i < dim; ++i) {
    count *= static_cast<long>(max_coord) + 1;
    if (count > (1L << 16)) throw ConfigError("state_count: space too large");
  }
  return count;
}

long TargetModel::state_index(const Vec& x) const {
  const long base = static_cast<long>(max_coord) + 1;
  long idx = 0;
  for (int i = dim - 1; i >= 0; --i) {
    long c = std::lround(x[i]);
    if (c < 0 || c > max_coord) throw ConfigError("state_index: coordinate out of range");
    idx = idx * base + c;
  }
  return idx;
}

Vec TargetModel::state_from_index(long idx) const {
  const long base = static_cast<long>(max_coord) + 1;
  Vec x(dim);
  for (int i = 0; i < dim; ++i) {
    x[i] = static_cast<double>(idx % base);
    idx /= base;
  }
  return x;
}

TargetModel gaussian_target(const GaussianSpec& spec) {
  const int d = static_cast<int>(spec.mean.size());
  if (spec.covariance.rows() != d || spec.covariance.cols() != d)
    throw ConfigError("gaussian_target: covariance shape mismatch");
  Eigen::LLT<Mat> llt(spec.covariance);
  if (llt.info() != Eigen::Success)
    throw ConfigError("gaussian_target: covariance not positive definite");

  GaussianInfo info{spec.mean, spec.covariance, Mat(llt.matrixL())};
  const Vec mean = spec.mean;
  const Mat precision = llt.solve(Mat::Identity(d, d));

  TargetModel model;
  model.dim = d;
  model.domain = Domain::Continuous;
  model.log_density_unnorm = [mean, precision](const Vec& x) {
    Vec r = x - mean;
    return -0.5 * r.dot(precision * r);
  };
  model.score = [mean, precision](const Vec& x) {
    return Vec(-precision * (x - mean));
  };
  model.hvp = [precision](const Vec&, const Vec& v) { return Vec(precision * v); };
  model.ground_truth_mean = mean;
  const Mat chol = info.chol;
  model.exact_sampler = [mean, chol](RngStream& rng) {
    return Vec(mean + chol * rng.normal_vec(static_cast<int>(mean.size())));
  };
  model.gaussian = std::move(info);
  return model;
}

GaussianSpec correlated_gaussian_spec(int dim, double rho) {
  GaussianSpec spec;
  spec.mean = Vec::Zero(dim);
  spec.covariance = Mat(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      spec.covariance(i, j) = std::pow(rho, std::abs(i - j));
  return spec;
}

TargetModel mixture_target(const MixtureSpec& spec) {
  const std::size_t k = spec.components.size();
  if (k == 0) throw ConfigError("mixture_target: empty components list");
  if (spec.weights.size() != k)
    throw ConfigError("mixture_target: weights/components size mismatch");
  double wsum = 0;
  for (double w : spec.weights) {
    if (w <= 0) throw ConfigError("mixture_target: non-positive weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw ConfigError("mixture_target: weights must sum to 1");

  const int d = static_cast<int>(spec.components.front().mean.size());

  // Precompute per-component precision, log-normalizer, Cholesky.
  struct Component {
    Vec mean;
    Mat precision;
    Mat chol;
    double log_norm;  // log w_k - (d/2)log(2pi) - (1/2)log|cov|
  };
  auto comps = std::make_shared<std::vector<Component>>();
  comps->reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& g = spec.components[i];
    if (g.mean.size() != d)
      throw ConfigError("mixture_target: component dimension mismatch");
    Eigen::LLT<Mat> llt(g.covariance);
    if (llt.info() != Eigen::Success)
      throw ConfigError("mixture_target: component covariance not positive definite");
    Mat chol = llt.matrixL();
    double log_det = 0;
    for (int j = 0; j < d; ++j) log_det += 2.0 * std::log(chol(j, j));
    comps->push_back({g.mean, llt.solve(Mat::Identity(d, d)), chol,
                      std::log(spec.weights[i]) - 0.5 * d * kLog2Pi - 0.5 * log_det});
  }

  // log pi(x) = logsumexp_k [log_norm_k - (1/2)(x-mu_k)' P_k (x-mu_k)]
  auto component_logs = [comps](const Vec& x) {
    Vec logs(static_cast<int>(comps->size()));
    for (std::size_t i = 0; i < comps->size(); ++i) {
      Vec r = x - (*comps)[i].mean;
      logs[static_cast<int>(i)] = (*comps)[i].log_norm - 0.5 * r.dot((*comps)[i].precision * r);
    }
    return logs;
  };

  TargetModel model;
  model.dim = d;
  model.domain = Domain::Continuous;
  model.log_density_unnorm = [component_logs](const Vec& x) {
    Vec logs = component_logs(x);
    double m = logs.maxCoeff();
    return m + std::log((logs.array() - m).exp().sum());
  };
  model.score = [comps, component_logs](const Vec& x) {
    Vec logs = component_logs(x);
    double m = logs.maxCoeff();
    Vec resp = (logs.array() - m).exp();
    resp /= resp.sum();
    Vec s = Vec::Zero(x.size());
    for (std::size_t i = 0; i < comps->size(); ++i)
      s += resp[static_cast<int>(i)] * Vec(-(*comps)[i].precision * (x - (*comps)[i].mean));
    return s;
  };
  // hessian(U) = sum_k r_k P_k - sum_k r_k s_k s_k' + s s'
  model.hvp = [comps, component_logs](const Vec& x, const Vec& v) {
    Vec logs = component_logs(x);
    double m = logs.maxCoeff();
    Vec resp = (logs.array() - m).exp();
    resp /= resp.sum();
    Vec s = Vec::Zero(x.size());
    std::vector<Vec> sk(comps->size());
    for (std::size_t i = 0; i < comps->size(); ++i) {
      sk[i] = -(*comps)[i].precision * (x - (*comps)[i].mean);
      s += resp[static_cast<int>(i)] * sk[i];
    }
    Vec out = Vec::Zero(x.size());
    for (std::size_t i = 0; i < comps->size(); ++i) {
      double r = resp[static_cast<int>(i)];
      out += r * Vec((*comps)[i].precision * v);
      out -= r * sk[i] * sk[i].dot(v);
    }
    out += s * s.dot(v);
    return out;
  };

  Vec gt = Vec::Zero(d);
  for (std::size_t i = 0; i < k; ++i) gt += spec.weights[i] * spec.components[i].mean;
  model.ground_truth_mean = gt;

  std::vector<double> cum(k);
  std::partial_sum(spec.weights.begin(), spec.weights.end(), cum.begin());
  model.exact_sampler = [comps, cum, d](RngStream& rng) {
    double u = rng.uniform();
    std::size_t pick = 0;
    while (pick + 1 < cum.size() && u > cum[pick]) ++pick;
    return Vec((*comps)[pick].mean + (*comps)[pick].chol * rng.normal_vec(d));
  };
  return model;
}

TargetModel logistic_posterior_target(const LogisticPosteriorSpec& spec) {
  const int n = static_cast<int>(spec.design.rows());
  const int d = static_cast<int>(spec.design.cols());
  if (n < 1) throw ConfigError("logistic_posterior_target: empty design");
  if (spec.labels.size() != n)
    throw ConfigError("logistic_posterior_target: design/labels size mismatch");
  for (int i = 0; i < n; ++i)
    if (spec.labels[i] != 0.0 && spec.labels[i] != 1.0)
      throw ConfigError("logistic_posterior_target: labels must be 0/1");
  if (spec.prior_variance <= 0)
    throw ConfigError("logistic_posterior_target: prior variance must be positive");

  const Mat Z = spec.design;
  const Vec y = spec.labels;
  const double inv_tau2 = 1.0 / spec.prior_variance;

  TargetModel model;
  model.dim = d;
  model.domain = Domain::Continuous;
  model.log_density_unnorm = [Z, y, inv_tau2](const Vec& x) {
    Vec t = Z * x;
    double ll = -0.5 * inv_tau2 * x.squaredNorm();
    for (int i = 0; i < t.size(); ++i)
      ll += y[i] * (-softplus(-t[i])) + (1.0 - y[i]) * (-softplus(t[i]));
    return ll;
  };
  model.score = [Z, y, inv_tau2](const Vec& x) {
    Vec t = Z * x;
    Vec resid(t.size());
    for (int i = 0; i < t.size(); ++i) resid[i] = y[i] - sigmoid(t[i]);
    return Vec(-inv_tau2 * x + Z.transpose() * resid);
  };
  model.hvp = [Z, inv_tau2](const Vec& x, const Vec& v) {
    Vec t = Z * x;
    Vec zv = Z * v;
    Vec w(t.size());
    for (int i = 0; i < t.size(); ++i) {
      double s = sigmoid(t[i]);
      w[i] = s * (1.0 - s) * zv[i];
    }
    return Vec(inv_tau2 * v + Z.transpose() * w);
  };
  return model;
}

Vec discrete_score(const TargetModel& target, const Vec& x) {
  if (target.domain != Domain::DiscreteConfiguration)
    throw ConfigError("discrete_score: target must be discrete-configuration");
  const double log_px = target.log_density_unnorm(x);
  if (!std::isfinite(log_px))
    throw KernelFault("discrete_score: pi(x) = 0 at evaluation point");
  Vec s(target.dim);
  Vec mirrored = x;
  for (int i = 0; i < target.dim; ++i) {
    const double orig = x[i];
    mirrored[i] = static_cast<double>(target.max_coord) - orig;
    s[i] = std::exp(target.log_density_unnorm(mirrored) - log_px) - 1.0;
    mirrored[i] = orig;
  }
  return s;
}

TargetModel binary_table_target(std::vector<double> log_mass, int dim) {
  if (dim < 1 || dim > 16) throw ConfigError("binary_table_target: dim out of range");
  if (log_mass.size() != (1UL << dim))
    throw ConfigError("binary_table_target: table size must be 2^dim");

  auto table = std::make_shared<const std::vector<double>>(std::move(log_mass));

  TargetModel model;
  model.dim = dim;
  model.domain = Domain::DiscreteConfiguration;
  model.max_coord = 1;
  model.score_mode = DiscreteScoreMode::Exact;
  model.log_table = table;
  model.log_density_unnorm = [table, dim](const Vec& x) {
    long idx = 0;
    for (int i = 0; i < dim; ++i)
      if (std::lround(x[i]) != 0) idx |= 1L << i;
    return (*table)[static_cast<std::size_t>(idx)];
  };
  // The score feature is built on top of the finished density; a small
  // self-reference through a shared closure keeps the model copyable.
  auto log_density = model.log_density_unnorm;
  model.score = [table, dim, log_density](const Vec& x) {
    TargetModel view;
    view.dim = dim;
    view.domain = Domain::DiscreteConfiguration;
    view.max_coord = 1;
    view.log_density_unnorm = log_density;
    return discrete_score(view, x);
  };
  return model;
}

TargetModel binary_quadratic_target(const Vec& a, const Mat& W,
                                    DiscreteScoreMode mode) {
  const int d = static_cast<int>(a.size());
  if (W.rows() != d || W.cols() != d)
    throw ConfigError("binary_quadratic_target: shape mismatch");

  const Mat Wsym = 0.5 * (W + W.transpose());

  TargetModel model;
  model.dim = d;
  model.domain = Domain::DiscreteConfiguration;
  model.max_coord = 1;
  model.score_mode = mode;
  model.log_density_unnorm = [a, Wsym](const Vec& x) {
    return a.dot(x) + 0.5 * x.dot(Wsym * x);
  };
  auto log_density = model.log_density_unnorm;
  if (mode == DiscreteScoreMode::Exact) {
    model.score = [d, log_density](const Vec& x) {
      TargetModel view;
      view.dim = d;
      view.domain = Domain::DiscreteConfiguration;
      view.max_coord = 1;
      view.log_density_unnorm = log_density;
      return discrete_score(view, x);
    };
  } else {
    model.score = [a, Wsym](const Vec& x) { return Vec(a + Wsym * x); };
    model.hvp = [Wsym](const Vec&, const Vec& v) { return Vec(-Wsym * v); };
  }
  if (d <= 16) {
    std::vector<double> table(1UL << d);
    Vec x(d);
    for (long idx = 0; idx < (1L << d); ++idx) {
      for (int i = 0; i < d; ++i) x[i] = (idx >> i) & 1 ? 1.0 : 0.0;
      table[static_cast<std::size_t>(idx)] = model.log_density_unnorm(x);
    }
    model.log_table = std::make_shared<const std::vector<double>>(std::move(table));
  }
  return model;
}

std::vector<Vec> enumerate_states(const TargetModel& target) {
  const long count = target.state_count();
  std::vector<Vec> states;
  states.reserve(static_cast<std::size_t>(count));
  for (long idx = 0; idx < count; ++idx) states.push_back(target.state_from_index(idx));
  return states;
}

std::vector<double> enumerate_probabilities(const TargetModel& target) {
  const long count = target.state_count();
  std::vector<double> logs(static_cast<std::size_t>(count));
  double max_log = -std::numeric_limits<double>::infinity();
  for (long idx = 0; idx < count; ++idx) {
    logs[static_cast<std::size_t>(idx)] =
        target.log_density_unnorm(target.state_from_index(idx));
    max_log = std::max(max_log, logs[static_cast<std::size_t>(idx)]);
  }
  double total = 0;
  for (double& l : logs) {
    l = std::exp(l - max_log);
    total += l;
  }
  for (double& l : logs) l /= total;
  return logs;
}

}  // namespace srmc
