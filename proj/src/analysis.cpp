#include "srmc/analysis.hpp"

#include <cmath>
#include <sstream>

namespace srmc {

Mat CovarianceBlocks::assemble() const {
  const int d = static_cast<int>(theta_theta.rows());
  const int m = static_cast<int>(mu_mu.rows());
  Mat full(d + m, d + m);
  full.topLeftCorner(d, d) = theta_theta;
  full.topRightCorner(d, m) = theta_mu;
  full.bottomLeftCorner(m, d) = theta_mu.transpose();
  full.bottomRightCorner(m, m) = mu_mu;
  return full;
}

Mat jacobian_at_star(const MomentInputs& inp) {
  const int d = inp.d();
  const int m = inp.m();
  if (inp.C.rows() != m || inp.C.cols() != d)
    throw ConfigError("jacobian_at_star: C must be m x d");
  Mat a = Mat::Zero(d + m, d + m);
  a.topLeftCorner(d, d) = -Mat::Identity(d, d) - inp.alpha * inp.S;
  a.bottomLeftCorner(m, d) = -inp.alpha * inp.C;
  a.bottomRightCorner(m, m) = -Mat::Identity(m, m);
  return a;
}

namespace {

Mat shifted_drift(const Mat& a_star, bool rho_is_one) {
  const double kappa = rho_is_one ? 0.5 : 0.0;
  return kappa * Mat::Identity(a_star.rows(), a_star.cols()) + a_star;
}

void require_hurwitz(const Mat& b) {
  Eigen::EigenSolver<Mat> es(b);
  for (int i = 0; i < b.rows(); ++i) {
    if (es.eigenvalues()[i].real() >= 0) {
      std::ostringstream msg;
      msg << "solve_lyapunov: shifted drift is not Hurwitz, eigenvalue "
          << es.eigenvalues()[i].real();
      if (es.eigenvalues()[i].imag() != 0)
        msg << " + " << es.eigenvalues()[i].imag() << "i";
      throw ConfigError(msg.str());
    }
  }
}

}  // namespace

double lyapunov_residual(const Mat& a_star, const Mat& sigma_delta,
                         bool rho_is_one, const Mat& sigma) {
  const Mat b = shifted_drift(a_star, rho_is_one);
  return (b * sigma + sigma * b.transpose() + sigma_delta).norm();
}

CovarianceBlocks solve_lyapunov(const Mat& a_star, const Mat& sigma_delta,
                                bool rho_is_one, int theta_dim) {
  const int n = static_cast<int>(a_star.rows());
  if (a_star.cols() != n || sigma_delta.rows() != n || sigma_delta.cols() != n)
    throw ConfigError("solve_lyapunov: shape mismatch");
  if (theta_dim < 0 || theta_dim > n)
    throw ConfigError("solve_lyapunov: bad theta dimension");

  const Mat b = shifted_drift(a_star, rho_is_one);
  require_hurwitz(b);

  // Vectorized form: (I (x) B + B (x) I) vec(Sigma) = -vec(SigmaDelta).
  Mat kron = Mat::Zero(n * n, n * n);
  const Mat identity = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) += identity(i, j) * b;  // I (x) B
      kron.block(i * n, j * n, n, n) += b(i, j) * identity;  // B (x) I
    }
  Eigen::Map<const Vec> rhs(sigma_delta.data(), n * n);
  Vec vec_sigma = Eigen::PartialPivLU<Mat>(kron).solve(-rhs);
  Mat sigma = Eigen::Map<Mat>(vec_sigma.data(), n, n);
  sigma = 0.5 * (sigma + sigma.transpose());

  CovarianceBlocks blocks;
  blocks.theta_theta = sigma.topLeftCorner(theta_dim, theta_dim);
  blocks.theta_mu = sigma.topRightCorner(theta_dim, n - theta_dim);
  blocks.mu_mu = sigma.bottomRightCorner(n - theta_dim, n - theta_dim);
  return blocks;
}

CovarianceBlocks closed_form_blocks_independent(const MomentInputs& inp) {
  const int d = inp.d();
  const double beta = inp.beta();
  const Mat identity = Mat::Identity(d, d);

  Eigen::PartialPivLU<Mat> s_lu(inp.S);
  if (std::abs(s_lu.determinant()) < 1e-300)
    throw ConfigError("closed_form_blocks_independent: singular S");

  const Mat shifted = beta * identity + inp.alpha * inp.S;
  Eigen::PartialPivLU<Mat> shifted_lu(shifted);

  CovarianceBlocks blocks;
  blocks.theta_theta = 0.5 * inp.S * shifted_lu.inverse();
  blocks.theta_theta = 0.5 * (blocks.theta_theta + blocks.theta_theta.transpose());
  blocks.theta_mu = 0.5 * shifted_lu.solve(inp.C.transpose());
  const Mat residual =
      (inp.Vf - inp.C * s_lu.solve(inp.C.transpose())) / (2.0 * beta);
  const Mat m_alpha = inp.S * (2.0 * inp.alpha * inp.S + 2.0 * beta * identity);
  blocks.mu_mu =
      residual + inp.C * Eigen::PartialPivLU<Mat>(m_alpha).solve(inp.C.transpose());
  blocks.mu_mu = 0.5 * (blocks.mu_mu + blocks.mu_mu.transpose());
  return blocks;
}

Mat gaussian_mean_covariance(const Mat& V, const Mat& theta_block) {
  if (V.cols() != theta_block.rows())
    throw ConfigError("gaussian_mean_covariance: shape mismatch");
  return V * theta_block * V.transpose();
}

Mat estimate_noise_covariance(const std::vector<Vec>& series, int batch_count) {
  const long total = static_cast<long>(series.size());
  if (batch_count < 2) throw ConfigError("estimate_noise_covariance: need >= 2 batches");
  if (total < 10L * batch_count)
    throw ConfigError("estimate_noise_covariance: series too short for batch count");
  const long batch_len = total / batch_count;
  const int p = static_cast<int>(series.front().size());

  Mat means(p, batch_count);
  for (int b = 0; b < batch_count; ++b) {
    Vec acc = Vec::Zero(p);
    for (long i = 0; i < batch_len; ++i) acc += series[static_cast<std::size_t>(b * batch_len + i)];
    means.col(b) = acc / static_cast<double>(batch_len);
  }
  Vec grand = means.rowwise().mean();
  Mat cov = Mat::Zero(p, p);
  for (int b = 0; b < batch_count; ++b) {
    Vec r = means.col(b) - grand;
    cov += r * r.transpose();
  }
  cov *= static_cast<double>(batch_len) / static_cast<double>(batch_count - 1);

  // Symmetrize and clip eigenvalues at zero.
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  Vec ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

SteinResult stein_check_enumerated(const TargetModel& target) {
  if (target.domain != Domain::DiscreteConfiguration)
    throw ConfigError("stein_check_enumerated: discrete target required");
  const auto probs = enumerate_probabilities(target);
  Vec acc = Vec::Zero(target.dim);
  for (long idx = 0; idx < static_cast<long>(probs.size()); ++idx) {
    const Vec x = target.state_from_index(idx);
    acc += probs[static_cast<std::size_t>(idx)] * discrete_score(target, x);
  }
  return {acc.lpNorm<Eigen::Infinity>(), 0.0, true};
}

SteinResult stein_check(const TargetModel& target, long n_samples, RngStream& rng) {
  if (target.domain == Domain::DiscreteConfiguration)
    return stein_check_enumerated(target);
  if (!target.has_sampler())
    throw ConfigError("stein_check: target is neither samplable nor enumerable");

  Vec mean = Vec::Zero(target.dim);
  Vec m2 = Vec::Zero(target.dim);
  for (long i = 1; i <= n_samples; ++i) {
    Vec s = target.score(target.exact_sampler(rng));
    Vec delta = s - mean;
    mean += delta / static_cast<double>(i);
    m2 += delta.cwiseProduct(s - mean);
  }
  int worst = 0;
  mean.cwiseAbs().maxCoeff(&worst);
  const double var = m2[worst] / static_cast<double>(n_samples - 1);
  return {mean.lpNorm<Eigen::Infinity>(),
          std::sqrt(var / static_cast<double>(n_samples)), false};
}

double log_partition_quadrature(const TiltedSurrogate& sur, QuadratureGrid grid) {
  const int d = sur.base->dim;
  if (d > 2) throw ConfigError("log_partition_quadrature: d <= 2 only");
  if (grid.points_per_dim < 3)
    throw ConfigError("log_partition_quadrature: need >= 3 points per dim");
  Vec center = grid.center.size() == d ? grid.center : Vec::Zero(d);

  for (int attempt = 0; attempt < 12; ++attempt) {
    const double h = grid.half_width;
    const int n = grid.points_per_dim;
    const double dx = 2.0 * h / (n - 1);

    double peak = -std::numeric_limits<double>::infinity();
    double boundary = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(d == 1 ? n : n * n));
    std::vector<double> logw;
    logw.reserve(logs.capacity());

    auto trap = [n](int i) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };

    if (d == 1) {
      Vec x(1);
      for (int i = 0; i < n; ++i) {
        x[0] = center[0] - h + i * dx;
        const double l = tilted_log_density(sur, x);
        logs.push_back(l);
        logw.push_back(std::log(trap(i) * dx));
        peak = std::max(peak, l);
        if (i == 0 || i == n - 1) boundary = std::max(boundary, l);
      }
    } else {
      Vec x(2);
      for (int i = 0; i < n; ++i) {
        x[0] = center[0] - h + i * dx;
        for (int j = 0; j < n; ++j) {
          x[1] = center[1] - h + j * dx;
          const double l = tilted_log_density(sur, x);
          logs.push_back(l);
          logw.push_back(std::log(trap(i) * trap(j) * dx * dx));
          peak = std::max(peak, l);
          if (i == 0 || i == n - 1 || j == 0 || j == n - 1)
            boundary = std::max(boundary, l);
        }
      }
    }

    if (boundary - peak < std::log(1e-12)) {
      double acc = 0;
      for (std::size_t i = 0; i < logs.size(); ++i)
        acc += std::exp(logs[i] - peak + logw[i]);
      return peak + std::log(acc);
    }
    grid.half_width *= 2.0;
    grid.points_per_dim = 2 * grid.points_per_dim - 1;  // keep the spacing
  }
  throw ConfigError("log_partition_quadrature: box expansion did not converge");
}

}  // namespace srmc
