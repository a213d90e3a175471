#pragma once

#include <vector>

#include "srmc/surrogate.hpp"
#include "srmc/targets.hpp"

namespace srmc {

/// Stationary covariance blocks that drive the asymptotic theory:
/// S = Cov_pi(s, s), C = Cov_pi(f, s), Vf = Cov_pi(f, f).
/// beta = 1 - 1/2 when rho = 1 (pure averaging), 1 otherwise.
struct MomentInputs {
  Mat S;
  Mat C;
  Mat Vf;
  double alpha = 0;
  bool rho_is_one = false;

  double beta() const { return rho_is_one ? 0.5 : 1.0; }
  int d() const { return static_cast<int>(S.rows()); }
  int m() const { return static_cast<int>(Vf.rows()); }
};

struct CovarianceBlocks {
  Mat theta_theta;  // d x d
  Mat theta_mu;     // d x m
  Mat mu_mu;        // m x m

  Mat assemble() const;
};

/// Mean-field Jacobian at the equilibrium:
///   [ -I_d - alpha S   0    ]
///   [ -alpha C        -I_m  ]
Mat jacobian_at_star(const MomentInputs& inp);

/// Unique positive semidefinite solution of
///   (k I + A) Sigma + Sigma (k I + A)' + SigmaDelta = 0,
/// k = 1/2 when rho = 1 else 0, via a vectorized Kronecker solve (sizes
/// in scope are <= 64). Throws if the shifted drift is not Hurwitz,
/// naming the offending eigenvalue. theta_dim partitions the result.
CovarianceBlocks solve_lyapunov(const Mat& a_star, const Mat& sigma_delta,
                                bool rho_is_one, int theta_dim);

/// Residual Frobenius norm of the Lyapunov equation at a candidate
/// solution; exposed so verification reports can print it.
double lyapunov_residual(const Mat& a_star, const Mat& sigma_delta,
                         bool rho_is_one, const Mat& sigma);

/// Closed-form covariance blocks under independent surrogate sampling:
///   Sigma_tt = S (beta I + alpha S)^{-1} / 2
///   Sigma_tm = (beta I + alpha S)^{-1} C' / 2
///   Sigma_mm = R + C (S (2 alpha S + 2 beta I))^{-1} C',
///   R = (Vf - C S^{-1} C') / (2 beta).
CovarianceBlocks closed_form_blocks_independent(const MomentInputs& inp);

/// Sample-mean limiting covariance for Gaussian targets: V Sigma_tt V'.
Mat gaussian_mean_covariance(const Mat& V, const Mat& theta_block);

/// Batch-means estimate of the long-run covariance of a vector series:
/// split into batch_count equal batches, take the covariance of the
/// sqrt(batch length)-scaled batch means, symmetrize, clip eigenvalues
/// at zero. Requires length >= 10 * batch_count.
Mat estimate_noise_covariance(const std::vector<Vec>& series, int batch_count);

struct SteinResult {
  double sup_norm;    // max_i |estimate of E_pi s_i|
  double std_error;   // Monte Carlo standard error of the worst coordinate; 0 when exact
  bool exact;         // true when computed by full enumeration
};

/// Checks E_pi[s(X)] = 0 by exact sampling (Gaussian / mixture) or full
/// enumeration (discrete).
SteinResult stein_check(const TargetModel& target, long n_samples, RngStream& rng);
SteinResult stein_check_enumerated(const TargetModel& target);

struct QuadratureGrid {
  int points_per_dim = 401;
  double half_width = 8.0;  // initial box half width around the center
  Vec center;               // empty = origin
};

/// Tensor-grid trapezoid estimate of log Z_theta for d <= 2 surrogates;
/// the box is doubled until the boundary integrand falls below 1e-12 of
/// the peak. Sanity-check tool only, never on the sampling path.
double log_partition_quadrature(const TiltedSurrogate& sur, QuadratureGrid grid);

}  // namespace srmc
