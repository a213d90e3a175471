#pragma once

#include "srmc/targets.hpp"

namespace srmc {

enum class HvpScheme { Analytic, Forward, Central };

struct HvpConfig {
  HvpScheme scheme = HvpScheme::Analytic;
  double eps = 1e-3;  // finite-difference scale
};

/// Default HVP selection: analytic when the target advertises one,
/// otherwise forward differences with eps = max(alpha, 1e-3). The scale
/// tracks alpha because perturbations of that order stay numerically
/// stable on nonlinear targets.
HvpConfig default_hvp(const TargetModel& target, double alpha);

/// Immutable view of the score-tilted surrogate
///   pi_theta(x) proportional to pi(x) exp(-alpha theta . s(x)).
/// The driver builds a fresh view per iteration; at alpha = 0 or
/// theta = 0 every surrogate quantity equals the base quantity exactly.
struct TiltedSurrogate {
  TiltedSurrogate(const TargetModel& base_model, Vec theta_vec, double alpha_val,
                  HvpConfig hvp_config);

  const TargetModel* base;
  Vec theta;
  double alpha;
  HvpConfig hvp;

  bool tilt_active() const {
    return alpha != 0.0 && theta.squaredNorm() != 0.0;
  }
};

/// Unnormalized log density of the surrogate: base log density minus
/// alpha * theta . s(x).
double tilted_log_density(const TiltedSurrogate& sur, const Vec& x);

/// Surrogate score s_theta(x) = s(x) + alpha * hessian(U)(x) theta,
/// with the HVP computed per the configured scheme. Continuous targets
/// in Exact discrete mode use the surrogate density ratios instead (see
/// discrete_surrogate_score).
Vec surrogate_score(const TiltedSurrogate& sur, const Vec& x);

/// Same, reusing an already computed base score at x.
Vec surrogate_score_cached(const TiltedSurrogate& sur, const Vec& x,
                           const Vec& base_score);

/// Discrete analogue of the surrogate score: component i is
/// pi_theta(x^(i, K - x_i)) / pi_theta(x) - 1, assembled from base
/// density ratios and the tilt factor so no Hessian is needed.
Vec discrete_surrogate_score(const TiltedSurrogate& sur, const Vec& x);

/// hessian(U)(x) * v by finite differences of the gradient, grad U = -score.
/// forward: (grad U(x + eps v) - grad U(x)) / eps
/// central: (grad U(x + eps v / 2) - grad U(x - eps v / 2)) / eps
enum class FdScheme { Forward, Central };
Vec hvp_finite_difference(const TargetModel& target, const Vec& x, const Vec& v,
                          double eps, FdScheme scheme);

/// Number of base-gradient evaluations one HVP costs under a scheme
/// (analytic counted as one gradient-equivalent).
inline int hvp_eval_cost(HvpScheme scheme) {
  switch (scheme) {
    case HvpScheme::Analytic: return 1;
    case HvpScheme::Forward: return 1;
    case HvpScheme::Central: return 2;
  }
  return 1;
}

}  // namespace srmc
