#include "srmc/surrogate.hpp"

#include <cmath>

namespace srmc {

HvpConfig default_hvp(const TargetModel& target, double alpha) {
  if (target.has_hvp()) return {HvpScheme::Analytic, 0.0};
  return {HvpScheme::Forward, std::max(alpha, 1e-3)};
}

TiltedSurrogate::TiltedSurrogate(const TargetModel& base_model, Vec theta_vec,
                                 double alpha_val, HvpConfig hvp_config)
    : base(&base_model),
      theta(std::move(theta_vec)),
      alpha(alpha_val),
      hvp(hvp_config) {
  if (alpha < 0) throw ConfigError("TiltedSurrogate: alpha must be non-negative");
  if (theta.size() != base->dim)
    throw ConfigError("TiltedSurrogate: theta dimension mismatch");
  if (hvp.scheme == HvpScheme::Analytic && !base->has_hvp() &&
      base->domain == Domain::Continuous)
    throw ConfigError("TiltedSurrogate: analytic hvp requested but target has none");
  if (hvp.scheme != HvpScheme::Analytic && hvp.eps <= 0)
    throw ConfigError("TiltedSurrogate: finite-difference eps must be positive");
}

double tilted_log_density(const TiltedSurrogate& sur, const Vec& x) {
  double base_log = sur.base->log_density_unnorm(x);
  if (!sur.tilt_active()) return base_log;
  return base_log - sur.alpha * sur.theta.dot(sur.base->score(x));
}

Vec hvp_finite_difference(const TargetModel& target, const Vec& x, const Vec& v,
                          double eps, FdScheme scheme) {
  if (eps <= 0) throw ConfigError("hvp_finite_difference: eps must be positive");
  // grad U = -score, so hessian(U) v = -(score(x + eps v) - score(x)) / eps.
  if (scheme == FdScheme::Forward) {
    Vec g1 = -target.score(x + eps * v);
    Vec g0 = -target.score(x);
    return (g1 - g0) / eps;
  }
  Vec gp = -target.score(x + (0.5 * eps) * v);
  Vec gm = -target.score(x - (0.5 * eps) * v);
  return (gp - gm) / eps;
}

namespace {

Vec hessian_theta_product(const TiltedSurrogate& sur, const Vec& x) {
  switch (sur.hvp.scheme) {
    case HvpScheme::Analytic:
      return sur.base->hvp(x, sur.theta);
    case HvpScheme::Forward:
      return hvp_finite_difference(*sur.base, x, sur.theta, sur.hvp.eps,
                                   FdScheme::Forward);
    case HvpScheme::Central:
      return hvp_finite_difference(*sur.base, x, sur.theta, sur.hvp.eps,
                                   FdScheme::Central);
  }
  throw ConfigError("unreachable hvp scheme");
}

}  // namespace

Vec surrogate_score_cached(const TiltedSurrogate& sur, const Vec& x,
                           const Vec& base_score) {
  if (!sur.tilt_active()) return base_score;
  return base_score + sur.alpha * hessian_theta_product(sur, x);
}

Vec surrogate_score(const TiltedSurrogate& sur, const Vec& x) {
  return surrogate_score_cached(sur, x, sur.base->score(x));
}

Vec discrete_surrogate_score(const TiltedSurrogate& sur, const Vec& x) {
  const TargetModel& target = *sur.base;
  if (target.domain != Domain::DiscreteConfiguration)
    throw ConfigError("discrete_surrogate_score: discrete domain required");
  const double log_px = tilted_log_density(sur, x);
  if (!std::isfinite(log_px))
    throw KernelFault("discrete_surrogate_score: pi_theta(x) = 0");
  Vec s(target.dim);
  Vec mirrored = x;
  for (int i = 0; i < target.dim; ++i) {
    const double orig = x[i];
    mirrored[i] = static_cast<double>(target.max_coord) - orig;
    s[i] = std::exp(tilted_log_density(sur, mirrored) - log_px) - 1.0;
    mirrored[i] = orig;
  }
  return s;
}

}  // namespace srmc
