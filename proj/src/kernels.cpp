#include "srmc/kernels.hpp"

#include <cmath>
#include <map>

namespace srmc {
namespace {

double softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sanitize_log_ratio(double lr) {
  return std::isnan(lr) ? -std::numeric_limits<double>::infinity() : lr;
}

bool accept_test(double log_ratio, RngStream& rng) {
  // exp only at the final test, clamped into [0, 1]
  const double p = std::exp(std::min(log_ratio, 0.0));
  return rng.uniform() < p;
}

/// Per-step cache of base score-feature evaluations, keyed by the
/// mixed-radix state index; counts fresh evaluations for grad_evals.
class ScoreCache {
 public:
  ScoreCache(const TargetModel& target) : target_(target) {}

  const Vec& get(const Vec& x) {
    const long key = index(x);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    ++fresh_;
    return cache_.emplace(key, target_.score(x)).first->second;
  }

  void put(const Vec& x, Vec score) { cache_.emplace(index(x), std::move(score)); }

  long fresh() const { return fresh_; }

 private:
  long index(const Vec& x) const {
    const long base = static_cast<long>(target_.max_coord) + 1;
    long idx = 0;
    for (int i = target_.dim - 1; i >= 0; --i)
      idx = idx * base + std::lround(x[i]);
    return idx;
  }

  const TargetModel& target_;
  std::map<long, Vec> cache_;
  long fresh_ = 0;
};

}  // namespace

double balancing_fn(Balancing g, double t) {
  switch (g) {
    case Balancing::Barker: return t / (1.0 + t);
    case Balancing::Sqrt: return std::sqrt(t);
    case Balancing::Max: return std::max(1.0, t);
  }
  return t;
}

void validate_balancing(const std::function<double(double)>& g) {
  for (double t : {0.3, 0.5, 2.0, 3.7, 11.0}) {
    const double lhs = g(t);
    const double rhs = t * g(1.0 / t);
    if (!(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs))))
      throw ConfigError("balancing function violates g(t) = t g(1/t)");
  }
}

namespace {

// log g(e^l) for the built-in balancing functions, in log space.
double log_balancing(Balancing g, double log_t) {
  switch (g) {
    case Balancing::Barker: return -softplus(-log_t);
    case Balancing::Sqrt: return 0.5 * log_t;
    case Balancing::Max: return std::max(0.0, log_t);
  }
  return log_t;
}

double tilt_term(const TiltedSurrogate& sur, const Vec& s_y, const Vec& s_x) {
  if (!sur.tilt_active()) return 0.0;
  return -sur.alpha * sur.theta.dot(s_y - s_x);
}

}  // namespace

KernelOutcome mh_step(const TiltedSurrogate& sur, const Vec& x,
                      const MhConfig& cfg, RngStream& rng,
                      const Vec* cached_score) {
  const TargetModel& target = *sur.base;
  KernelOutcome out;

  Vec y;
  if (target.domain == Domain::Continuous) {
    y = x + cfg.step_sigma * rng.normal_vec(target.dim);
  } else {
    // uniform single-coordinate replacement: symmetric proposal
    y = x;
    const long i = rng.uniform_int(target.dim);
    const long shift = 1 + rng.uniform_int(target.max_coord);
    y[i] = static_cast<double>(
        (std::lround(x[i]) + shift) % (target.max_coord + 1));
  }

  Vec s_x = cached_score ? *cached_score : target.score(x);
  Vec s_y = target.score(y);
  out.grad_evals = cached_score ? 1 : 2;

  double log_ratio = target.log_density_unnorm(y) - target.log_density_unnorm(x) +
                     tilt_term(sur, s_y, s_x);
  log_ratio = sanitize_log_ratio(log_ratio);

  out.proposal = y;
  out.log_accept_ratio = log_ratio;
  out.accepted = accept_test(log_ratio, rng);
  out.next_state = out.accepted ? y : x;
  out.score_at_next = out.accepted ? std::move(s_y) : std::move(s_x);
  return out;
}

KernelOutcome ula_step(const TiltedSurrogate& sur, const Vec& x,
                       const UlaConfig& cfg, RngStream& rng,
                       const Vec* cached_score) {
  const TargetModel& target = *sur.base;
  KernelOutcome out;

  Vec s_x = cached_score ? *cached_score : target.score(x);
  out.grad_evals = cached_score ? 0 : 1;
  Vec drift = surrogate_score_cached(sur, x, s_x);
  if (sur.tilt_active()) out.grad_evals += hvp_eval_cost(sur.hvp.scheme);
  if (!drift.allFinite()) throw KernelFault("ula_step: non-finite surrogate score");

  Vec noise = rng.normal_vec(target.dim);
  out.next_state =
      x + cfg.eta * drift + std::sqrt(2.0 * cfg.eta) * cfg.noise_scale * noise;
  out.proposal = out.next_state;
  out.accepted = true;
  out.log_accept_ratio = 0.0;
  out.score_at_next = target.score(out.next_state);
  out.grad_evals += 1;
  return out;
}

double mala_log_ratio(const TiltedSurrogate& sur, const Vec& x, const Vec& y,
                      double eta) {
  const TargetModel& target = *sur.base;
  Vec s_x = target.score(x);
  Vec s_y = target.score(y);
  Vec drift_x = surrogate_score_cached(sur, x, s_x);
  Vec drift_y = surrogate_score_cached(sur, y, s_y);
  double log_ratio = target.log_density_unnorm(y) - target.log_density_unnorm(x) +
                     tilt_term(sur, s_y, s_x);
  const double fwd = (y - x - eta * drift_x).squaredNorm();
  const double bwd = (x - y - eta * drift_y).squaredNorm();
  log_ratio -= (bwd - fwd) / (4.0 * eta);
  return sanitize_log_ratio(log_ratio);
}

KernelOutcome mala_step(const TiltedSurrogate& sur, const Vec& x,
                        const MalaConfig& cfg, RngStream& rng,
                        const Vec* cached_score) {
  const TargetModel& target = *sur.base;
  const double eta = cfg.eta;
  KernelOutcome out;

  Vec s_x = cached_score ? *cached_score : target.score(x);
  out.grad_evals = cached_score ? 0 : 1;
  const int hvp_cost = sur.tilt_active() ? hvp_eval_cost(sur.hvp.scheme) : 0;

  Vec drift_x = surrogate_score_cached(sur, x, s_x);
  out.grad_evals += hvp_cost;

  Vec y = x + eta * drift_x + std::sqrt(2.0 * eta) * rng.normal_vec(target.dim);
  Vec s_y = target.score(y);
  out.grad_evals += 1;
  Vec drift_y = surrogate_score_cached(sur, y, s_y);
  out.grad_evals += hvp_cost;

  // log r = -U(Y) + U(x) - alpha theta.(s(Y)-s(x))
  //         - (1/4eta)[ |x - Y - eta st(Y)|^2 - |Y - x - eta st(x)|^2 ]
  double log_ratio = target.log_density_unnorm(y) - target.log_density_unnorm(x) +
                     tilt_term(sur, s_y, s_x);
  const double fwd = (y - x - eta * drift_x).squaredNorm();
  const double bwd = (x - y - eta * drift_y).squaredNorm();
  log_ratio -= (bwd - fwd) / (4.0 * eta);
  log_ratio = sanitize_log_ratio(log_ratio);

  out.proposal = y;
  out.log_accept_ratio = log_ratio;
  out.accepted = accept_test(log_ratio, rng);
  out.next_state = out.accepted ? y : x;
  out.score_at_next = out.accepted ? std::move(s_y) : std::move(s_x);
  return out;
}

KernelOutcome hmc_step(const TiltedSurrogate& sur, const Vec& x,
                       const HmcConfig& cfg, RngStream& rng,
                       const Vec* cached_score) {
  const TargetModel& target = *sur.base;
  const int d = target.dim;
  const double eta = cfg.eta;
  if (cfg.leapfrog < 1) throw ConfigError("hmc_step: leapfrog count must be >= 1");
  KernelOutcome out;

  const bool identity_mass = cfg.mass.size() == 0;
  Eigen::LLT<Mat> mass_llt;
  if (!identity_mass) {
    mass_llt.compute(cfg.mass);
    if (mass_llt.info() != Eigen::Success)
      throw ConfigError("hmc_step: mass matrix not positive definite");
  }
  auto kinetic = [&](const Vec& v) {
    if (identity_mass) return 0.5 * v.squaredNorm();
    return 0.5 * v.dot(mass_llt.solve(v));
  };
  auto velocity = [&](const Vec& v) {
    if (identity_mass) return v;
    return Vec(mass_llt.solve(v));
  };

  Vec v0 = identity_mass ? rng.normal_vec(d) : Vec(mass_llt.matrixL() * rng.normal_vec(d));

  const int hvp_cost = sur.tilt_active() ? hvp_eval_cost(sur.hvp.scheme) : 0;
  Vec s0 = cached_score ? *cached_score : target.score(x);
  out.grad_evals = cached_score ? 0 : 1;

  // U_theta(x) = -tilted log density; H = U_theta + kinetic
  const double h0 = -(target.log_density_unnorm(x) +
                      (sur.tilt_active() ? -sur.alpha * sur.theta.dot(s0) : 0.0)) +
                    kinetic(v0);

  Vec pos = x;
  Vec s_pos = s0;
  Vec vel = v0;
  // the end-of-step gradient doubles as the next step's opening gradient
  Vec grad = surrogate_score_cached(sur, pos, s_pos);
  out.grad_evals += hvp_cost;
  for (int step = 0; step < cfg.leapfrog; ++step) {
    vel += 0.5 * eta * grad;
    pos += eta * velocity(vel);
    s_pos = target.score(pos);
    out.grad_evals += 1;
    grad = surrogate_score_cached(sur, pos, s_pos);
    out.grad_evals += hvp_cost;
    vel += 0.5 * eta * grad;
  }
  vel = -vel;  // momentum flip for reversibility

  const double h1 = -(target.log_density_unnorm(pos) +
                      (sur.tilt_active() ? -sur.alpha * sur.theta.dot(s_pos) : 0.0)) +
                    kinetic(vel);

  double log_ratio;
  if (!std::isfinite(h1)) {
    log_ratio = -std::numeric_limits<double>::infinity();
    out.fault = true;
  } else {
    log_ratio = sanitize_log_ratio(h0 - h1);
  }

  out.proposal = pos;
  out.log_accept_ratio = log_ratio;
  out.accepted = !out.fault && accept_test(log_ratio, rng);
  out.next_state = out.accepted ? pos : x;
  out.score_at_next = out.accepted ? std::move(s_pos) : std::move(s0);
  return out;
}

namespace {

struct Neighbor {
  int coord;
  double value;
};

std::vector<Neighbor> neighborhood(const TargetModel& target, const Vec& x) {
  std::vector<Neighbor> nb;
  nb.reserve(static_cast<std::size_t>(target.dim) * target.max_coord);
  for (int i = 0; i < target.dim; ++i)
    for (int k = 0; k <= target.max_coord; ++k)
      if (k != std::lround(x[i])) nb.push_back({i, static_cast<double>(k)});
  return nb;
}

double tilted_log_density_for(const TiltedSurrogate& sur, const Vec& x,
                              ScoreCache& cache) {
  double base_log = sur.base->log_density_unnorm(x);
  if (!sur.tilt_active()) return base_log;
  return base_log - sur.alpha * sur.theta.dot(cache.get(x));
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

/// Surrogate score feature used by GWG / DLP proposals. Exact discrete
/// mode assembles it from surrogate density ratios; proxy mode tilts the
/// relaxed gradient with the analytic Hessian.
Vec gi_surrogate_score(const TiltedSurrogate& sur, const Vec& x, ScoreCache& cache) {
  const TargetModel& target = *sur.base;
  const Vec& s_x = cache.get(x);
  if (!sur.tilt_active()) return s_x;
  if (target.score_mode == DiscreteScoreMode::Proxy) {
    if (!target.has_hvp())
      throw ConfigError("discrete_gi_step: proxy mode needs an analytic hvp");
    return s_x + sur.alpha * target.hvp(x, sur.theta);
  }
  const double log_px = sur.base->log_density_unnorm(x) - sur.alpha * sur.theta.dot(s_x);
  Vec s(target.dim);
  Vec mirrored = x;
  for (int i = 0; i < target.dim; ++i) {
    const double orig = x[i];
    mirrored[i] = static_cast<double>(target.max_coord) - orig;
    if (mirrored[i] == orig) {
      s[i] = 0.0;
      mirrored[i] = orig;
      continue;
    }
    const double log_pm = sur.base->log_density_unnorm(mirrored) -
                          sur.alpha * sur.theta.dot(cache.get(mirrored));
    s[i] = std::exp(log_pm - log_px) - 1.0;
    mirrored[i] = orig;
  }
  return s;
}

/// Unnormalized log proposal weights over the neighborhood of x.
std::vector<double> gi_log_weights(const TiltedSurrogate& sur, const Vec& x,
                                   const std::vector<Neighbor>& nb,
                                   const DiscreteGiConfig& cfg, ScoreCache& cache) {
  std::vector<double> logw(nb.size());

  if (cfg.family == DiscreteGiConfig::Family::LocallyBalanced) {
    if (cfg.custom_g) validate_balancing(cfg.custom_g);
    const double log_px = tilted_log_density_for(sur, x, cache);
    Vec y = x;
    for (std::size_t j = 0; j < nb.size(); ++j) {
      const double orig = y[nb[j].coord];
      y[nb[j].coord] = nb[j].value;
      const double log_ratio = tilted_log_density_for(sur, y, cache) - log_px;
      logw[j] = cfg.custom_g ? std::log(cfg.custom_g(std::exp(log_ratio)))
                             : log_balancing(cfg.g, log_ratio);
      y[nb[j].coord] = orig;
    }
    return logw;
  }

  const Vec s_tilde = gi_surrogate_score(sur, x, cache);
  for (std::size_t j = 0; j < nb.size(); ++j) {
    const double delta = nb[j].value - x[nb[j].coord];
    if (cfg.family == DiscreteGiConfig::Family::Gwg) {
      logw[j] = cfg.tau * s_tilde[nb[j].coord] * delta;
    } else {  // Dlp: Gaussian-like kernel centered at x + eta s_tilde
      const double e = cfg.eta;
      const double step = delta - e * s_tilde[nb[j].coord];
      logw[j] = -(step * step - e * e * s_tilde[nb[j].coord] * s_tilde[nb[j].coord]) /
                (4.0 * e);
    }
  }
  return logw;
}

}  // namespace

KernelOutcome discrete_gi_step(const TiltedSurrogate& sur, const Vec& x,
                               const DiscreteGiConfig& cfg, RngStream& rng,
                               const Vec* cached_score) {
  const TargetModel& target = *sur.base;
  if (target.domain != Domain::DiscreteConfiguration)
    throw ConfigError("discrete_gi_step: discrete-configuration domain required");
  KernelOutcome out;

  ScoreCache cache(target);
  if (cached_score) cache.put(x, *cached_score);

  const auto nb = neighborhood(target, x);
  const auto logw_fwd = gi_log_weights(sur, x, nb, cfg, cache);
  const double log_norm_fwd = log_sum_exp(logw_fwd);

  // CDF inversion with a single uniform
  const double u = rng.uniform() * std::exp(log_norm_fwd);
  double acc = 0;
  std::size_t pick = nb.size() - 1;
  for (std::size_t j = 0; j < nb.size(); ++j) {
    acc += std::exp(logw_fwd[j]);
    if (u <= acc) {
      pick = j;
      break;
    }
  }
  Vec y = x;
  y[nb[pick].coord] = nb[pick].value;

  const auto nb_rev = neighborhood(target, y);
  const auto logw_rev = gi_log_weights(sur, y, nb_rev, cfg, cache);
  const double log_norm_rev = log_sum_exp(logw_rev);
  std::size_t rev_idx = nb_rev.size();
  for (std::size_t j = 0; j < nb_rev.size(); ++j)
    if (nb_rev[j].coord == nb[pick].coord &&
        std::lround(nb_rev[j].value) == std::lround(x[nb[pick].coord])) {
      rev_idx = j;
      break;
    }
  if (rev_idx == nb_rev.size())
    throw ConfigError("discrete_gi_step: reverse move missing from neighborhood");

  double tilt = 0.0;
  if (sur.tilt_active()) tilt = tilt_term(sur, cache.get(y), cache.get(x));
  double log_ratio = target.log_density_unnorm(y) - target.log_density_unnorm(x) +
                     tilt + (logw_rev[rev_idx] - log_norm_rev) -
                     (logw_fwd[pick] - log_norm_fwd);
  log_ratio = sanitize_log_ratio(log_ratio);

  out.proposal = y;
  out.log_accept_ratio = log_ratio;
  out.accepted = accept_test(log_ratio, rng);
  out.next_state = out.accepted ? y : x;
  out.score_at_next = cache.get(out.next_state);
  out.grad_evals = cache.fresh();
  return out;
}

double discrete_gi_proposal_prob(const TiltedSurrogate& sur, const Vec& x,
                                 const Vec& y, const DiscreteGiConfig& cfg) {
  const TargetModel& target = *sur.base;
  ScoreCache cache(target);
  const auto nb = neighborhood(target, x);
  const auto logw = gi_log_weights(sur, x, nb, cfg, cache);
  const double log_norm = log_sum_exp(logw);
  for (std::size_t j = 0; j < nb.size(); ++j) {
    Vec cand = x;
    cand[nb[j].coord] = nb[j].value;
    if ((cand - y).lpNorm<Eigen::Infinity>() < 0.5)
      return std::exp(logw[j] - log_norm);
  }
  return 0.0;
}

}  // namespace srmc
