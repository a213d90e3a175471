#pragma once

#include <functional>
#include <variant>

#include "srmc/surrogate.hpp"

namespace srmc {

/// Result of one kernel transition.
///
/// grad_evals counts fresh evaluations of the base score feature plus
/// Hessian-vector products in gradient-equivalents (analytic and forward
/// difference count 1 per HVP, central counts 2). A cached score of the
/// current state supplied by the caller is not recounted; the returned
/// score_at_next is included. Discrete kernels count score-feature
/// evaluations at distinct states through a per-step cache.
struct KernelOutcome {
  Vec next_state;
  bool accepted = true;
  Vec proposal;
  double log_accept_ratio = 0.0;  // sanitized: never NaN
  long grad_evals = 0;
  Vec score_at_next;  // base score feature at next_state, for the history update
  bool fault = false; // e.g. non-finite Hamiltonian, rejected and flagged
};

struct MhConfig {
  double step_sigma = 1.0;  // random-walk scale, continuous domains only
};

struct UlaConfig {
  double eta = 0.01;
  double noise_scale = 1.0;  // test hook; 0 disables the injected noise
};

struct MalaConfig {
  double eta = 0.01;
};

struct HmcConfig {
  double eta = 0.1;
  int leapfrog = 10;
  Mat mass;  // empty = identity
};

enum class Balancing { Barker, Sqrt, Max };

struct DiscreteGiConfig {
  enum class Family { LocallyBalanced, Gwg, Dlp };
  Family family = Family::LocallyBalanced;
  Balancing g = Balancing::Barker;
  std::function<double(double)> custom_g;  // overrides g when set; must balance
  double tau = 2.0;   // Gwg temperature
  double eta = 0.1;   // Dlp step
};

/// Independent exact draw from pi_theta; Gaussian base targets only.
struct IndependentConfig {};

using KernelConfig =
    std::variant<MhConfig, UlaConfig, MalaConfig, HmcConfig, DiscreteGiConfig,
                 IndependentConfig>;

double balancing_fn(Balancing g, double t);

/// Checks g(t) = t g(1/t) on probe points; throws ConfigError on failure.
void validate_balancing(const std::function<double(double)>& g);

/// Metropolis-Hastings on the surrogate: random-walk Gaussian proposal on
/// continuous domains, uniform single-coordinate replacement on discrete
/// ones. Acceptance per the tilted ratio; the surrogate normalizer cancels.
KernelOutcome mh_step(const TiltedSurrogate& sur, const Vec& x,
                      const MhConfig& cfg, RngStream& rng,
                      const Vec* cached_score = nullptr);

/// One Euler-Maruyama step driven by the surrogate score; always accepted.
KernelOutcome ula_step(const TiltedSurrogate& sur, const Vec& x,
                       const UlaConfig& cfg, RngStream& rng,
                       const Vec* cached_score = nullptr);

/// Langevin proposal with Metropolis correction on the surrogate.
KernelOutcome mala_step(const TiltedSurrogate& sur, const Vec& x,
                        const MalaConfig& cfg, RngStream& rng,
                        const Vec* cached_score = nullptr);

/// The mala_step acceptance log-ratio for an arbitrary proposal point;
/// zero when y == x.
double mala_log_ratio(const TiltedSurrogate& sur, const Vec& x, const Vec& y,
                      double eta);

/// Leapfrog Hamiltonian step on the surrogate potential
/// U_theta(x) = U(x) + alpha theta . s(x); theta is held fixed through
/// the whole trajectory and the momentum is flipped before the
/// accept test. Non-finite Hamiltonians reject and set the fault flag.
KernelOutcome hmc_step(const TiltedSurrogate& sur, const Vec& x,
                       const HmcConfig& cfg, RngStream& rng,
                       const Vec* cached_score = nullptr);

/// Gradient-informed single-coordinate proposals on discrete
/// configuration spaces (locally balanced / GWG / DLP), built from
/// surrogate ratios or the surrogate score, with the score-repellent
/// Metropolis correction.
KernelOutcome discrete_gi_step(const TiltedSurrogate& sur, const Vec& x,
                               const DiscreteGiConfig& cfg, RngStream& rng,
                               const Vec* cached_score = nullptr);

/// Proposal probability q_theta(x, y) of discrete_gi_step for enumerable
/// oracles; y must be a single-coordinate change of x.
double discrete_gi_proposal_prob(const TiltedSurrogate& sur, const Vec& x,
                                 const Vec& y, const DiscreteGiConfig& cfg);

}  // namespace srmc
