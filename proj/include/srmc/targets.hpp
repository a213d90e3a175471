#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "srmc/common.hpp"
#include "srmc/rng.hpp"

namespace srmc {

enum class Domain { Continuous, DiscreteConfiguration };

/// How the score feature of a discrete-configuration target is built:
/// Exact uses the mirror-replacement density-ratio feature (zero mean
/// under pi by construction); Proxy uses the gradient of a smooth
/// extension of the energy. Recorded so runs can report which path ran.
enum class DiscreteScoreMode { Exact, Proxy };

/// Exact-sampling data kept for Gaussian targets; enables the
/// independent-surrogate kernel and Monte Carlo oracles.
struct GaussianInfo {
  Vec mean;
  Mat cov;
  Mat chol;  // lower-triangular factor of cov
};

/// A (possibly unnormalized) target distribution. Immutable after
/// construction; safe to share across concurrently running chains.
struct TargetModel {
  int dim = 0;
  Domain domain = Domain::Continuous;
  int max_coord = 0;  // K for discrete-configuration domains, coords in {0..K}

  std::function<double(const Vec&)> log_density_unnorm;
  std::function<Vec(const Vec&)> score;
  std::function<Vec(const Vec&, const Vec&)> hvp;  // hessian(U) * v; empty if absent
  std::optional<Vec> ground_truth_mean;
  std::function<Vec(RngStream&)> exact_sampler;  // empty if not exactly samplable

  std::optional<GaussianInfo> gaussian;
  DiscreteScoreMode score_mode = DiscreteScoreMode::Exact;
  // Full table of unnormalized log densities, kept for |X| <= 2^16 so
  // brute-force oracles can enumerate. Indexed by mixed-radix encoding.
  std::shared_ptr<const std::vector<double>> log_table;

  bool has_hvp() const { return static_cast<bool>(hvp); }
  bool has_sampler() const { return static_cast<bool>(exact_sampler); }
  long state_count() const;          // (K+1)^dim, discrete only
  long state_index(const Vec& x) const;
  Vec state_from_index(long idx) const;
};

struct GaussianSpec {
  Vec mean;
  Mat covariance;
};

struct MixtureSpec {
  std::vector<double> weights;
  std::vector<GaussianSpec> components;
};

struct LogisticPosteriorSpec {
  Mat design;                 // N x d, rows z_i
  Vec labels;                 // length N, entries in {0, 1}
  double prior_variance = 1;  // tau^2
};

TargetModel gaussian_target(const GaussianSpec& spec);
TargetModel mixture_target(const MixtureSpec& spec);
TargetModel logistic_posterior_target(const LogisticPosteriorSpec& spec);

/// Covariance with exponentially decaying off-diagonals, cov_ij = rho^|i-j|.
GaussianSpec correlated_gaussian_spec(int dim, double rho);

/// Mirror-replacement discrete score: component i is
/// pi(x with coord i replaced by K - x_i) / pi(x) - 1, from unnormalized
/// densities. Throws KernelFault when pi(x) = 0.
Vec discrete_score(const TargetModel& target, const Vec& x);

/// Binary target from an explicit table of unnormalized log masses
/// (length 2^dim, bit i of the index = coordinate i). Score feature is
/// the exact discrete score.
TargetModel binary_table_target(std::vector<double> log_mass, int dim);

/// Binary target with quadratic energy, log pi(x) = a'x + x'Wx/2 up to a
/// constant. The smooth extension supplies a relaxed gradient and an
/// analytic Hessian, so both score modes are available.
TargetModel binary_quadratic_target(const Vec& a, const Mat& W,
                                    DiscreteScoreMode mode);

/// Enumerate all states of a discrete target (requires |X| <= 2^16).
std::vector<Vec> enumerate_states(const TargetModel& target);

/// Normalized probabilities over the enumerated state order.
std::vector<double> enumerate_probabilities(const TargetModel& target);

}  // namespace srmc
