#pragma once

#include <string>
#include <vector>

#include "srmc/analysis.hpp"
#include "srmc/kernels.hpp"

namespace srmc {

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0;   // the quantity compared against the tolerance
  double tolerance = 0;
  std::string detail;
};

/// Runs the invariant suite: Stein checks, Lyapunov residuals and the
/// diagonal closed form, closed-form equivalence, detailed-balance
/// oracles for fixed-theta kernels, leapfrog reversibility, balancing
/// identities, schedule endpoints. `filter` keeps checks whose name
/// contains the substring.
std::vector<CheckResult> run_verification(const std::string& filter = "");

/// Explicit transition matrix of the discrete-domain MH kernel on an
/// enumerable space, from exhausting proposal outcomes at fixed theta.
Mat mh_transition_matrix(const TiltedSurrogate& sur);

/// Same for the gradient-informed discrete kernel.
Mat discrete_gi_transition_matrix(const TiltedSurrogate& sur,
                                  const DiscreteGiConfig& cfg);

/// Stationary law of a row-stochastic matrix via the linear system
/// (P' - I) pi = 0 with the normalization row appended.
Vec stationary_distribution(const Mat& P);

/// Normalized pi_theta over the enumerated states of a discrete target.
Vec tilted_probabilities(const TiltedSurrogate& sur);

/// Max over state pairs of |pi(x) P(x,y) - pi(y) P(y,x)|.
double detailed_balance_residual(const Vec& pi, const Mat& P);

}  // namespace srmc
