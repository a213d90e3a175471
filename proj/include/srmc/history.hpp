#pragma once

#include <deque>
#include <optional>

#include "srmc/common.hpp"

namespace srmc {

/// Step size gamma_n = scale * (n + offset)^(-rho). The update that
/// produces iterate n+1 from iterate n uses gamma(n, ...), so with
/// rho = 1, scale = 1, offset = 1 and theta_0 = 0 the history equals the
/// arithmetic mean of the observed scores.
double gamma(long n, double rho, double scale, long offset);

struct StepSchedule {
  double rho = 0.6;
  double scale = 1.0;
  long offset = 1;
};

/// Coupled stochastic-approximation iterate: score history theta (length
/// d), running estimator mu (length m), iteration counter n. Owned by a
/// single chain; never shared concurrently.
struct HistoryState {
  Vec theta;
  Vec mu;
  long n = 0;
  StepSchedule schedule;
};

/// One coupled update:
///   theta += gamma (s_new - theta);  mu += gamma (f_new - mu);  n += 1,
/// both blocks sharing the same gamma. Non-finite inputs raise
/// KernelFault instead of propagating silently.
void update_history(HistoryState& state, const Vec& s_new, const Vec& f_new);

/// Repellence-strength schedule. Fixed emits a constant. CappedWarmup
/// follows alpha_k = k / (C + k / alpha_ref) over a warmup of
/// K_w = floor(min(3000, 0.1 N) / L) outer iterations, with C chosen so
/// the warmup endpoint equals rho_cap * alpha_ref exactly, then freezes.
/// Guardrail adds a data-dependent early freeze: while alpha is still
/// increasing, a rolling 95% quantile of the monitor
/// alpha_k |s(X_k) . theta_k| over windows of max(10, K_w/20) iterations
/// is compared against tau = 1; two consecutive violating windows freeze
/// alpha at the last safe value.
class AlphaSchedule {
 public:
  enum class Kind { Fixed, CappedWarmup, Guardrail };

  struct Spec {
    Kind kind = Kind::Fixed;
    double alpha = 0.0;        // Fixed
    double alpha_ref = 1.0;    // warmup kinds
    double rho_cap = 0.8;
    long total_budget = 0;     // N: iterations, or leapfrog gradients for HMC
    int leapfrog = 1;          // L
    double tau = 1.0;          // Guardrail threshold
  };

  explicit AlphaSchedule(const Spec& spec);

  /// Alpha to use at outer iteration k. Guardrail requires the monitor
  /// stream to be fed via observe(); Fixed and CappedWarmup ignore it.
  double value(long k) const;

  /// Feed the post-step monitor statistic for iteration k.
  void observe(long k, double monitor);

  /// Emit alpha for iteration k; guardrail kind demands a monitor stream,
  /// so calling value() is equivalent but observe() must be kept up to
  /// date by the caller.
  double step(long k, std::optional<double> monitor);

  long warmup_iterations() const { return warmup_iters_; }
  bool frozen_early() const { return frozen_; }
  long freeze_iteration() const { return freeze_at_; }

 private:
  double schedule_value(long k) const;

  Spec spec_;
  long warmup_iters_ = 0;
  double warmup_c_ = 0;
  long window_size_ = 10;
  std::deque<double> window_;
  int violating_windows_ = 0;
  bool frozen_ = false;
  double frozen_value_ = 0;
  long freeze_at_ = -1;
};

}  // namespace srmc
