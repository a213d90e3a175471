#include "srmc/history.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace srmc {

double gamma(long n, double rho, double scale, long offset) {
  if (rho <= 0.5 || rho > 1.0)
    throw ConfigError("gamma: rho must lie in (0.5, 1]");
  if (scale <= 0) throw ConfigError("gamma: scale must be positive");
  if (n + offset <= 0) throw ConfigError("gamma: n + offset must be positive");
  return scale * std::pow(static_cast<double>(n + offset), -rho);
}

void update_history(HistoryState& state, const Vec& s_new, const Vec& f_new) {
  if (s_new.size() != state.theta.size() || f_new.size() != state.mu.size())
    throw ConfigError("update_history: dimension mismatch");
  if (!s_new.allFinite() || !f_new.allFinite())
    throw KernelFault("update_history: non-finite observation");
  const double g = gamma(state.n, state.schedule.rho, state.schedule.scale,
                         state.schedule.offset);
  state.theta += g * (s_new - state.theta);
  state.mu += g * (f_new - state.mu);
  state.n += 1;
}

AlphaSchedule::AlphaSchedule(const Spec& spec) : spec_(spec) {
  if (spec_.kind == Kind::Fixed) {
    if (spec_.alpha < 0) throw ConfigError("AlphaSchedule: alpha must be >= 0");
    return;
  }
  if (spec_.alpha_ref <= 0)
    throw ConfigError("AlphaSchedule: alpha_ref must be positive");
  if (spec_.rho_cap <= 0 || spec_.rho_cap >= 1)
    throw ConfigError("AlphaSchedule: rho_cap must lie in (0, 1)");
  if (spec_.total_budget < 1)
    throw ConfigError("AlphaSchedule: total budget required for warmup kinds");
  if (spec_.leapfrog < 1) throw ConfigError("AlphaSchedule: leapfrog must be >= 1");

  const double n_w = std::min(3000.0, 0.1 * static_cast<double>(spec_.total_budget));
  warmup_iters_ = std::max(1L, static_cast<long>(std::floor(n_w / spec_.leapfrog)));
  // C solves alpha_{K_w} = rho_cap * alpha_ref for alpha_k = k/(C + k/alpha_ref).
  warmup_c_ = static_cast<double>(warmup_iters_) * (1.0 - spec_.rho_cap) /
              (spec_.rho_cap * spec_.alpha_ref);
  window_size_ = std::max(10L, warmup_iters_ / 20);
}

double AlphaSchedule::schedule_value(long k) const {
  if (spec_.kind == Kind::Fixed) return spec_.alpha;
  if (k <= 0) return 0.0;
  const long kk = std::min(k, warmup_iters_);
  return static_cast<double>(kk) /
         (warmup_c_ + static_cast<double>(kk) / spec_.alpha_ref);
}

double AlphaSchedule::value(long k) const {
  if (frozen_ && k >= freeze_at_) return frozen_value_;
  return schedule_value(k);
}

void AlphaSchedule::observe(long k, double monitor) {
  if (spec_.kind != Kind::Guardrail) return;
  if (frozen_ || k >= warmup_iters_) return;  // only while alpha is increasing
  window_.push_back(monitor);
  if (static_cast<long>(window_.size()) < window_size_) return;

  std::vector<double> sorted(window_.begin(), window_.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t q_idx = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(sorted.size()))) - 1;
  const double q95 = sorted[std::min(q_idx, sorted.size() - 1)];
  window_.clear();

  if (q95 > spec_.tau) {
    if (++violating_windows_ >= 2) {
      frozen_ = true;
      frozen_value_ = schedule_value(k);  // last safe value before further growth
      freeze_at_ = k + 1;
    }
  } else {
    violating_windows_ = 0;
  }
}

double AlphaSchedule::step(long k, std::optional<double> monitor) {
  if (spec_.kind == Kind::Guardrail) {
    if (monitor.has_value()) {
      observe(k - 1, *monitor);
    } else if (k > 0 && k - 1 < warmup_iters_ && !frozen_) {
      throw ConfigError("AlphaSchedule: guardrail kind requires the monitor");
    }
  }
  return value(k);
}

}  // namespace srmc
