#pragma once

// Textbook reference kernels, written independently of the library's
// tilted implementations. They consume randomness in the documented
// order (proposal noise first, accept uniform last) so shared-seed
// comparisons against the alpha = 0 kernels are exact.

#include "srmc/targets.hpp"

namespace srmc::test {

inline bool textbook_accept(double log_ratio, RngStream& rng) {
  const double p = std::exp(std::min(log_ratio, 0.0));
  return rng.uniform() < p;
}

inline Vec baseline_mh(const TargetModel& target, const Vec& x, double sigma,
                       RngStream& rng) {
  Vec y = x + sigma * rng.normal_vec(target.dim);
  const double log_ratio =
      target.log_density_unnorm(y) - target.log_density_unnorm(x);
  return textbook_accept(log_ratio, rng) ? y : x;
}

inline Vec baseline_ula(const TargetModel& target, const Vec& x, double eta,
                        RngStream& rng) {
  Vec drift = target.score(x);
  Vec noise = rng.normal_vec(target.dim);
  return x + eta * drift + std::sqrt(2.0 * eta) * 1.0 * noise;
}

inline Vec baseline_mala(const TargetModel& target, const Vec& x, double eta,
                         RngStream& rng) {
  Vec s_x = target.score(x);
  Vec y = x + eta * s_x + std::sqrt(2.0 * eta) * rng.normal_vec(target.dim);
  Vec s_y = target.score(y);
  double log_ratio = target.log_density_unnorm(y) - target.log_density_unnorm(x);
  const double fwd = (y - x - eta * s_x).squaredNorm();
  const double bwd = (x - y - eta * s_y).squaredNorm();
  log_ratio -= (bwd - fwd) / (4.0 * eta);
  return textbook_accept(log_ratio, rng) ? y : x;
}

inline Vec baseline_hmc(const TargetModel& target, const Vec& x, double eta,
                        int leapfrog, RngStream& rng) {
  Vec v0 = rng.normal_vec(target.dim);
  const double h0 = -target.log_density_unnorm(x) + 0.5 * v0.squaredNorm();
  Vec pos = x;
  Vec s_pos = target.score(pos);
  Vec vel = v0;
  for (int step = 0; step < leapfrog; ++step) {
    Vec grad = s_pos;
    vel += 0.5 * eta * grad;
    pos += eta * vel;
    s_pos = target.score(pos);
    grad = s_pos;
    vel += 0.5 * eta * grad;
  }
  vel = -vel;
  const double h1 = -target.log_density_unnorm(pos) + 0.5 * vel.squaredNorm();
  return textbook_accept(h0 - h1, rng) ? pos : x;
}

}  // namespace srmc::test
