#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srmc/history.hpp"
#include "srmc/kernels.hpp"

namespace srmc {

enum class CostModel { BaselineD, Srmc3d, Measured };

struct InitSpec {
  enum class Kind { FixedPoint, TargetDraw, UniformBox };
  Kind kind = Kind::TargetDraw;
  Vec point;      // FixedPoint
  Vec low, high;  // UniformBox
};

/// Test function f feeding the running estimator mu; default identity.
struct TestFunction {
  std::string name = "identity";
  int out_dim = 0;  // 0 = follow target dimension (identity)
  std::function<Vec(const Vec&)> fn;
};

struct RunConfig {
  TargetModel target;
  KernelConfig kernel;
  AlphaSchedule::Spec alpha;
  StepSchedule history;
  Vec theta0;  // empty = zero
  Vec mu0;     // empty = zero
  TestFunction f;
  long iterations = 1000;
  double burn_in_fraction = 0.0;
  long record_stride = 0;  // 0 = record only the terminal row
  int chains = 1;
  std::uint64_t base_seed = 0;
  CostModel cost_model = CostModel::Measured;
  InitSpec init;
  HvpConfig hvp{HvpScheme::Analytic, 0.0};
  bool identical_chain_seeds = false;  // test hook

  void validate() const;
  int theta_dim() const { return target.dim; }
  int mu_dim() const;
  long alpha_budget() const;  // iterations, or leapfrog gradients for HMC
  int alpha_leapfrog() const;
};

struct RecordRow {
  long n;
  Vec theta;
  Vec mu;
  Vec state;
  Vec running_mean;  // post-burn plain sample mean
  bool accepted;
  long cum_grad_evals;
  double alpha;
};

struct RunRecord {
  int chain_index = 0;
  std::uint64_t seed = 0;
  std::vector<RecordRow> rows;

  Vec final_theta, final_mu, final_running_mean;
  double mean_acceptance = 0;
  long total_grad_evals = 0;
  long iterations_run = 0;
  double wall_seconds = 0;
  bool aborted = false;
  std::string fault_message;
  std::string hvp_mode;
};

/// Runs one chain of the outer loop: per iteration, emit alpha, build the
/// surrogate around the current history, take one kernel step, then
/// update (theta, mu) with the score and test value at the realized
/// state. Kernel faults abort the chain; the partial record is returned
/// with the diagnostic attached.
RunRecord run_chain(const RunConfig& cfg, int chain_index);

/// Independent chains with derived seeds (base xor index); executes on
/// up to `workers` threads. No state is shared between chains.
std::vector<RunRecord> run_chains(const RunConfig& cfg, int workers = 1);

/// Exact draw from pi_theta = N(mean + alpha theta, V); Gaussian bases only.
Vec independent_surrogate_step(const TiltedSurrogate& sur, RngStream& rng);

/// Cost charged per iteration under a model: d (baseline), 3d (tilted
/// gradient kernels), or the measured gradient evaluations.
long cost_per_iteration(CostModel model, int dim, long measured);

std::string hvp_mode_label(const HvpConfig& cfg);

}  // namespace srmc
