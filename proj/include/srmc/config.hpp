#pragma once

#include <map>
#include <string>

#include "srmc/driver.hpp"

namespace srmc {

/// Full experiment description parsed from a JSON config file.
///
/// Schema (schema_version 1):
///   kind: mse-benchmark | metastability-vignette | mode-coverage |
///         theory-verify | sweep
///   out_dir, replicas, seed, workers
///   target:  {kind: gaussian | correlated-gaussian | mixture |
///             logistic-posterior | binary-quadratic, ...}
///   kernel:  {kind: mh | ula | mala | hmc | discrete-gi | independent, ...}
///   alpha:   {kind: fixed | capped-warmup | guardrail, ...}
///   history: {rho, scale, offset}
///   hvp:     {mode: analytic | forward | central, eps}
///   iterations, burn_in, record_stride, chains, init, cost_model
///   mode_centers (mode-coverage), basin_threshold (vignette)
///   sweep: {alpha: [...], rho: [...], eps: [...], kernel: [...]}
struct ExperimentConfig {
  enum class Kind {
    MseBenchmark,
    MetastabilityVignette,
    ModeCoverage,
    TheoryVerify,
    Sweep
  };

  Kind kind = Kind::MseBenchmark;
  RunConfig run;
  std::string out_dir = "runs/out";
  int replicas = 1;
  int workers = 1;
  Vec ground_truth_mean;  // external reference (e.g. long-run posterior mean)
  std::vector<Vec> mode_centers;
  double basin_threshold = 1.0;  // first coordinate beyond this = basin entry

  struct SweepAxes {
    std::vector<double> alpha;
    std::vector<double> rho;
    std::vector<double> eps;
    std::vector<std::string> kernel;
    bool empty() const {
      return alpha.empty() && rho.empty() && eps.empty() && kernel.empty();
    }
  } sweep;

  std::string resolved_json;  // canonical form written next to outputs
};

/// Parses a config document; throws ConfigError with a field-path
/// diagnostic on malformed input.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace srmc
