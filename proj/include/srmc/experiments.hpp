#pragma once

#include "srmc/config.hpp"

namespace srmc {

/// Executes a parsed experiment: writes config.resolved.json, chain
/// JSONL files, summary.json and the kind's metric CSVs under out_dir.
/// Returns a process exit status (0 = success).
int execute_experiment(const ExperimentConfig& cfg);

/// Cartesian product of the sweep axes times the replica count, one full
/// run per cell, aggregated into sweep.csv (mean and 95% CI per cell).
int execute_sweep(const ExperimentConfig& cfg);

/// Re-derives a per-row metric CSV (step- and budget-indexed) from the
/// emitted JSONL files of a finished run directory.
int write_report(const std::string& run_dir);

}  // namespace srmc
