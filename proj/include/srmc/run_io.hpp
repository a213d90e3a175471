#pragma once

#include <filesystem>
#include <string>

#include "srmc/driver.hpp"

namespace srmc {

/// One JSONL line per recorded row:
///   {"n":..,"theta":[..],"mu":[..],"accepted":..,"grad_evals":..,"alpha":..,
///    "state":[..],"running_mean":[..]}
std::string record_row_json(const RecordRow& row);

/// Writes <dir>/chain-<k>.jsonl for one chain.
void write_chain_jsonl(const std::filesystem::path& dir, const RunRecord& record);

/// Writes <dir>/summary.json covering all chains (terminal summaries and
/// run metadata).
void write_summary(const std::filesystem::path& dir,
                   const std::vector<RunRecord>& records,
                   const std::string& config_json, const std::string& extra_json = "");

/// Serializes every row of a record; used by byte-identity checks.
std::string record_bytes(const RunRecord& record);

}  // namespace srmc
