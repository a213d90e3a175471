#include "srmc/run_io.hpp"

#include <fstream>

#include <json.hpp>

namespace srmc {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json row_to_json(const RecordRow& row) {
  return json{{"n", row.n},
              {"theta", vec_to_json(row.theta)},
              {"mu", vec_to_json(row.mu)},
              {"accepted", row.accepted},
              {"grad_evals", row.cum_grad_evals},
              {"alpha", row.alpha},
              {"state", vec_to_json(row.state)},
              {"running_mean", vec_to_json(row.running_mean)}};
}

json summary_json(const RunRecord& rec) {
  return json{{"chain", rec.chain_index},
              {"seed", rec.seed},
              {"final_theta", vec_to_json(rec.final_theta)},
              {"final_mu", vec_to_json(rec.final_mu)},
              {"final_running_mean", vec_to_json(rec.final_running_mean)},
              {"mean_acceptance", rec.mean_acceptance},
              {"total_grad_evals", rec.total_grad_evals},
              {"iterations_run", rec.iterations_run},
              {"wall_seconds", rec.wall_seconds},
              {"aborted", rec.aborted},
              {"fault", rec.fault_message},
              {"hvp_mode", rec.hvp_mode}};
}

}  // namespace

std::string record_row_json(const RecordRow& row) { return row_to_json(row).dump(); }

void write_chain_jsonl(const std::filesystem::path& dir, const RunRecord& record) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / ("chain-" + std::to_string(record.chain_index) + ".jsonl"));
  if (!out) throw ConfigError("write_chain_jsonl: cannot open output file");
  for (const auto& row : record.rows) out << row_to_json(row).dump() << "\n";
}

void write_summary(const std::filesystem::path& dir,
                   const std::vector<RunRecord>& records,
                   const std::string& config_json, const std::string& extra_json) {
  std::filesystem::create_directories(dir);
  json chains = json::array();
  for (const auto& rec : records) chains.push_back(summary_json(rec));
  json doc{{"chains", chains}};
  if (!config_json.empty()) doc["config"] = json::parse(config_json);
  if (!extra_json.empty()) doc["metrics"] = json::parse(extra_json);
  std::ofstream out(dir / "summary.json");
  if (!out) throw ConfigError("write_summary: cannot open output file");
  out << doc.dump(2) << "\n";
}

std::string record_bytes(const RunRecord& record) {
  std::string all;
  for (const auto& row : record.rows) {
    all += record_row_json(row);
    all += '\n';
  }
  return all;
}

}  // namespace srmc
