#include <cstdint>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "srmc/experiments.hpp"
#include "srmc/verify.hpp"

namespace {

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<int> workers, std::optional<std::string> out) {
  auto cfg = srmc::load_experiment_config(config_path);
  if (seed) cfg.run.base_seed = *seed;
  if (workers) cfg.workers = *workers;
  if (out) cfg.out_dir = *out;
  return srmc::execute_experiment(cfg);
}

int cmd_verify(const std::string& filter, const std::string& json_out) {
  const auto results = srmc::run_verification(filter);
  bool all_pass = true;

  std::cout << std::left << std::setw(34) << "check" << std::setw(8) << "status"
            << std::setw(14) << "residual" << "tolerance\n";
  nlohmann::json report = nlohmann::json::array();
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    std::cout << std::left << std::setw(34) << r.name << std::setw(8)
              << (r.pass ? "pass" : "FAIL") << std::setw(14) << std::scientific
              << std::setprecision(3) << r.residual << r.tolerance << "\n";
    report.push_back({{"name", r.name},
                      {"pass", r.pass},
                      {"residual", r.residual},
                      {"tolerance", r.tolerance},
                      {"detail", r.detail}});
  }
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    out << nlohmann::json{{"all_pass", all_pass}, {"checks", report}}.dump(2) << "\n";
  }
  if (results.empty()) {
    std::cerr << "no checks matched the filter\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"score-repellent Monte Carlo sampler toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, filter, json_out, run_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  bool seed_set = false, workers_set = false, out_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "override the base seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--workers", workers, "parallel worker cap")
        ->each([&](const std::string&) { workers_set = true; });
    sub->add_option("--out", out_dir, "override the output directory")
        ->each([&](const std::string&) { out_set = true; });
  };

  auto* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "JSON config file")->required();
  add_common(run);

  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("--filter", filter, "substring filter on check names");
  verify->add_option("--json", json_out, "write a JSON report here");

  auto* sweep = app.add_subcommand("sweep", "execute a sweep config");
  sweep->add_option("config", config_path, "JSON config file")->required();
  add_common(sweep);

  auto* report = app.add_subcommand("report", "emit metric CSVs for a finished run");
  report->add_option("dir", run_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path,
                     seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt,
                     workers_set ? std::optional<int>(workers) : std::nullopt,
                     out_set ? std::optional<std::string>(out_dir) : std::nullopt);
    if (verify->parsed()) return cmd_verify(filter, json_out);
    if (sweep->parsed()) {
      auto cfg = srmc::load_experiment_config(config_path);
      if (seed_set) cfg.run.base_seed = seed;
      if (workers_set) cfg.workers = workers;
      if (out_set) cfg.out_dir = out_dir;
      if (cfg.kind != srmc::ExperimentConfig::Kind::Sweep && cfg.sweep.empty())
        throw srmc::ConfigError("sweep subcommand requires sweep axes in the config");
      return srmc::execute_sweep(cfg);
    }
    if (report->parsed()) return srmc::write_report(run_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
