#include "srmc/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "srmc/analysis.hpp"
#include "srmc/metrics.hpp"
#include "srmc/run_io.hpp"

namespace srmc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct MeanCi {
  double mean = 0, lo = 0, hi = 0;
};

MeanCi mean_ci(const std::vector<double>& xs) {
  MeanCi out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() < 2) {
    out.lo = out.hi = out.mean;
    return out;
  }
  double var = 0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  var /= (n - 1.0);
  const double half = 1.96 * std::sqrt(var / n);
  out.lo = out.mean - half;
  out.hi = out.mean + half;
  return out;
}

Vec ground_truth(const ExperimentConfig& cfg) {
  if (cfg.ground_truth_mean.size()) return cfg.ground_truth_mean;
  if (cfg.run.target.ground_truth_mean) return *cfg.run.target.ground_truth_mean;
  throw ConfigError("experiment needs a ground-truth mean (target or config)");
}

RunConfig replica_config(const ExperimentConfig& cfg, int replica) {
  RunConfig run = cfg.run;
  // decorrelate replicas while keeping chain derivation intact
  run.base_seed = cfg.run.base_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(replica);
  return run;
}

void write_resolved(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / "config.resolved.json");
  out << cfg.resolved_json << "\n";
}

void emit_records(const std::string& dir, const std::vector<RunRecord>& records,
                  const ExperimentConfig& cfg, const std::string& metrics_json = "") {
  for (const auto& rec : records) write_chain_jsonl(dir, rec);
  write_summary(dir, records, cfg.resolved_json, metrics_json);
}

int run_mse_benchmark(const ExperimentConfig& cfg) {
  write_resolved(cfg);
  const Vec mu_star = ground_truth(cfg);
  const int dim = cfg.run.target.dim;

  // per recorded step: MSE across replicas (chain 0 of each replica)
  std::vector<std::vector<double>> mse_rows;  // [row][replica]
  std::vector<long> steps;
  std::vector<long> budgets;

  for (int r = 0; r < cfg.replicas; ++r) {
    auto records = run_chains(replica_config(cfg, r), cfg.workers);
    const std::string dir = cfg.replicas > 1
                                ? cfg.out_dir + "/replica-" + std::to_string(r)
                                : cfg.out_dir;
    emit_records(dir, records, cfg);

    const RunRecord& rec = records.front();
    if (r == 0) {
      mse_rows.resize(rec.rows.size());
      for (const auto& row : rec.rows) {
        steps.push_back(row.n);
        budgets.push_back(cfg.run.cost_model == CostModel::Measured
                              ? row.cum_grad_evals
                              : cost_per_iteration(cfg.run.cost_model, dim, 0) * row.n);
      }
    }
    for (std::size_t i = 0; i < rec.rows.size() && i < mse_rows.size(); ++i)
      mse_rows[i].push_back((rec.rows[i].running_mean - mu_star).squaredNorm());
  }

  std::ofstream csv(fs::path(cfg.out_dir) / "mse.csv");
  csv << "step,budget,mse_mean,mse_lo,mse_hi\n";
  for (std::size_t i = 0; i < mse_rows.size(); ++i) {
    const MeanCi ci = mean_ci(mse_rows[i]);
    csv << steps[i] << "," << budgets[i] << "," << ci.mean << "," << ci.lo << ","
        << ci.hi << "\n";
  }
  return 0;
}

int run_metastability(const ExperimentConfig& cfg) {
  write_resolved(cfg);
  long entered = 0;
  std::ofstream csv(fs::path(cfg.out_dir) / "basin_entry.csv");
  csv << "replica,first_entry_step\n";
  for (int r = 0; r < cfg.replicas; ++r) {
    auto records = run_chains(replica_config(cfg, r), cfg.workers);
    const std::string dir = cfg.replicas > 1
                                ? cfg.out_dir + "/replica-" + std::to_string(r)
                                : cfg.out_dir;
    emit_records(dir, records, cfg);
    long first = -1;
    for (const auto& row : records.front().rows)
      if (row.state[0] > cfg.basin_threshold) {
        first = row.n;
        break;
      }
    if (first >= 0) ++entered;
    csv << r << "," << first << "\n";
  }
  std::cout << "basin entries: " << entered << "/" << cfg.replicas << "\n";
  return 0;
}

int run_mode_coverage(const ExperimentConfig& cfg) {
  write_resolved(cfg);
  if (cfg.mode_centers.empty())
    throw ConfigError("mode-coverage experiment requires mode_centers");

  std::vector<std::vector<double>> coverage_rows;
  std::vector<long> steps;
  for (int r = 0; r < cfg.replicas; ++r) {
    auto records = run_chains(replica_config(cfg, r), cfg.workers);
    const std::string dir = cfg.replicas > 1
                                ? cfg.out_dir + "/replica-" + std::to_string(r)
                                : cfg.out_dir;
    emit_records(dir, records, cfg);

    std::vector<std::vector<Vec>> per_chain;
    for (const auto& rec : records) {
      std::vector<Vec> states;
      states.reserve(rec.rows.size());
      for (const auto& row : rec.rows) states.push_back(row.state);
      per_chain.push_back(std::move(states));
    }
    const auto coverage = mode_coverage(per_chain, cfg.mode_centers);
    if (r == 0) {
      coverage_rows.resize(coverage.size());
      for (const auto& row : records.front().rows) steps.push_back(row.n);
    }
    for (std::size_t i = 0; i < coverage.size() && i < coverage_rows.size(); ++i)
      coverage_rows[i].push_back(static_cast<double>(coverage[i]));
  }

  std::ofstream csv(fs::path(cfg.out_dir) / "coverage.csv");
  csv << "step,coverage_mean,coverage_lo,coverage_hi\n";
  for (std::size_t i = 0; i < coverage_rows.size(); ++i) {
    const MeanCi ci = mean_ci(coverage_rows[i]);
    csv << steps[i] << "," << ci.mean << "," << ci.lo << "," << ci.hi << "\n";
  }
  return 0;
}

int run_theory_verify(const ExperimentConfig& cfg) {
  write_resolved(cfg);
  if (!cfg.run.target.gaussian)
    throw ConfigError("theory-verify experiment requires a Gaussian target");
  const GaussianInfo& g = *cfg.run.target.gaussian;
  const int d = cfg.run.target.dim;

  // Empirical covariance of sqrt(n) theta_n across replicas vs theory.
  std::vector<Vec> thetas, means;
  for (int r = 0; r < cfg.replicas; ++r) {
    auto records = run_chains(replica_config(cfg, r), 1);
    thetas.push_back(records.front().final_theta);
    means.push_back(records.front().final_running_mean);
  }
  const double n = static_cast<double>(cfg.run.iterations);
  auto covariance = [](const std::vector<Vec>& xs, double scale) {
    const int dim = static_cast<int>(xs.front().size());
    Vec mean = Vec::Zero(dim);
    for (const auto& x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    Mat cov = Mat::Zero(dim, dim);
    for (const auto& x : xs) {
      Vec r = x - mean;
      cov += scale * r * r.transpose();
    }
    return Mat(cov / static_cast<double>(xs.size() - 1));
  };
  const Mat emp_theta = covariance(thetas, n);
  const Mat emp_mean = covariance(means, n);

  MomentInputs inp;
  Eigen::LLT<Mat> llt(g.cov);
  inp.S = llt.solve(Mat::Identity(d, d));
  inp.C = -Mat::Identity(d, d);
  inp.Vf = g.cov;
  inp.alpha = cfg.run.alpha.alpha;
  inp.rho_is_one = cfg.run.history.rho == 1.0;
  const auto blocks = closed_form_blocks_independent(inp);
  const Mat pred_mean = gaussian_mean_covariance(g.cov, blocks.theta_theta);

  json report{
      {"alpha", inp.alpha},
      {"replicas", cfg.replicas},
      {"theta_cov_rel_error",
       (emp_theta - blocks.theta_theta).norm() / blocks.theta_theta.norm()},
      {"mean_cov_rel_error", (emp_mean - pred_mean).norm() / pred_mean.norm()},
      {"theta_cov_pred_fro", blocks.theta_theta.norm()},
      {"theta_cov_emp_fro", emp_theta.norm()}};
  std::ofstream out(fs::path(cfg.out_dir) / "theory_report.json");
  out << report.dump(2) << "\n";
  std::cout << report.dump(2) << "\n";
  return 0;
}

void apply_kernel_name(RunConfig& run, const std::string& name) {
  if (name == "mh") run.kernel = MhConfig{0.5};
  else if (name == "ula") run.kernel = UlaConfig{std::holds_alternative<UlaConfig>(run.kernel) ? std::get<UlaConfig>(run.kernel).eta : 0.01, 1.0};
  else if (name == "mala") run.kernel = MalaConfig{std::holds_alternative<MalaConfig>(run.kernel) ? std::get<MalaConfig>(run.kernel).eta : 0.01};
  else if (name == "hmc") run.kernel = std::holds_alternative<HmcConfig>(run.kernel) ? run.kernel : KernelConfig(HmcConfig{0.2, 10, {}});
  else throw ConfigError("sweep kernel axis: unknown kernel '" + name + "'");
}

}  // namespace

int execute_sweep(const ExperimentConfig& cfg) {
  write_resolved(cfg);
  const Vec mu_star = ground_truth(cfg);

  auto axis_or_unit = [](const std::vector<double>& v) {
    return v.empty() ? std::vector<double>{std::nan("")} : v;
  };
  const auto alphas = axis_or_unit(cfg.sweep.alpha);
  const auto rhos = axis_or_unit(cfg.sweep.rho);
  const auto epss = axis_or_unit(cfg.sweep.eps);
  const auto kernels = cfg.sweep.kernel.empty() ? std::vector<std::string>{""}
                                                : cfg.sweep.kernel;

  std::ofstream csv(fs::path(cfg.out_dir) / "sweep.csv");
  csv << "kernel,alpha,rho,eps,runs,terminal_mse_mean,terminal_mse_lo,"
         "terminal_mse_hi,mean_acceptance\n";

  int cell = 0;
  for (const auto& kname : kernels)
    for (double a : alphas)
      for (double rho : rhos)
        for (double eps : epss) {
          ExperimentConfig cell_cfg = cfg;
          RunConfig& run = cell_cfg.run;
          if (!kname.empty()) apply_kernel_name(run, kname);
          if (!std::isnan(a)) {
            run.alpha.kind = AlphaSchedule::Kind::Fixed;
            run.alpha.alpha = a;
          }
          if (!std::isnan(rho)) run.history.rho = rho;
          if (!std::isnan(eps)) {
            run.hvp.scheme = HvpScheme::Forward;
            run.hvp.eps = eps;
          }

          std::vector<double> terminal_mse;
          std::vector<double> acceptance;
          for (int r = 0; r < cfg.replicas; ++r) {
            RunConfig rc = replica_config(cell_cfg, r);
            rc.base_seed += 7919ULL * static_cast<std::uint64_t>(cell);
            auto records = run_chains(rc, cfg.workers);
            const std::string dir = cfg.out_dir + "/cell-" + std::to_string(cell) +
                                    "/replica-" + std::to_string(r);
            emit_records(dir, records, cell_cfg);
            terminal_mse.push_back(
                (records.front().final_running_mean - mu_star).squaredNorm());
            acceptance.push_back(records.front().mean_acceptance);
          }
          const MeanCi mse = mean_ci(terminal_mse);
          const MeanCi acc = mean_ci(acceptance);
          csv << (kname.empty() ? "base" : kname) << "," << a << "," << rho << ","
              << eps << "," << cfg.replicas << "," << mse.mean << "," << mse.lo
              << "," << mse.hi << "," << acc.mean << "\n";
          ++cell;
        }
  return 0;
}

int execute_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentConfig::Kind::MseBenchmark: return run_mse_benchmark(cfg);
    case ExperimentConfig::Kind::MetastabilityVignette: return run_metastability(cfg);
    case ExperimentConfig::Kind::ModeCoverage: return run_mode_coverage(cfg);
    case ExperimentConfig::Kind::TheoryVerify: return run_theory_verify(cfg);
    case ExperimentConfig::Kind::Sweep: return execute_sweep(cfg);
  }
  return 1;
}

int write_report(const std::string& run_dir) {
  const fs::path dir(run_dir);
  if (!fs::exists(dir / "summary.json"))
    throw ConfigError("report: no summary.json under " + run_dir);

  json summary;
  {
    std::ifstream in(dir / "summary.json");
    in >> summary;
  }
  Vec mu_star;
  if (summary.contains("config") && summary["config"].contains("ground_truth_mean")) {
    const auto& arr = summary["config"]["ground_truth_mean"];
    mu_star.resize(static_cast<int>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) mu_star[static_cast<int>(i)] = arr[i].get<double>();
  }

  std::ofstream csv(dir / "report.csv");
  csv << "chain,step,budget,alpha,accepted,mse\n";
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("chain-", 0) != 0 || entry.path().extension() != ".jsonl") continue;
    const int chain = std::stoi(name.substr(6, name.size() - 6 - 6));
    std::ifstream in(entry.path());
    std::string line;
    while (std::getline(in, line)) {
      const json row = json::parse(line);
      double mse = std::nan("");
      if (mu_star.size() && row.contains("running_mean")) {
        Vec rm(mu_star.size());
        for (int i = 0; i < mu_star.size(); ++i) rm[i] = row["running_mean"][static_cast<std::size_t>(i)].get<double>();
        mse = (rm - mu_star).squaredNorm();
      }
      csv << chain << "," << row["n"].get<long>() << ","
          << row["grad_evals"].get<long>() << "," << row["alpha"].get<double>()
          << "," << (row["accepted"].get<bool>() ? 1 : 0) << "," << mse << "\n";
    }
  }
  return 0;
}

}  // namespace srmc
