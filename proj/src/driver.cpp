#include "srmc/driver.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace srmc {

int RunConfig::mu_dim() const {
  if (f.fn) return f.out_dim > 0 ? f.out_dim : target.dim;
  return target.dim;  // identity default
}

int RunConfig::alpha_leapfrog() const {
  if (const auto* hmc = std::get_if<HmcConfig>(&kernel)) return hmc->leapfrog;
  return 1;
}

long RunConfig::alpha_budget() const {
  // Warmup lengths are stated in gradient evaluations for leapfrog
  // samplers and iterations otherwise.
  return iterations * alpha_leapfrog();
}

void RunConfig::validate() const {
  if (iterations < 1) throw ConfigError("RunConfig: iterations must be >= 1");
  if (burn_in_fraction < 0 || burn_in_fraction >= 1)
    throw ConfigError("RunConfig: burn-in fraction must lie in [0, 1)");
  if (chains < 1) throw ConfigError("RunConfig: chain count must be >= 1");
  if (theta0.size() != 0 && theta0.size() != target.dim)
    throw ConfigError("RunConfig: theta0 dimension mismatch");
  if (init.kind == InitSpec::Kind::FixedPoint && init.point.size() != target.dim)
    throw ConfigError("RunConfig: init point dimension mismatch");
  if (init.kind == InitSpec::Kind::UniformBox &&
      (init.low.size() != target.dim || init.high.size() != target.dim))
    throw ConfigError("RunConfig: init box dimension mismatch");
  if (init.kind == InitSpec::Kind::TargetDraw && !target.has_sampler())
    throw ConfigError("RunConfig: target-draw init needs an exactly samplable target");
}

Vec independent_surrogate_step(const TiltedSurrogate& sur, RngStream& rng) {
  if (!sur.base->gaussian.has_value())
    throw ConfigError("independent_surrogate_step: Gaussian base required");
  const GaussianInfo& g = *sur.base->gaussian;
  return g.mean + sur.alpha * sur.theta + g.chol * rng.normal_vec(sur.base->dim);
}

long cost_per_iteration(CostModel model, int dim, long measured) {
  switch (model) {
    case CostModel::BaselineD: return dim;
    case CostModel::Srmc3d: return 3L * dim;
    case CostModel::Measured: return measured;
  }
  return measured;
}

std::string hvp_mode_label(const HvpConfig& cfg) {
  switch (cfg.scheme) {
    case HvpScheme::Analytic: return "analytic";
    case HvpScheme::Forward: return "forward-difference(eps=" + std::to_string(cfg.eps) + ")";
    case HvpScheme::Central: return "central-difference(eps=" + std::to_string(cfg.eps) + ")";
  }
  return "unknown";
}

namespace {

Vec initial_state(const RunConfig& cfg, RngStream& rng) {
  switch (cfg.init.kind) {
    case InitSpec::Kind::FixedPoint:
      return cfg.init.point;
    case InitSpec::Kind::TargetDraw:
      return cfg.target.exact_sampler(rng);
    case InitSpec::Kind::UniformBox: {
      Vec x(cfg.target.dim);
      for (int i = 0; i < cfg.target.dim; ++i) {
        double u = rng.uniform();
        if (cfg.target.domain == Domain::DiscreteConfiguration) {
          x[i] = std::floor(u * (cfg.target.max_coord + 1));
        } else {
          x[i] = cfg.init.low[i] + u * (cfg.init.high[i] - cfg.init.low[i]);
        }
      }
      return x;
    }
  }
  throw ConfigError("initial_state: unknown init kind");
}

KernelOutcome dispatch_step(const RunConfig& cfg, const TiltedSurrogate& sur,
                            const Vec& x, RngStream& rng, const Vec& cached_score) {
  return std::visit(
      [&](const auto& k) -> KernelOutcome {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MhConfig>) {
          return mh_step(sur, x, k, rng, &cached_score);
        } else if constexpr (std::is_same_v<T, UlaConfig>) {
          return ula_step(sur, x, k, rng, &cached_score);
        } else if constexpr (std::is_same_v<T, MalaConfig>) {
          return mala_step(sur, x, k, rng, &cached_score);
        } else if constexpr (std::is_same_v<T, HmcConfig>) {
          return hmc_step(sur, x, k, rng, &cached_score);
        } else if constexpr (std::is_same_v<T, DiscreteGiConfig>) {
          return discrete_gi_step(sur, x, k, rng, &cached_score);
        } else {
          KernelOutcome out;
          out.next_state = independent_surrogate_step(sur, rng);
          out.proposal = out.next_state;
          out.accepted = true;
          out.score_at_next = cfg.target.score(out.next_state);
          out.grad_evals = 1;
          return out;
        }
      },
      cfg.kernel);
}

}  // namespace

RunRecord run_chain(const RunConfig& cfg, int chain_index) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.chain_index = chain_index;
  rec.seed = cfg.identical_chain_seeds
                 ? cfg.base_seed
                 : RngStream::chain_seed(cfg.base_seed, static_cast<unsigned>(chain_index));
  rec.hvp_mode = hvp_mode_label(cfg.hvp);
  RngStream rng(rec.seed);

  const int d = cfg.theta_dim();
  const int m = cfg.mu_dim();
  std::function<Vec(const Vec&)> test_fn =
      cfg.f.fn ? cfg.f.fn : std::function<Vec(const Vec&)>([](const Vec& x) { return x; });

  HistoryState hist;
  hist.theta = cfg.theta0.size() ? cfg.theta0 : Vec::Zero(d);
  hist.mu = cfg.mu0.size() ? cfg.mu0 : Vec::Zero(m);
  hist.schedule = cfg.history;

  AlphaSchedule::Spec alpha_spec = cfg.alpha;
  if (alpha_spec.kind != AlphaSchedule::Kind::Fixed) {
    alpha_spec.total_budget = cfg.alpha_budget();
    alpha_spec.leapfrog = cfg.alpha_leapfrog();
  }
  AlphaSchedule alpha_sched(alpha_spec);

  Vec x = initial_state(cfg, rng);
  Vec score_x = cfg.target.score(x);

  const long burn = static_cast<long>(std::floor(cfg.burn_in_fraction *
                                                 static_cast<double>(cfg.iterations)));
  Vec mean_acc = Vec::Zero(d);
  long mean_count = 0;
  long accepted_count = 0;
  long cum_grad = 0;

  auto record_row = [&](long n, bool accepted, double alpha_val) {
    rec.rows.push_back({n, hist.theta, hist.mu, x,
                        mean_count ? Vec(mean_acc / static_cast<double>(mean_count))
                                   : Vec(Vec::Zero(d)),
                        accepted, cum_grad, alpha_val});
  };

  long n = 0;
  try {
    for (; n < cfg.iterations; ++n) {
      const double alpha_n = alpha_sched.value(n);
      TiltedSurrogate sur(cfg.target, hist.theta, alpha_n, cfg.hvp);
      KernelOutcome out = dispatch_step(cfg, sur, x, rng, score_x);

      // Guardrail monitor: pre-update theta against the realized score.
      alpha_sched.observe(n, alpha_n * std::abs(out.score_at_next.dot(hist.theta)));

      update_history(hist, out.score_at_next, test_fn(out.next_state));
      x = out.next_state;
      score_x = out.score_at_next;
      cum_grad += out.grad_evals;
      if (out.accepted) ++accepted_count;
      if (n >= burn) {
        mean_acc += x;
        ++mean_count;
      }
      if ((cfg.record_stride > 0 && n % cfg.record_stride == 0) ||
          n + 1 == cfg.iterations)
        record_row(n + 1, out.accepted, alpha_n);
    }
  } catch (const KernelFault& fault) {
    rec.aborted = true;
    rec.fault_message = fault.what();
    record_row(n + 1, false, alpha_sched.value(n));
  }

  rec.iterations_run = rec.aborted ? n : cfg.iterations;
  rec.final_theta = hist.theta;
  rec.final_mu = hist.mu;
  rec.final_running_mean =
      mean_count ? Vec(mean_acc / static_cast<double>(mean_count)) : Vec(Vec::Zero(d));
  rec.mean_acceptance = rec.iterations_run
                            ? static_cast<double>(accepted_count) /
                                  static_cast<double>(rec.iterations_run)
                            : 0.0;
  rec.total_grad_evals = cum_grad;
  rec.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<RunRecord> run_chains(const RunConfig& cfg, int workers) {
  cfg.validate();
  std::vector<RunRecord> records(static_cast<std::size_t>(cfg.chains));
  const int n_workers = std::max(1, std::min(workers, cfg.chains));

  if (n_workers == 1) {
    for (int c = 0; c < cfg.chains; ++c) records[static_cast<std::size_t>(c)] = run_chain(cfg, c);
    return records;
  }

  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= cfg.chains) return;
      records[static_cast<std::size_t>(c)] = run_chain(cfg, c);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return records;
}

}  // namespace srmc
