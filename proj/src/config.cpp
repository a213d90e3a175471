#include "srmc/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace srmc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError("config field '" + path + "': " + why);
}

const json& field(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing");
  return obj.at(key);
}

double num(const json& obj, const std::string& path, const std::string& key) {
  const json& v = field(obj, path, key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double num_or(const json& obj, const std::string&, const std::string& key, double dflt) {
  return obj.contains(key) ? obj.at(key).get<double>() : dflt;
}

long integer(const json& obj, const std::string& path, const std::string& key) {
  const json& v = field(obj, path, key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<long>();
}

std::string text(const json& obj, const std::string& path, const std::string& key) {
  const json& v = field(obj, path, key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Vec parse_vec(const json& arr, const std::string& path) {
  if (!arr.is_array()) fail(path, "expected an array");
  Vec v(static_cast<int>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
  return v;
}

Mat parse_mat(const json& arr, const std::string& path) {
  if (!arr.is_array() || arr.empty()) fail(path, "expected a nested array");
  const int rows = static_cast<int>(arr.size());
  const int cols = static_cast<int>(arr[0].size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(arr[i].size()) != cols) fail(path, "ragged rows");
    for (int j = 0; j < cols; ++j) m(i, j) = arr[i][j].get<double>();
  }
  return m;
}

TargetModel parse_target(const json& obj, const std::string& path) {
  const std::string kind = text(obj, path, "kind");
  if (kind == "gaussian") {
    GaussianSpec spec;
    spec.mean = parse_vec(field(obj, path, "mean"), path + ".mean");
    spec.covariance = parse_mat(field(obj, path, "cov"), path + ".cov");
    return gaussian_target(spec);
  }
  if (kind == "correlated-gaussian") {
    return gaussian_target(correlated_gaussian_spec(
        static_cast<int>(integer(obj, path, "dim")), num(obj, path, "corr")));
  }
  if (kind == "mixture") {
    MixtureSpec spec;
    for (const auto& w : field(obj, path, "weights")) spec.weights.push_back(w.get<double>());
    for (const auto& c : field(obj, path, "components")) {
      GaussianSpec g;
      g.mean = parse_vec(field(c, path, "mean"), path + ".components.mean");
      if (c.contains("cov")) {
        g.covariance = parse_mat(c.at("cov"), path + ".components.cov");
      } else {
        const double sigma = num(c, path + ".components", "sigma");
        g.covariance = sigma * sigma * Mat::Identity(static_cast<int>(g.mean.size()),
                                                     static_cast<int>(g.mean.size()));
      }
      spec.components.push_back(std::move(g));
    }
    return mixture_target(spec);
  }
  if (kind == "logistic-posterior") {
    LogisticPosteriorSpec spec;
    spec.design = parse_mat(field(obj, path, "design"), path + ".design");
    spec.labels = parse_vec(field(obj, path, "labels"), path + ".labels");
    spec.prior_variance = num_or(obj, path, "prior_variance", 1.0);
    return logistic_posterior_target(spec);
  }
  if (kind == "binary-quadratic") {
    const Vec a = parse_vec(field(obj, path, "linear"), path + ".linear");
    const Mat W = parse_mat(field(obj, path, "quadratic"), path + ".quadratic");
    const std::string mode =
        obj.contains("score_mode") ? obj.at("score_mode").get<std::string>() : "exact";
    return binary_quadratic_target(
        a, W, mode == "proxy" ? DiscreteScoreMode::Proxy : DiscreteScoreMode::Exact);
  }
  fail(path + ".kind", "unknown target kind '" + kind + "'");
}

KernelConfig parse_kernel(const json& obj, const std::string& path) {
  const std::string kind = text(obj, path, "kind");
  if (kind == "mh") {
    MhConfig cfg;
    cfg.step_sigma = num_or(obj, path, "step_sigma", 1.0);
    return cfg;
  }
  if (kind == "ula") {
    UlaConfig cfg;
    cfg.eta = num(obj, path, "eta");
    cfg.noise_scale = num_or(obj, path, "noise_scale", 1.0);
    return cfg;
  }
  if (kind == "mala") {
    MalaConfig cfg;
    cfg.eta = num(obj, path, "eta");
    return cfg;
  }
  if (kind == "hmc") {
    HmcConfig cfg;
    cfg.eta = num(obj, path, "eta");
    cfg.leapfrog = static_cast<int>(integer(obj, path, "leapfrog"));
    if (obj.contains("mass")) cfg.mass = parse_mat(obj.at("mass"), path + ".mass");
    return cfg;
  }
  if (kind == "discrete-gi") {
    DiscreteGiConfig cfg;
    const std::string family = text(obj, path, "family");
    if (family == "locally-balanced") cfg.family = DiscreteGiConfig::Family::LocallyBalanced;
    else if (family == "gwg") cfg.family = DiscreteGiConfig::Family::Gwg;
    else if (family == "dlp") cfg.family = DiscreteGiConfig::Family::Dlp;
    else fail(path + ".family", "unknown proposal family '" + family + "'");
    const std::string g = obj.contains("balancing")
                              ? obj.at("balancing").get<std::string>() : "barker";
    if (g == "barker") cfg.g = Balancing::Barker;
    else if (g == "sqrt") cfg.g = Balancing::Sqrt;
    else if (g == "max") cfg.g = Balancing::Max;
    else fail(path + ".balancing", "unknown balancing function '" + g + "'");
    cfg.tau = num_or(obj, path, "tau", 2.0);
    cfg.eta = num_or(obj, path, "eta", 0.1);
    return cfg;
  }
  if (kind == "independent") return IndependentConfig{};
  fail(path + ".kind", "unknown kernel kind '" + kind + "'");
}

AlphaSchedule::Spec parse_alpha(const json& obj, const std::string& path) {
  AlphaSchedule::Spec spec;
  const std::string kind = text(obj, path, "kind");
  if (kind == "fixed") {
    spec.kind = AlphaSchedule::Kind::Fixed;
    spec.alpha = num(obj, path, "value");
    return spec;
  }
  if (kind == "capped-warmup" || kind == "guardrail") {
    spec.kind = kind == "guardrail" ? AlphaSchedule::Kind::Guardrail
                                    : AlphaSchedule::Kind::CappedWarmup;
    spec.alpha_ref = num(obj, path, "alpha_ref");
    spec.rho_cap = num_or(obj, path, "rho_cap", 0.8);
    spec.tau = num_or(obj, path, "tau", 1.0);
    spec.total_budget = 1;  // driver overwrites from iterations
    return spec;
  }
  fail(path + ".kind", "unknown alpha schedule kind '" + kind + "'");
}

InitSpec parse_init(const json& obj, const std::string& path) {
  InitSpec init;
  const std::string kind = text(obj, path, "kind");
  if (kind == "fixed") {
    init.kind = InitSpec::Kind::FixedPoint;
    init.point = parse_vec(field(obj, path, "point"), path + ".point");
  } else if (kind == "target-draw") {
    init.kind = InitSpec::Kind::TargetDraw;
  } else if (kind == "uniform-box") {
    init.kind = InitSpec::Kind::UniformBox;
    if (obj.contains("low")) {
      init.low = parse_vec(obj.at("low"), path + ".low");
      init.high = parse_vec(field(obj, path, "high"), path + ".high");
    }
  } else {
    fail(path + ".kind", "unknown init kind '" + kind + "'");
  }
  return init;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1)
    fail("schema_version", "missing or unsupported (expected 1)");

  ExperimentConfig cfg;
  const std::string kind = text(doc, "", "kind");
  if (kind == "mse-benchmark") cfg.kind = ExperimentConfig::Kind::MseBenchmark;
  else if (kind == "metastability-vignette") cfg.kind = ExperimentConfig::Kind::MetastabilityVignette;
  else if (kind == "mode-coverage") cfg.kind = ExperimentConfig::Kind::ModeCoverage;
  else if (kind == "theory-verify") cfg.kind = ExperimentConfig::Kind::TheoryVerify;
  else if (kind == "sweep") cfg.kind = ExperimentConfig::Kind::Sweep;
  else fail("kind", "unknown experiment kind '" + kind + "'");

  cfg.out_dir = doc.contains("out_dir") ? doc["out_dir"].get<std::string>() : "runs/out";
  cfg.replicas = doc.contains("replicas") ? doc["replicas"].get<int>() : 1;
  cfg.workers = doc.contains("workers") ? doc["workers"].get<int>() : 1;
  if (cfg.replicas < 1) fail("replicas", "must be >= 1");

  RunConfig& run = cfg.run;
  run.target = parse_target(field(doc, "", "target"), "target");
  run.kernel = parse_kernel(field(doc, "", "kernel"), "kernel");
  run.alpha = parse_alpha(field(doc, "", "alpha"), "alpha");

  if (doc.contains("history")) {
    const json& h = doc["history"];
    run.history.rho = num_or(h, "history", "rho", 0.6);
    run.history.scale = num_or(h, "history", "scale", 1.0);
    run.history.offset = h.contains("offset") ? h["offset"].get<long>() : 1;
  }
  if (doc.contains("hvp")) {
    const json& h = doc["hvp"];
    const std::string mode = text(h, "hvp", "mode");
    if (mode == "analytic") run.hvp = {HvpScheme::Analytic, 0.0};
    else if (mode == "forward") run.hvp = {HvpScheme::Forward, num_or(h, "hvp", "eps", 1e-3)};
    else if (mode == "central") run.hvp = {HvpScheme::Central, num_or(h, "hvp", "eps", 1e-3)};
    else fail("hvp.mode", "unknown hvp mode '" + mode + "'");
  } else {
    double a = run.alpha.kind == AlphaSchedule::Kind::Fixed ? run.alpha.alpha
                                                            : run.alpha.alpha_ref;
    run.hvp = default_hvp(run.target, a);
  }

  run.iterations = integer(doc, "", "iterations");
  if (run.iterations < 1) fail("iterations", "must be >= 1");
  run.burn_in_fraction = num_or(doc, "", "burn_in", 0.0);
  run.record_stride = doc.contains("record_stride") ? doc["record_stride"].get<long>() : 0;
  run.chains = doc.contains("chains") ? doc["chains"].get<int>() : 1;
  run.base_seed = doc.contains("seed") ? doc["seed"].get<std::uint64_t>() : 0;

  const std::string cost = doc.contains("cost_model")
                               ? doc["cost_model"].get<std::string>() : "measured";
  if (cost == "baseline-d") run.cost_model = CostModel::BaselineD;
  else if (cost == "srmc-3d") run.cost_model = CostModel::Srmc3d;
  else if (cost == "measured") run.cost_model = CostModel::Measured;
  else fail("cost_model", "unknown cost model '" + cost + "'");

  run.init = doc.contains("init") ? parse_init(doc["init"], "init")
                                  : InitSpec{InitSpec::Kind::TargetDraw, {}, {}, {}};

  if (doc.contains("ground_truth_mean"))
    cfg.ground_truth_mean = parse_vec(doc["ground_truth_mean"], "ground_truth_mean");
  if (doc.contains("mode_centers"))
    for (const auto& c : doc["mode_centers"])
      cfg.mode_centers.push_back(parse_vec(c, "mode_centers"));
  cfg.basin_threshold = num_or(doc, "", "basin_threshold", 1.0);

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    if (s.contains("alpha"))
      for (const auto& v : s["alpha"]) cfg.sweep.alpha.push_back(v.get<double>());
    if (s.contains("rho"))
      for (const auto& v : s["rho"]) cfg.sweep.rho.push_back(v.get<double>());
    if (s.contains("eps"))
      for (const auto& v : s["eps"]) cfg.sweep.eps.push_back(v.get<double>());
    if (s.contains("kernel"))
      for (const auto& v : s["kernel"]) cfg.sweep.kernel.push_back(v.get<std::string>());
  }
  if (cfg.kind == ExperimentConfig::Kind::Sweep && cfg.sweep.empty())
    fail("sweep", "sweep experiment requires at least one non-empty axis");

  cfg.run.validate();
  cfg.resolved_json = doc.dump(2);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

}  // namespace srmc
