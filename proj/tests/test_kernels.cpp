#include <doctest.h>

#include "baselines.hpp"

#include "srmc/history.hpp"
#include "srmc/kernels.hpp"
#include "srmc/verify.hpp"
#include "test_util.hpp"

using namespace srmc;

namespace {

TargetModel standard_gaussian(int d) {
  return gaussian_target({Vec::Zero(d), Mat::Identity(d, d)});
}

TiltedSurrogate untilted(const TargetModel& target) {
  return TiltedSurrogate(target, Vec::Zero(target.dim), 0.0,
                         {HvpScheme::Forward, 1e-3});
}

TargetModel random_binary_target(int d, std::uint64_t seed, double scale = 0.8) {
  RngStream rng(seed);
  std::vector<double> table(1UL << d);
  for (auto& v : table) v = scale * rng.normal();
  return binary_table_target(table, d);
}

}  // namespace

TEST_CASE("mh with zero theta matches textbook mh step for step") {
  auto target = standard_gaussian(3);
  auto sur = untilted(target);
  RngStream rng_a(99), rng_b(99);
  Vec x = Vec::Ones(3);
  for (int n = 0; n < 1000; ++n) {
    auto out = mh_step(sur, x, {0.8}, rng_a);
    Vec ref = test::baseline_mh(target, x, 0.8, rng_b);
    REQUIRE(out.next_state == ref);
    x = out.next_state;
  }
}

TEST_CASE("mh worked acceptance value: exp(-ln 2) = 1/2") {
  // flat density, score jumps by (ln 2, 0) away from the start point
  const Vec x0 = Vec::Zero(2);
  TargetModel target;
  target.dim = 2;
  target.domain = Domain::Continuous;
  target.log_density_unnorm = [](const Vec&) { return 0.0; };
  target.score = [x0](const Vec& p) {
    Vec s = Vec::Zero(2);
    if ((p - x0).norm() > 1e-12) s[0] = std::log(2.0);
    return s;
  };
  Vec theta = (Vec(2) << 1, 0).finished();
  TiltedSurrogate sur(target, theta, 1.0, {HvpScheme::Forward, 1e-3});

  RngStream rng(5);
  long accepted = 0;
  const int trials = 4000;
  for (int n = 0; n < trials; ++n) {
    auto out = mh_step(sur, x0, {1.0}, rng);
    CHECK(out.log_accept_ratio == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    if (out.accepted) ++accepted;
  }
  const double rate = static_cast<double>(accepted) / trials;
  CHECK(rate == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("mh stationary law on five states matches pi_theta") {
  TargetModel target;
  target.dim = 1;
  target.domain = Domain::DiscreteConfiguration;
  target.max_coord = 4;
  const std::vector<double> logs{0.2, 1.0, -0.5, 0.7, -1.2};
  target.log_density_unnorm = [logs](const Vec& x) {
    return logs[static_cast<std::size_t>(std::lround(x[0]))];
  };
  auto base_log = target.log_density_unnorm;
  target.score = [base_log](const Vec& x) {
    TargetModel view;
    view.dim = 1;
    view.domain = Domain::DiscreteConfiguration;
    view.max_coord = 4;
    view.log_density_unnorm = base_log;
    return discrete_score(view, x);
  };

  Vec theta = (Vec(1) << 0.5).finished();
  TiltedSurrogate sur(target, theta, 1.2, {HvpScheme::Forward, 1e-3});

  // oracle: eigenvector of the explicit 5x5 transition matrix
  Mat P = mh_transition_matrix(sur);
  Vec pi_oracle = stationary_distribution(P);
  Vec pi_expected = tilted_probabilities(sur);
  CHECK((pi_oracle - pi_expected).lpNorm<Eigen::Infinity>() < 1e-8);

  // and the kernel itself follows that law empirically
  RngStream rng(31);
  Vec x = Vec::Zero(1);
  Vec counts = Vec::Zero(5);
  const long steps = 200000;
  for (long n = 0; n < steps; ++n) {
    x = mh_step(sur, x, {}, rng).next_state;
    counts[static_cast<int>(std::lround(x[0]))] += 1;
  }
  CHECK((counts / static_cast<double>(steps) - pi_expected).lpNorm<Eigen::Infinity>() <
        0.01);
}

TEST_CASE("ula drift vanishes at the mode when untilted") {
  auto target = standard_gaussian(2);
  auto sur = untilted(target);
  RngStream rng(1);
  UlaConfig cfg{0.05, 0.0};  // zero-noise hook
  auto out = ula_step(sur, Vec::Zero(2), cfg, rng);
  CHECK(out.next_state.norm() == doctest::Approx(0).epsilon(1e-14));
  CHECK(out.accepted);
}

TEST_CASE("ula with zero theta reproduces the textbook trajectory bit for bit") {
  auto target = standard_gaussian(2);
  auto sur = untilted(target);
  RngStream rng_a(123), rng_b(123);
  Vec x_a = (Vec(2) << 0.3, -0.7).finished(), x_b = x_a;
  for (int n = 0; n < 1000; ++n) {
    x_a = ula_step(sur, x_a, {0.01, 1.0}, rng_a).next_state;
    x_b = test::baseline_ula(target, x_b, 0.01, rng_b);
    REQUIRE(x_a == x_b);
  }
}

TEST_CASE("trap-accumulated history flips the ula drift toward the far mode") {
  // two-mode trap mixture; theta taken as the running mean of the scores
  // seen along a trapped stretch of the tilted chain itself
  MixtureSpec spec;
  spec.weights = {0.8, 0.2};
  spec.components.push_back({(Vec(2) << -2, 0).finished(), 0.0324 * Mat::Identity(2, 2)});
  spec.components.push_back({(Vec(2) << 2, 0).finished(), Mat::Identity(2, 2)});
  auto target = mixture_target(spec);
  const double alpha = 3.0;
  const HvpConfig hvp{HvpScheme::Analytic, 0.0};

  RngStream rng(3);
  Vec x = (Vec(2) << -2, 0).finished();
  Vec theta = Vec::Zero(2);
  const Vec probe = (Vec(2) << -1.7, 0).finished();
  const double base_drift = target.score(probe)[0];
  CHECK(base_drift < 0);  // plain score points back into the trap

  bool flipped = false;
  for (long n = 0; n < 4000 && !flipped; ++n) {
    TiltedSurrogate sur(target, theta, alpha, hvp);
    x = ula_step(sur, x, {0.01, 1.0}, rng).next_state;
    theta += srmc::gamma(n, 0.6, 0.1, 2) * (target.score(x) - theta);
    if (n % 20 == 0) {
      TiltedSurrogate probe_sur(target, theta, alpha, hvp);
      if (surrogate_score(probe_sur, probe)[0] > 0) flipped = true;
    }
  }
  CHECK(flipped);
}

TEST_CASE("ula flags non-finite surrogate scores") {
  TargetModel target;
  target.dim = 1;
  target.domain = Domain::Continuous;
  target.log_density_unnorm = [](const Vec&) { return 0.0; };
  target.score = [](const Vec&) {
    return Vec((Vec(1) << std::numeric_limits<double>::quiet_NaN()).finished());
  };
  auto sur = untilted(target);
  RngStream rng(1);
  CHECK_THROWS_AS(ula_step(sur, Vec::Zero(1), {0.1, 1.0}, rng), KernelFault);
}

TEST_CASE("mala with zero theta matches the textbook chain bit for bit") {
  auto target = standard_gaussian(3);
  auto sur = untilted(target);
  RngStream rng_a(77), rng_b(77);
  Vec x_a = Vec::Ones(3), x_b = x_a;
  for (int n = 0; n < 1000; ++n) {
    x_a = mala_step(sur, x_a, {0.05}, rng_a).next_state;
    x_b = test::baseline_mala(target, x_b, 0.05, rng_b);
    REQUIRE(x_a == x_b);
  }
}

TEST_CASE("mala degenerate proposal has zero log ratio") {
  RngStream rng(41);
  auto target = gaussian_target({rng.normal_vec(3), test::random_spd(3, rng)});
  TiltedSurrogate sur(target, 0.4 * rng.normal_vec(3), 1.5, {HvpScheme::Analytic, 0});
  Vec x = rng.normal_vec(3);
  CHECK(mala_log_ratio(sur, x, x, 0.05) == doctest::Approx(0).epsilon(1e-13));
}

TEST_CASE("mala log ratio equals the detailed-balance decomposition") {
  // log r must equal [log pi_t(y) + log q_t(y,x)] - [log pi_t(x) + log q_t(x,y)]
  RngStream rng(43);
  auto target = gaussian_target({rng.normal_vec(2), test::random_spd(2, rng)});
  TiltedSurrogate sur(target, 0.5 * rng.normal_vec(2), 1.1, {HvpScheme::Analytic, 0});
  const double eta = 0.07;
  auto log_q = [&](const Vec& from, const Vec& to) {
    Vec mean = from + eta * surrogate_score(sur, from);
    return -(to - mean).squaredNorm() / (4.0 * eta);  // up to a constant
  };
  for (int rep = 0; rep < 25; ++rep) {
    Vec x = rng.normal_vec(2), y = rng.normal_vec(2);
    const double expected = tilted_log_density(sur, y) + log_q(y, x) -
                            tilted_log_density(sur, x) - log_q(x, y);
    CHECK(mala_log_ratio(sur, x, y, eta) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("fixed-theta mala samples the shifted gaussian") {
  auto target = gaussian_target({Vec::Zero(1), Mat::Identity(1, 1)});
  Vec theta = (Vec(1) << 0.8).finished();
  const double alpha = 1.5;
  TiltedSurrogate sur(target, theta, alpha, {HvpScheme::Analytic, 0});
  const double shift = alpha * theta[0];  // pi_theta = N(alpha * theta, 1)

  RngStream rng(53);
  Vec x = Vec::Zero(1);
  const long n_samples = 30000;
  std::vector<double> samples;
  samples.reserve(n_samples);
  for (long n = 0; n < n_samples; ++n) {
    x = mala_step(sur, x, {0.3}, rng).next_state;
    samples.push_back(x[0]);
  }
  std::sort(samples.begin(), samples.end());
  double ks = 0;
  for (long i = 0; i < n_samples; ++i) {
    const double cdf = 0.5 * std::erfc(-(samples[i] - shift) / std::sqrt(2.0));
    const double emp_hi = static_cast<double>(i + 1) / n_samples;
    const double emp_lo = static_cast<double>(i) / n_samples;
    ks = std::max({ks, std::abs(cdf - emp_hi), std::abs(cdf - emp_lo)});
  }
  CHECK(ks < 0.04);
}

TEST_CASE("hmc with zero theta matches the textbook chain bit for bit") {
  auto target = standard_gaussian(2);
  auto sur = untilted(target);
  RngStream rng_a(11), rng_b(11);
  Vec x_a = (Vec(2) << 1, 1).finished(), x_b = x_a;
  for (int n = 0; n < 300; ++n) {
    x_a = hmc_step(sur, x_a, {0.1, 10, {}}, rng_a).next_state;
    x_b = test::baseline_hmc(target, x_b, 0.1, 10, rng_b);
    REQUIRE(x_a == x_b);
  }
}

TEST_CASE("hmc acceptance approaches one as the step shrinks") {
  auto target = standard_gaussian(3);
  auto sur = untilted(target);
  RngStream rng(17);
  Vec x = rng.normal_vec(3);
  long accepted = 0;
  for (int n = 0; n < 1000; ++n) {
    auto out = hmc_step(sur, x, {0.01, 5, {}}, rng);
    if (out.accepted) ++accepted;
    x = out.next_state;
  }
  CHECK(static_cast<double>(accepted) / 1000.0 > 0.99);
}

TEST_CASE("leapfrog trajectories reverse exactly after a momentum flip") {
  RngStream rng(19);
  auto target = gaussian_target({rng.normal_vec(3), test::random_spd(3, rng)});
  TiltedSurrogate sur(target, 0.4 * rng.normal_vec(3), 0.9, {HvpScheme::Analytic, 0});
  auto leapfrog = [&](Vec x, Vec v, int steps, double eta) {
    for (int s = 0; s < steps; ++s) {
      v += 0.5 * eta * surrogate_score(sur, x);
      x += eta * v;
      v += 0.5 * eta * surrogate_score(sur, x);
    }
    return std::make_pair(x, v);
  };
  Vec x0 = rng.normal_vec(3), v0 = rng.normal_vec(3);
  auto [x1, v1] = leapfrog(x0, v0, 15, 0.08);
  auto [x2, v2] = leapfrog(x1, -v1, 15, 0.08);
  CHECK((x2 - x0).norm() < 1e-8);
  CHECK((-v2 - v0).norm() < 1e-8);
}

TEST_CASE("hamiltonian error scales as eta squared") {
  auto target = standard_gaussian(2);
  auto sur = untilted(target);
  Vec x0 = (Vec(2) << 1.3, -0.4).finished(), v0 = (Vec(2) << 0.6, 1.1).finished();
  auto energy_error = [&](double eta) {
    Vec x = x0, v = v0;
    const double h0 = 0.5 * x.squaredNorm() + 0.5 * v.squaredNorm();
    const int steps = static_cast<int>(std::lround(2.0 / eta));  // fixed horizon
    for (int s = 0; s < steps; ++s) {
      v += 0.5 * eta * surrogate_score(sur, x);
      x += eta * v;
      v += 0.5 * eta * surrogate_score(sur, x);
    }
    return std::abs(0.5 * x.squaredNorm() + 0.5 * v.squaredNorm() - h0);
  };
  std::vector<double> etas{0.2, 0.1, 0.05, 0.025};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double e : etas) {
    const double lx = std::log(e), ly = std::log(energy_error(e));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(etas.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("hmc with a dense mass matrix still mixes and accepts") {
  RngStream rng(27);
  auto target = standard_gaussian(2);
  auto sur = untilted(target);
  Mat mass = test::random_spd(2, rng);
  Vec x = rng.normal_vec(2);
  long accepted = 0;
  for (int n = 0; n < 300; ++n) {
    auto out = hmc_step(sur, x, {0.02, 5, mass}, rng);
    if (out.accepted) ++accepted;
    x = out.next_state;
  }
  CHECK(accepted > 290);
}

TEST_CASE("balancing functions satisfy g(t) = t g(1/t)") {
  CHECK(balancing_fn(Balancing::Barker, 2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(balancing_fn(Balancing::Barker, 2.0) ==
        doctest::Approx(2.0 * balancing_fn(Balancing::Barker, 0.5)));
  for (auto g : {Balancing::Barker, Balancing::Sqrt, Balancing::Max})
    for (double t : {0.25, 0.8, 3.0})
      CHECK(balancing_fn(g, t) ==
            doctest::Approx(t * balancing_fn(g, 1.0 / t)).epsilon(1e-12));
}

TEST_CASE("invalid custom balancing function is rejected") {
  DiscreteGiConfig cfg;
  cfg.family = DiscreteGiConfig::Family::LocallyBalanced;
  cfg.custom_g = [](double t) { return t * t; };  // violates the identity
  auto target = random_binary_target(4, 71);
  auto sur = untilted(target);
  RngStream rng(1);
  CHECK_THROWS_AS(discrete_gi_step(sur, Vec::Zero(4), cfg, rng), ConfigError);
}

TEST_CASE("untilted locally balanced sampler has stationary law pi") {
  auto target = random_binary_target(8, 73);
  auto sur = untilted(target);
  DiscreteGiConfig cfg;
  cfg.family = DiscreteGiConfig::Family::LocallyBalanced;
  Mat P = discrete_gi_transition_matrix(sur, cfg);
  Vec pi_oracle = stationary_distribution(P);
  const auto probs = enumerate_probabilities(target);
  double worst = 0;
  for (long i = 0; i < 256; ++i)
    worst = std::max(worst, std::abs(pi_oracle[i] - probs[static_cast<std::size_t>(i)]));
  CHECK(worst < 1e-6);
}

TEST_CASE("tilted discrete samplers have stationary law pi_theta") {
  // mild tilt keeps the chain well connected, so the eigenvector oracle
  // is well conditioned at the 1e-6 tolerance
  auto target = random_binary_target(6, 79, 0.5);
  RngStream rng(83);
  Vec theta = 0.3 * rng.normal_vec(6);
  TiltedSurrogate sur(target, theta, 0.8, {HvpScheme::Forward, 1e-3});
  Vec pi_theta = tilted_probabilities(sur);
  for (auto family : {DiscreteGiConfig::Family::LocallyBalanced,
                      DiscreteGiConfig::Family::Gwg, DiscreteGiConfig::Family::Dlp}) {
    DiscreteGiConfig cfg;
    cfg.family = family;
    Mat P = discrete_gi_transition_matrix(sur, cfg);
    Vec pi_oracle = stationary_distribution(P);
    CHECK((pi_oracle - pi_theta).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("discrete kernel empirical visits match the transition matrix law") {
  auto target = random_binary_target(5, 89, 0.6);
  RngStream rng(97);
  Vec theta = 0.3 * rng.normal_vec(5);
  TiltedSurrogate sur(target, theta, 0.8, {HvpScheme::Forward, 1e-3});
  DiscreteGiConfig cfg;
  cfg.family = DiscreteGiConfig::Family::Gwg;

  Vec pi_expected = stationary_distribution(discrete_gi_transition_matrix(sur, cfg));
  Vec x = Vec::Zero(5);
  Vec counts = Vec::Zero(32);
  const long steps = 150000;
  for (long n = 0; n < steps; ++n) {
    x = discrete_gi_step(sur, x, cfg, rng).next_state;
    counts[static_cast<int>(target.state_index(x))] += 1;
  }
  CHECK((counts / static_cast<double>(steps) - pi_expected).lpNorm<Eigen::Infinity>() <
        0.01);
}

TEST_CASE("detailed balance holds for tilted mh and discrete-gi matrices") {
  auto target = random_binary_target(5, 101);
  RngStream rng(103);
  Vec theta = 0.5 * rng.normal_vec(5);
  TiltedSurrogate sur(target, theta, 1.3, {HvpScheme::Forward, 1e-3});
  Vec pi_theta = tilted_probabilities(sur);

  CHECK(detailed_balance_residual(pi_theta, mh_transition_matrix(sur)) < 1e-10);
  for (auto family : {DiscreteGiConfig::Family::LocallyBalanced,
                      DiscreteGiConfig::Family::Gwg, DiscreteGiConfig::Family::Dlp}) {
    DiscreteGiConfig cfg;
    cfg.family = family;
    CHECK(detailed_balance_residual(pi_theta, discrete_gi_transition_matrix(sur, cfg)) <
          1e-10);
  }
}

TEST_CASE("gradient evaluation accounting matches the documented counts") {
  auto target = standard_gaussian(2);
  RngStream rng(107);
  Vec x = rng.normal_vec(2);
  Vec cached = target.score(x);
  Vec theta = (Vec(2) << 0.5, 0.1).finished();
  TiltedSurrogate tilted(target, theta, 1.0, {HvpScheme::Forward, 1e-3});
  TiltedSurrogate central(target, theta, 1.0, {HvpScheme::Central, 1e-3});
  auto plain = untilted(target);

  SUBCASE("mh: proposal score, plus current when cold") {
    CHECK(mh_step(tilted, x, {0.5}, rng, &cached).grad_evals == 1);
    CHECK(mh_step(tilted, x, {0.5}, rng).grad_evals == 2);
  }
  SUBCASE("ula: next-state score plus hvp cost when tilted") {
    CHECK(ula_step(plain, x, {0.01, 1}, rng, &cached).grad_evals == 1);
    CHECK(ula_step(tilted, x, {0.01, 1}, rng, &cached).grad_evals == 2);
    CHECK(ula_step(central, x, {0.01, 1}, rng, &cached).grad_evals == 3);
    CHECK(ula_step(tilted, x, {0.01, 1}, rng).grad_evals == 3);
  }
  SUBCASE("mala: proposal score plus two hvp evaluations") {
    CHECK(mala_step(plain, x, {0.01}, rng, &cached).grad_evals == 1);
    CHECK(mala_step(tilted, x, {0.01}, rng, &cached).grad_evals == 3);
    CHECK(mala_step(tilted, x, {0.01}, rng).grad_evals == 4);
  }
  SUBCASE("hmc: L fresh position scores plus L+1 hvp evaluations") {
    const int L = 6;
    CHECK(hmc_step(plain, x, {0.05, L, {}}, rng, &cached).grad_evals == L);
    CHECK(hmc_step(tilted, x, {0.05, L, {}}, rng, &cached).grad_evals == L + (L + 1));
    CHECK(hmc_step(tilted, x, {0.05, L, {}}, rng).grad_evals == L + (L + 1) + 1);
  }
}

TEST_CASE("discrete gi gradient accounting counts distinct feature evaluations") {
  auto target = random_binary_target(4, 109);
  RngStream rng(113);
  Vec x = Vec::Zero(4);
  Vec cached = target.score(x);
  Vec theta = 0.3 * rng.normal_vec(4);
  TiltedSurrogate tilted(target, theta, 1.0, {HvpScheme::Forward, 1e-3});
  DiscreteGiConfig lb;
  lb.family = DiscreteGiConfig::Family::LocallyBalanced;
  // active tilt, warm cache: d neighbors of x plus d-1 fresh around the
  // proposal (the current state is already cached)
  CHECK(discrete_gi_step(tilted, x, lb, rng, &cached).grad_evals == 2 * 4 - 1);
  auto plain = untilted(target);
  auto out = discrete_gi_step(plain, x, lb, rng, &cached);
  CHECK(out.grad_evals == (out.accepted ? 1 : 0));
}
