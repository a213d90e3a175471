#include <doctest.h>

#include <numeric>
#include <set>

#include "srmc/metrics.hpp"
#include "test_util.hpp"

using namespace srmc;

TEST_CASE("running mse worked values") {
  Vec star = (Vec(1) << 2).finished();
  std::vector<Vec> exact(5, star);
  for (double v : running_mse(exact, star)) CHECK(v == 0.0);

  std::vector<Vec> off(4, (Vec(1) << 3).finished());
  for (double v : running_mse(off, star)) CHECK(v == doctest::Approx(1.0));

  CHECK_THROWS_AS(running_mse(exact, Vec{}), ConfigError);
}

TEST_CASE("iid running mean satisfies the chi-square scaling") {
  // t * MSE(t) averages to d for i.i.d. N(mu, I_d) samples
  RngStream rng(3);
  const int d = 4;
  const Vec star = rng.normal_vec(d);
  const long t = 4000;
  const int replicas = 300;
  double acc = 0;
  for (int r = 0; r < replicas; ++r) {
    Vec sum = Vec::Zero(d);
    for (long i = 0; i < t; ++i) sum += star + rng.normal_vec(d);
    acc += static_cast<double>(t) * (sum / t - star).squaredNorm();
  }
  CHECK(acc / replicas == doctest::Approx(d).epsilon(0.1));
}

TEST_CASE("uniformity metrics worked values") {
  ClassHistogram uniform{std::vector<long>(10, 7)};
  CHECK(kl_to_uniform(uniform) == doctest::Approx(0).epsilon(1e-14));
  CHECK(tv_to_uniform(uniform) == doctest::Approx(0).epsilon(1e-14));
  CHECK(normalized_entropy(uniform) == doctest::Approx(1.0).epsilon(1e-14));

  ClassHistogram point{std::vector<long>{42, 0, 0, 0, 0, 0, 0, 0, 0, 0}};
  CHECK(kl_to_uniform(point) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(tv_to_uniform(point) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(normalized_entropy(point) == doctest::Approx(0).epsilon(1e-14));

  ClassHistogram half{std::vector<long>{5, 5, 0, 0, 0, 0, 0, 0, 0, 0}};
  CHECK(kl_to_uniform(half) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  CHECK(tv_to_uniform(half) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(normalized_entropy(half) ==
        doctest::Approx(std::log(2.0) / std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("uniformity metrics vanish together exactly on uniform histograms") {
  RngStream rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const int c = 2 + static_cast<int>(rng.uniform_int(10));
    ClassHistogram h{std::vector<long>(static_cast<std::size_t>(c),
                                       1 + rng.uniform_int(50))};
    CHECK(kl_to_uniform(h) == doctest::Approx(0).epsilon(1e-13));
    CHECK(tv_to_uniform(h) == doctest::Approx(0).epsilon(1e-13));
    CHECK(1.0 - normalized_entropy(h) == doctest::Approx(0).epsilon(1e-13));

    // perturb one cell: all three move away from their extremes
    ClassHistogram skew = h;
    skew.counts[0] += 3 + 2 * skew.counts[0];
    CHECK(kl_to_uniform(skew) > 1e-4);
    CHECK(tv_to_uniform(skew) > 1e-4);
    CHECK(normalized_entropy(skew) < 1.0 - 1e-5);
  }
}

TEST_CASE("empty histograms are rejected") {
  ClassHistogram empty{std::vector<long>(4, 0)};
  CHECK_THROWS_AS(kl_to_uniform(empty), ConfigError);
}

TEST_CASE("vendi score worked values") {
  CHECK(vendi_score(Mat::Ones(6, 6)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(vendi_score(Mat::Identity(7, 7)) == doctest::Approx(7.0).epsilon(1e-10));

  Mat two_blocks = Mat::Zero(4, 4);
  two_blocks.topLeftCorner(2, 2).setOnes();
  two_blocks.bottomRightCorner(2, 2).setOnes();
  CHECK(vendi_score(two_blocks) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("vendi score stays within one and n and ignores permutations") {
  RngStream rng(9);
  for (int rep = 0; rep < 15; ++rep) {
    const int n = 3 + static_cast<int>(rng.uniform_int(6));
    // unit-diagonal PSD from normalized feature vectors
    Mat feats(n, 3);
    for (int i = 0; i < n; ++i) feats.row(i) = rng.normal_vec(3).normalized();
    Mat k = feats * feats.transpose();
    const double vs = vendi_score(k);
    CHECK(vs >= 1.0 - 1e-10);
    CHECK(vs <= n + 1e-10);

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::swap(perm[0], perm[static_cast<std::size_t>(n - 1)]);
    Mat permuted(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        permuted(i, j) = k(perm[static_cast<std::size_t>(i)],
                           perm[static_cast<std::size_t>(j)]);
    CHECK(vendi_score(permuted) == doctest::Approx(vs).epsilon(1e-10));
  }
}

TEST_CASE("vendi rejects invalid similarity matrices") {
  Mat bad_diag = 0.5 * Mat::Identity(3, 3);
  CHECK_THROWS_AS(vendi_score(bad_diag), ConfigError);
  Mat asym = Mat::Identity(3, 3);
  asym(0, 1) = 0.9;
  CHECK_THROWS_AS(vendi_score(asym), ConfigError);
  Mat non_psd = Mat::Identity(2, 2);
  non_psd(0, 1) = non_psd(1, 0) = 1.5;
  CHECK_THROWS_AS(vendi_score(non_psd), ConfigError);
}

TEST_CASE("mode coverage worked examples") {
  std::vector<Vec> centers;
  for (int k = 0; k < 4; ++k) centers.push_back((Vec(1) << 2.0 * k).finished());

  // all samples at center 0
  std::vector<std::vector<Vec>> at_zero{{Vec::Zero(1), Vec::Zero(1), Vec::Zero(1)}};
  for (long c : mode_coverage(at_zero, centers)) CHECK(c == 1);

  // one chain cycling through every center reaches K by step K
  std::vector<std::vector<Vec>> cycle{{centers[0], centers[1], centers[2], centers[3]}};
  auto cov = mode_coverage(cycle, centers);
  CHECK(cov.back() == 4);
  for (std::size_t t = 0; t < cov.size(); ++t)
    CHECK(cov[t] == static_cast<long>(t) + 1);
}

TEST_CASE("mode coverage matches a brute-force recount and never decreases") {
  RngStream rng(13);
  std::vector<Vec> centers;
  for (int k = 0; k < 6; ++k) centers.push_back(3.0 * rng.normal_vec(2));
  std::vector<std::vector<Vec>> chains(3);
  for (auto& chain : chains)
    for (int t = 0; t < 40; ++t) chain.push_back(3.0 * rng.normal_vec(2));

  auto cov = mode_coverage(chains, centers);
  // brute force: recompute the union from scratch at each step
  for (std::size_t t = 0; t < cov.size(); ++t) {
    std::set<int> seen;
    for (const auto& chain : chains)
      for (std::size_t s = 0; s <= t && s < chain.size(); ++s)
        seen.insert(nearest_center(chain[s], centers));
    CHECK(cov[t] == static_cast<long>(seen.size()));
    if (t > 0) CHECK(cov[t] >= cov[t - 1]);
    CHECK(cov[t] <= 6);
  }
}

TEST_CASE("nearest center ties go to the lowest index") {
  std::vector<Vec> centers{(Vec(1) << -1).finished(), (Vec(1) << 1).finished()};
  CHECK(nearest_center(Vec::Zero(1), centers) == 0);
}

TEST_CASE("budget indexing per cost model") {
  RunRecord rec;
  for (long n : {1L, 2L, 3L})
    rec.rows.push_back({n, Vec::Zero(1), Vec::Zero(1), Vec::Zero(1), Vec::Zero(1),
                        true, 7 * n, 0.0});
  std::vector<double> metric{0.5, 0.4, 0.3};

  auto base = budget_indexed_series(rec, metric, CostModel::BaselineD, 10);
  CHECK(base[2].budget == 30);
  auto srmc3 = budget_indexed_series(rec, metric, CostModel::Srmc3d, 10);
  CHECK(srmc3[2].budget == 90);
  auto measured = budget_indexed_series(rec, metric, CostModel::Measured, 10);
  CHECK(measured[2].budget == 21);
  CHECK(measured[0].value == 0.5);

  std::vector<double> wrong_len{1.0};
  CHECK_THROWS_AS(budget_indexed_series(rec, wrong_len, CostModel::Measured, 10),
                  ConfigError);
}
