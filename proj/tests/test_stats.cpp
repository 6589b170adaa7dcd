#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"

using namespace ultratree;

namespace {

std::vector<TauTree> random_sample(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto taxa = numbered_taxa(n);
  std::vector<TauTree> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(testing_util::random_tau(taxa, rng));
  return out;
}

MeanOptions iterations(std::size_t k) {
  MeanOptions opt;
  opt.iterations = k;
  return opt;
}

}  // namespace

TEST(FrechetMean, SingletonIsItself) {
  auto t = testing_util::random_tau(5, 1);
  auto r = frechet_mean({t});
  EXPECT_TRUE(same_point(r.mean, t));
  EXPECT_EQ(r.variance, 0.0);
}

TEST(FrechetMean, RepeatedTree) {
  auto t = testing_util::random_tau(5, 2);
  auto r = frechet_mean({t, t, t});
  EXPECT_LT(tau_distance(r.mean, t), 1e-9);
  EXPECT_LT(r.variance, 1e-18);
}

TEST(FrechetMean, TwoTreesGiveMidpoint) {
  auto sample = random_sample(5, 2, 3);
  auto r = frechet_mean(sample);
  auto mid = point_at(tau_geodesic(sample[0], sample[1]), 0.5);
  EXPECT_LT(tau_distance(r.mean, mid), 1e-4);
  EXPECT_EQ(r.iterations, 10'000u);
  EXPECT_DOUBLE_EQ(r.final_step, 1.0 / 10'000);

  const double d = tau_distance(sample[0], sample[1]);
  EXPECT_NEAR(frechet_variance(sample, mid), d * d / 4.0, 1e-9);
}

TEST(FrechetMean, IteratesStayNearInputs) {
  auto sample = random_sample(5, 6, 4);
  double spread = 0.0;
  for (const auto& x : sample)
    for (const auto& y : sample) spread = std::max(spread, tau_distance(x, y));
  MeanOptions opt = iterations(600);
  std::vector<TauTree> iterates;
  opt.observer = [&](const TauTree& x) { iterates.push_back(x); };
  frechet_mean(sample, opt);
  ASSERT_EQ(iterates.size(), 600u);
  for (const auto& x : iterates) EXPECT_LE(tau_distance(x, iterates.front()), spread + 1e-9);
}

TEST(FrechetMean, VarianceNearMinimal) {
  auto sample = random_sample(4, 5, 5);
  auto r = frechet_mean(sample, iterations(3000));
  EXPECT_NEAR(r.variance, frechet_variance(sample, r.mean), 0.0);
  for (const auto& x : sample) EXPECT_LE(r.variance, frechet_variance(sample, x) + 1e-6);

  auto with_mean = sample;
  with_mean.push_back(r.mean);
  EXPECT_LE(frechet_variance(with_mean, r.mean), r.variance);
  EXPECT_LE(frechet_variance(with_mean, std::size_t{3000}), r.variance + 1e-6);
}

TEST(FrechetMean, PermutationEquivariant) {
  auto sample = random_sample(5, 4, 6);
  std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  std::vector<TauTree> permuted;
  for (const auto& t : sample) permuted.push_back(testing_util::relabel(t, perm));
  auto r = frechet_mean(sample, iterations(2000));
  auto q = frechet_mean(permuted, iterations(2000));
  auto expected = testing_util::relabel(r.mean, perm);
  EXPECT_EQ(q.mean.topology(), expected.topology());
  for (std::size_t i = 0; i < q.mean.tau().size(); ++i) EXPECT_NEAR(q.mean.tau()[i], expected.tau()[i], 1e-12);
}

TEST(FrechetMean, SeededRandomOrderIsDeterministic) {
  auto sample = random_sample(4, 5, 7);
  MeanOptions opt = iterations(500);
  opt.random_order = true;
  opt.seed = 99;
  auto a = frechet_mean(sample, opt), b = frechet_mean(sample, opt);
  EXPECT_TRUE(same_point(a.mean, b.mean));
}

TEST(FrechetMean, Errors) {
  try {
    frechet_mean({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
  try {
    frechet_mean({testing_util::random_tau(4, 1), testing_util::random_tau(5, 1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TaxonSetMismatch);
  }
}

TEST(EstimateMu, ThreeTaxaIsOne) {
  for (Space s : {Space::tau, Space::t, Space::bhv}) {
    MuOptions opt;
    opt.samples = 1000;
    opt.seed = 1;
    auto est = estimate_mu(3, s, opt);
    EXPECT_EQ(est.estimate, 1.0) << to_string(s);
    EXPECT_EQ(est.half_width, 0.0);
  }
}

TEST(EstimateMu, FourTaxaTauStrictlyBetween) {
  MuOptions opt;
  opt.samples = 10'000;
  opt.seed = 2;
  auto est = estimate_mu(4, Space::tau, opt);
  EXPECT_GT(est.estimate - est.half_width, 0.0);
  EXPECT_LT(est.estimate + est.half_width, 1.0);
  EXPECT_NEAR(est.half_width, 1.96 * std::sqrt(est.estimate * (1 - est.estimate) / 10'000), 1e-15);
}

TEST(EstimateMu, DeterministicAcrossWorkerCounts) {
  MuOptions opt;
  opt.samples = 400;
  opt.seed = 3;
  opt.jobs = 1;
  auto a = estimate_mu(5, Space::bhv, opt);
  opt.jobs = 4;
  auto b = estimate_mu(5, Space::bhv, opt);
  EXPECT_EQ(a.cone_pairs, b.cone_pairs);
  EXPECT_EQ(a.skipped_same_topology, b.skipped_same_topology);
}

TEST(EstimateMu, SameTopologyFlag) {
  MuOptions opt;
  opt.samples = 300;
  opt.seed = 4;
  opt.include_same_topology = true;
  auto est = estimate_mu(3, Space::tau, opt);
  EXPECT_EQ(est.skipped_same_topology, 0u);
  // A same-topology geodesic is a straight segment inside one simplex.
  EXPECT_LT(est.estimate, 1.0);
}

TEST(EstimateMu, RejectsLargeTSpace) {
  try {
    estimate_mu(6, Space::t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedN);
  }
}
