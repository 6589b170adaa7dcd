#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"

using namespace ultratree;
using testing_util::ranked_tau;

namespace {

double comparison_distance(double d12, double d13, double d23, double s) {
  return std::sqrt(std::max(0.0, (1 - s) * d13 * d13 + s * d23 * d23 - s * (1 - s) * d12 * d12));
}

}  // namespace

TEST(TauDistance, ThreeTaxaCherries) {
  TauTree a = ranked_tau("(1,2|3):1;(1,2,3):2");
  TauTree b = ranked_tau("(1,3|2):1;(1,2,3):2");
  EXPECT_DOUBLE_EQ(tau_distance(a, b), 2.0);
  EXPECT_EQ(tau_distance(a, a), 0.0);
  EXPECT_TRUE(is_cone_geodesic_tau(a, b));
}

TEST(TauDistance, SameTopologyIsEuclidean) {
  auto taxa = numbered_taxa(4);
  auto chain = enumerate_ranked_topologies(taxa)[0];
  TauTree a(chain, {1, 2, 3}), b(chain, {2, 2, 5});
  EXPECT_DOUBLE_EQ(tau_distance(a, b), std::sqrt(5.0));
  EXPECT_FALSE(is_cone_geodesic_tau(a, b));
  auto path = tau_geodesic(a, b);
  EXPECT_EQ(path.waypoints.size(), 2u);
}

TEST(TauDistance, TaxonSetMismatch) {
  TauTree a = ranked_tau("(1,2|3):1;(1,2,3):2");
  TauTree b = ranked_tau("(a,b|c):1;(a,b,c):2");
  try {
    tau_distance(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TaxonSetMismatch);
  }
}

TEST(TauGeodesic, ThreeTaxaWaypoints) {
  TauTree a = ranked_tau("(1,2|3):1;(1,2,3):2");
  TauTree b = ranked_tau("(1,3|2):1;(1,2,3):2");
  auto path = tau_geodesic(a, b);
  ASSERT_EQ(path.waypoints.size(), 3u);
  EXPECT_EQ(path.waypoints[1].tau(), (std::vector<double>{1, 0}));
  EXPECT_EQ(path.leg_lengths, (std::vector<double>{1, 1}));
  TauTree mid = point_at(path, 0.5);
  EXPECT_EQ(mid.tau(), (std::vector<double>{1, 0}));
  EXPECT_TRUE(same_point(point_at(path, 0.0), a));
  EXPECT_TRUE(same_point(point_at(path, 1.0), b));
  EXPECT_THROW(point_at(path, 1.5), Error);
}

TEST(TauGeodesic, CompleteBipartiteIsCone) {
  TauTree t = ranked_tau("(1,2|3|4):1;(1,2,3|4):2;(1,2,3,4):3");
  TauTree e = ranked_tau("(3,4|1|2):0.5;(1,3,4|2):2.5;(1,2,3,4):3");
  EXPECT_TRUE(is_cone_geodesic_tau(t, e));
}

TEST(TauGeodesic, PathProperties) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    auto taxa = numbered_taxa(3 + trial % 4);
    TauTree a = testing_util::random_tau(taxa, rng), b = testing_util::random_tau(taxa, rng);
    auto path = tau_geodesic(a, b);
    const double d = tau_distance(a, b);
    ASSERT_NEAR(path.length(), d, 1e-12);
    // Every leg is a straight segment inside one closed cube.
    for (std::size_t k = 0; k + 1 < path.waypoints.size(); ++k)
      ASSERT_NEAR(tau_leg_length(path.waypoints[k], path.waypoints[k + 1]), path.leg_lengths[k], 1e-9);
    // Ratios are non-decreasing.
    ASSERT_TRUE(path.support);
    double prev = 0.0;
    for (const auto& [as, bs] : *path.support) {
      double na = 0, nb = 0;
      for (const auto& p : as)
        for (const auto& [q, w] : a.weighted_partitions())
          if (q == p) na += w * w;
      for (const auto& p : bs)
        for (const auto& [q, w] : b.weighted_partitions())
          if (q == p) nb += w * w;
      double r = std::sqrt(na / nb);
      ASSERT_GE(r, prev - 1e-12);
      prev = r;
    }
    // Waypoint partitions come from the endpoints.
    for (const auto& w : path.waypoints)
      for (const auto& [p, x] : w.weighted_partitions())
        ASSERT_TRUE(a.topology().contains(p) || b.topology().contains(p));
    // Sub-segment property.
    TauTree q1 = point_at(path, 0.25), q3 = point_at(path, 0.75);
    ASSERT_NEAR(tau_distance(q1, q3), 0.5 * d, 1e-9);
    ASSERT_NEAR(tau_distance(a, q1), 0.25 * d, 1e-9);
  }
}

TEST(TauMetric, AxiomsAndThinTriangles) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    auto taxa = numbered_taxa(4 + trial % 3);
    TauTree x1 = testing_util::random_tau(taxa, rng), x2 = testing_util::random_tau(taxa, rng),
            x3 = testing_util::random_tau(taxa, rng);
    const double d12 = tau_distance(x1, x2), d13 = tau_distance(x1, x3), d23 = tau_distance(x2, x3);
    ASSERT_EQ(d12, tau_distance(x2, x1));
    ASSERT_LE(d13, d12 + d23 + 1e-9);
    auto path = tau_geodesic(x1, x2);
    for (double s : {0.25, 0.5, 0.75}) {
      TauTree y = point_at(path, s);
      ASSERT_LE(tau_distance(x3, y), comparison_distance(d12, d13, d23, s) + 1e-9);
    }
  }
}

TEST(TauMetric, RelabellingInvariance) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 4 + trial % 3;
    auto taxa = numbered_taxa(n);
    TauTree a = testing_util::random_tau(taxa, rng), b = testing_util::random_tau(taxa, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ASSERT_NEAR(tau_distance(a, b), tau_distance(testing_util::relabel(a, perm), testing_util::relabel(b, perm)), 1e-12);
  }
}

TEST(VertexCover, SmallGraph) {
  // Path graph a0 - b0 - a1 with cheap b0.
  auto cover = min_weight_vertex_cover({0.5, 0.5}, {0.3}, [](std::size_t, std::size_t) { return true; });
  EXPECT_NEAR(cover.weight, 0.3, 1e-15);
  EXPECT_TRUE(cover.a.empty());
  EXPECT_EQ(cover.b, (std::vector<std::size_t>{0}));
}
