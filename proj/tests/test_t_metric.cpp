#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"

using namespace ultratree;
using testing_util::ranked;

namespace {

const char* kLeft = "((1:1,2:1):8,(3:8,4:8):1);";
const char* kRight = "((1:1,3:1):8,(2:8,4:8):1);";

PartitionChain chain(const std::string& text) { return ranked(text).topology(); }

std::vector<TTree> hand_detour() {
  return {parse_newick(kLeft), ranked("(1,2|3|4):4;(1,2,3,4):8"), ranked("(1,2,3|4):6;(1,2,3,4):8"),
          ranked("(1,3|2|4):4;(1,2,3,4):7"), parse_newick(kRight)};
}

std::vector<PartitionChain> four_hop_sequence() {
  return {chain("(1,2|3|4):1;(1,2|3,4):2;(1,2,3,4):3"), chain("(1,2|3|4):1;(1,2,3|4):2;(1,2,3,4):3"),
          chain("(1,3|2|4):1;(1,2,3|4):2;(1,2,3,4):3"), chain("(1,3|2|4):1;(1,3|2,4):2;(1,2,3,4):3")};
}

// E = ((a,c):y,(b,d):x):z and S = (((a,c):y,b):x,d):z, valid for y < x < z.
std::pair<TTree, TTree> es_pair(double x, double y, double z) {
  auto taxa = make_taxa({"a", "b", "c", "d"});
  auto e = from_timed_partitions(taxa, {{Partition({0b0101, 0b0010, 0b1000}), y},
                                        {Partition({0b0101, 0b1010}), x},
                                        {Partition({0b1111}), z}});
  auto s = from_timed_partitions(taxa, {{Partition({0b0101, 0b0010, 0b1000}), y},
                                        {Partition({0b0111, 0b1000}), x},
                                        {Partition({0b1111}), z}});
  return {e, s};
}

TTree random_t(std::size_t n, std::mt19937_64& rng) { return to_t(testing_util::random_tau(numbered_taxa(n), rng)); }

}  // namespace

TEST(ConePath, CrossedCherries) {
  auto c = cone_path(parse_newick(kLeft), parse_newick(kRight));
  EXPECT_NEAR(c.star_height, 6.0, 1e-9);
  EXPECT_NEAR(c.length, 2.0 * std::sqrt(38.0), 1e-9);
}

TEST(ConePath, StarTrees) {
  auto a = parse_newick("(1:2,2:2,3:2);");
  auto b = parse_newick("(1:5,2:5,3:5);");
  auto c = cone_path(a, b);
  EXPECT_NEAR(c.length, 3.0 * std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(c.star_height, 3.5);
}

TEST(ConePath, LengthIsMinimal) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    auto a = random_t(5, rng), b = random_t(5, rng);
    auto c = cone_path(a, b);
    for (double dh : {-1e-3, 1e-3}) {
      double h = c.star_height + dh, sa = 0, sb = 0;
      for (double x : a.t()) sa += (h - x) * (h - x);
      for (double x : b.t()) sb += (h - x) * (h - x);
      EXPECT_LE(c.length, std::sqrt(sa) + std::sqrt(sb) + 1e-12);
    }
  }
}

TEST(PathLength, HandDetour) {
  EXPECT_NEAR(path_length(hand_detour()), std::sqrt(10.0) + std::sqrt(8.0) + std::sqrt(6.0) + std::sqrt(14.0), 1e-9);
}

TEST(PathLength, RejectsNonAdjacentWaypoints) {
  try {
    path_length({parse_newick(kLeft), parse_newick(kRight)});
    FAIL() << "expected NotCellMates";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotCellMates);
    EXPECT_NE(std::string(e.what()).find("waypoints 0 and 1"), std::string::npos);
  }
}

TEST(OptimizePath, FourHopSequenceImprovesDetour) {
  auto a = parse_newick(kLeft), b = parse_newick(kRight);
  auto seq = four_hop_sequence();
  auto p = optimize_path(a, b, seq);
  EXPECT_LE(p.length, 12.181938);
  EXPECT_LT(p.length, path_length(hand_detour()) - 1e-6);
  EXPECT_EQ(path_length(p.waypoints), p.length);

  std::reverse(seq.begin(), seq.end());
  auto q = optimize_path(b, a, seq);
  EXPECT_NEAR(p.length, q.length, 1e-9);
}

TEST(OptimizePath, SingleSimplexIsStraight) {
  auto a = ranked("(1,2|3|4):1;(1,2|3,4):2;(1,2,3,4):4");
  auto b = ranked("(1,2|3|4):2;(1,2|3,4):5;(1,2,3,4):6");
  auto p = optimize_path(a, b, {a.topology()});
  EXPECT_NEAR(p.length, std::sqrt(1.0 + 9.0 + 4.0), 1e-12);
  EXPECT_EQ(p.waypoints.size(), 2u);
}

TEST(OptimizePath, RejectsInvalidSequences) {
  auto a = parse_newick(kLeft), b = parse_newick(kRight);
  auto seq = four_hop_sequence();
  auto expect_invalid = [&](const std::vector<PartitionChain>& s) {
    try {
      optimize_path(a, b, s);
      FAIL() << "expected InvalidSequence";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidSequence);
    }
  };
  expect_invalid({});
  expect_invalid({seq[0], seq[3]});
  expect_invalid({seq[1], seq[2], seq[3]});
}

TEST(TGeodesic, CrossedCherriesBeatsConeAndDetour) {
  auto a = parse_newick(kLeft), b = parse_newick(kRight);
  auto g = t_geodesic(a, b, 6);
  EXPECT_LT(g.length(), 12.181938);
  EXPECT_LT(g.length(), cone_path(a, b).length);
  EXPECT_FALSE(is_cone_geodesic_t(a, b));
  EXPECT_NEAR(path_length(g.waypoints), g.length(), 1e-12);
  // The geodesic visits a clade present in neither endpoint.
  const Partition p123({0b0111, 0b1000});
  bool seen = false;
  for (const auto& w : g.waypoints)
    for (const auto& tp : w.timed_partitions()) seen |= tp.partition == p123;
  EXPECT_TRUE(seen);
}

TEST(TGeodesic, SameSimplexIsEuclidean) {
  auto a = ranked("(1,2|3|4):1;(1,2|3,4):2;(1,2,3,4):4");
  auto b = ranked("(1,2|3|4):2;(1,2|3,4):5;(1,2,3,4):6");
  EXPECT_NEAR(t_distance(a, b), std::sqrt(14.0), 1e-9);
}

TEST(TGeodesic, RequiresResolvedEndpoints) {
  auto a = ranked("(1,2|3|4):1;(1,2,3,4):4");
  auto b = parse_newick(kRight);
  try {
    t_geodesic(a, b);
    FAIL() << "expected EndpointNotResolved";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EndpointNotResolved);
  }
}

TEST(TGeodesic, ThreeTaxaAlwaysCone) {
  auto a = parse_newick("((1:1,2:1):2,3:3);");
  auto b = parse_newick("((1:2,3:2):3,2:5);");
  EXPECT_TRUE(is_cone_geodesic_t(a, b));
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    auto x = random_t(3, rng), y = random_t(3, rng);
    if (x.topology() != y.topology()) EXPECT_TRUE(is_cone_geodesic_t(x, y));
  }
}

TEST(TGeodesic, NodeBelowMeetingPointStaysPut) {
  auto [e, s] = es_pair(4.0, 1.0, 6.0);
  auto g = t_geodesic(e, s);
  EXPECT_FALSE(is_cone_geodesic_t(e, s));
  const Partition acbd({0b0101, 0b0010, 0b1000});
  bool found = false;
  for (const auto& w : g.waypoints) {
    auto tp = w.timed_partitions();
    if (tp.size() == 2 && tp[0].partition == acbd && std::abs(tp[0].time - 1.0) < 1e-6 && std::abs(tp[1].time - 5.0) < 1e-6)
      found = true;
  }
  EXPECT_TRUE(found);
}

TEST(TGeodesic, BoundedByConeAndOptimizedPaths) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 30; ++i) {
    auto a = random_t(4, rng), b = random_t(4, rng);
    auto g = t_geodesic(a, b);
    EXPECT_LE(g.length(), cone_path(a, b).length + 1e-12);
    EXPECT_NEAR(path_length(g.waypoints), g.length(), 1e-9);
    if (a.topology() == b.topology()) {
      double s = 0;
      for (std::size_t k = 0; k < a.t().size(); ++k) s += (a.t()[k] - b.t()[k]) * (a.t()[k] - b.t()[k]);
      EXPECT_NEAR(g.length(), std::sqrt(s), 1e-9);
    }
  }
}

TEST(TGeodesic, MetricAndThinTriangles) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int i = 0; i < 25; ++i) {
    auto x1 = random_t(4, rng), x2 = random_t(4, rng), x3 = random_t(4, rng);
    const double d12 = t_distance(x1, x2), d13 = t_distance(x1, x3), d23 = t_distance(x2, x3);
    EXPECT_EQ(d12, t_distance(x2, x1));
    EXPECT_LE(d13, d12 + d23 + 1e-9);
    auto g = t_geodesic(x1, x2);
    for (double s : {0.25, 0.5, 0.75}) {
      TTree y = point_at(g, s);
      if (!y.fully_resolved()) continue;
      const double comparison = std::sqrt(std::max(0.0, (1 - s) * d13 * d13 + s * d23 * d23 - s * (1 - s) * d12 * d12));
      EXPECT_LE(t_distance(x3, y), comparison + 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 60);
}

TEST(NonConeWitness, NoWitnessCases) {
  auto expect_none = [](const TTree& a, const TTree& b) {
    try {
      non_cone_witness(a, b);
      FAIL() << "expected NoWitnessPossible";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::NoWitnessPossible);
    }
  };
  expect_none(parse_newick("((1:1,2:1):2,3:3);"), parse_newick("((1:2,3:2):3,2:5);"));
  expect_none(parse_newick(kLeft), parse_newick(kRight));
}

TEST(NonConeWitness, SharedCherryRaisedPair) {
  auto a = parse_newick("(((1:1,2:1):2,3:3):4,4:7);");
  auto b = parse_newick("(((1:2,2:2):3,4:5):1,3:6);");
  auto w = non_cone_witness(a, b);
  EXPECT_LT(w.detour_length, w.cone_length);
  EXPECT_EQ(path_length(w.detour), w.detour_length);
  EXPECT_TRUE(same_point(w.detour.front(), w.source));
  EXPECT_TRUE(same_point(w.detour.back(), w.target));
  EXPECT_DOUBLE_EQ(w.source.height(), a.height() + w.raise);
  EXPECT_DOUBLE_EQ(w.target.height(), b.height() + w.raise);
  EXPECT_NEAR(w.height, cone_path(w.source, w.target).star_height, 1e-12);
  EXPECT_FALSE(is_cone_geodesic_t(w.source, w.target));
}

TEST(NonConeWitness, RandomPairsWithCommonCherry) {
  std::mt19937_64 rng(5);
  int found = 0;
  for (int i = 0; i < 40 && found < 10; ++i) {
    auto a = random_t(5, rng), b = random_t(5, rng);
    try {
      auto w = non_cone_witness(a, b);
      EXPECT_LT(w.detour_length, w.cone_length);
      EXPECT_NEAR(path_length(w.detour), w.detour_length, 1e-9);
      ++found;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::NoWitnessPossible);
    }
  }
  EXPECT_GT(found, 0);
}

TEST(FacetAngles, ThirdOrHalfPi) {
  for (std::size_t n : {4u, 5u}) {
    for (const auto& c : enumerate_ranked_topologies(numbered_taxa(n))) {
      for (const auto& fa : shared_facet_angles(c)) {
        EXPECT_TRUE(fa.is_third_pi() || fa.is_half_pi());
        EXPECT_GE(fa.angle, std::acos(-1.0) / 3 - 1e-12);
      }
    }
  }
}
