#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"

using namespace ultratree;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;  // sentinel: nothing thrown
}

bool same_tree(const TTree& a, const TTree& b, double tol) {
  if (a.topology().taxa() != b.topology().taxa()) return false;
  auto pa = a.timed_partitions(), pb = b.timed_partitions();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pa[i].partition != pb[i].partition || std::abs(pa[i].time - pb[i].time) > tol) return false;
  return true;
}

}  // namespace

TEST(ParseNewick, CrossedCherryTree) {
  TTree x = parse_newick("((1:1,2:1):8,(3:8,4:8):1);");
  EXPECT_EQ(x.t(), (std::vector<double>{1, 8, 9}));
  EXPECT_EQ(format_ranked_topology(x.topology()), "<(1,2|3|4), (1,2|3,4), (1,2,3,4)>");
}

TEST(ParseNewick, TwoTaxa) {
  TTree x = parse_newick("(1:5,2:5);");
  EXPECT_EQ(x.t(), (std::vector<double>{5}));
}

TEST(ParseNewick, Rejections) {
  EXPECT_EQ(kind_of([] { parse_newick("((1:1,2:2):1,3:2);"); }), ErrorKind::NotUltrametric);
  EXPECT_EQ(kind_of([] { parse_newick("((1:1,1:1):1,3:2);"); }), ErrorKind::DuplicateTaxon);
  EXPECT_EQ(kind_of([] { parse_newick("(1:1);"); }), ErrorKind::FewerThanTwoTaxa);
  EXPECT_EQ(kind_of([] { parse_newick("((1:1,2:1),3:2);"); }), ErrorKind::SyntaxError);
  EXPECT_EQ(kind_of([] { parse_newick("(1:1,2:1)"); }), ErrorKind::SyntaxError);
}

TEST(ParseNewick, SyntaxErrorReportsPosition) {
  try {
    parse_newick("(1:1,2:x);");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SyntaxError);
    EXPECT_NE(std::string(e.what()).find("position 7"), std::string::npos) << e.what();
  }
}

TEST(ParseNewick, RoundedLengthsWithinTolerance) {
  TTree x = parse_newick("((a:0.3333333,b:0.3333333):0.6666667,c:1.0000001);");
  EXPECT_NEAR(x.height(), 1.0, 1e-6);
}

TEST(ParseNewick, TiesBecomeBoundaryTree) {
  TTree x = parse_newick("((1:2,2:2):2,(3:2,4:2):2);");
  EXPECT_EQ(x.t(), (std::vector<double>{2, 2, 4}));
  EXPECT_FALSE(x.fully_resolved());
}

TEST(WriteNewick, StarTree) {
  TTree star = parse_ranked("(1,2,3,4):2.5");
  EXPECT_EQ(write_newick(star), "(1:2.5,2:2.5,3:2.5,4:2.5);");
  EXPECT_TRUE(same_tree(parse_newick(write_newick(star)), star, 0.0));
}

TEST(WriteNewick, CrossedCherryTreeRoundTrip) {
  TTree x = parse_ranked("(1,2|3|4):1;(1,2|3,4):8;(1,2,3,4):9");
  TTree y = parse_newick(write_newick(x));
  EXPECT_EQ(y.t(), (std::vector<double>{1, 8, 9}));
  EXPECT_EQ(y.topology(), x.topology());
}

TEST(WriteNewick, RoundTripRandomTrees) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    TTree x = to_t(testing_util::random_tau(3 + s % 6, s));
    TTree y = parse_newick(write_newick(x));
    ASSERT_EQ(y.topology(), x.topology());
    for (std::size_t i = 0; i < x.t().size(); ++i) ASSERT_NEAR(x.t()[i], y.t()[i], 1e-9);
  }
}

TEST(WriteNewick, QuotesAwkwardLabels) {
  TTree x = parse_newick("('a b':1,'it''s':1);");
  EXPECT_EQ(x.topology().taxa().label(1), "it's");
  TTree y = parse_newick(write_newick(x));
  EXPECT_EQ(y.topology().taxa(), x.topology().taxa());
}

TEST(Ranked, ParseExamples) {
  TTree x = parse_ranked("(1,2|3|4):1;(1,2|3,4):8;(1,2,3,4):9");
  EXPECT_EQ(x.t(), (std::vector<double>{1, 8, 9}));
  TTree permuted = parse_ranked("(1,2|3,4):8;(1,2|3|4):1;(1,2,3,4):9");
  EXPECT_EQ(permuted.topology(), x.topology());
  EXPECT_EQ(permuted.t(), x.t());
  EXPECT_EQ(kind_of([] { parse_ranked("(1,3|2|4):1;(1,2|3,4):8;(1,2,3,4):9"); }), ErrorKind::ChainViolation);
  EXPECT_EQ(kind_of([] { parse_ranked("(1,2|3|4):9;(1,2|3,4):8;(1,2,3,4):1"); }), ErrorKind::NonMonotoneTimes);
  EXPECT_EQ(kind_of([] { parse_ranked("(1,2|3|4):1;(1,2|3,4):1;(1,2,3,4):9"); }), ErrorKind::NonMonotoneTimes);
  EXPECT_EQ(kind_of([] { parse_ranked("(1,2|3|4):1;(1,2|3,4):8"); }), ErrorKind::ChainViolation);
  EXPECT_EQ(kind_of([] { parse_ranked("(1,2|3|4:1"); }), ErrorKind::SyntaxError);
}

TEST(Ranked, WhitespaceInsignificant) {
  TTree x = parse_ranked(" ( 1 , 2 | 3 | 4 ) : 1 ; (1,2|3,4):8 ;(1,2,3,4):9 ");
  EXPECT_EQ(x.t(), (std::vector<double>{1, 8, 9}));
}

TEST(Ranked, RoundTrip) {
  const std::string text = "(1,2|3|4):1;(1,2|3,4):8;(1,2,3,4):9";
  EXPECT_EQ(write_ranked(parse_ranked(text)), text);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    TTree x = to_t(testing_util::random_tau(3 + s % 6, s + 5000));
    TTree y = parse_ranked(write_ranked(x));
    ASSERT_EQ(y.topology(), x.topology());
    for (std::size_t i = 0; i < x.t().size(); ++i) ASSERT_NEAR(x.t()[i], y.t()[i], 1e-9);
  }
}

TEST(Files, SkipsBlankAndCommentLines) {
  std::istringstream in("# two trees\n\n(1:1,2:1);\n   \n# more\n(1:2,2:2);\n");
  auto trees = read_trees(in, TreeFormat::newick);
  ASSERT_EQ(trees.size(), 2u);
  EXPECT_EQ(trees[1].height(), 2.0);
}
