#include <gtest/gtest.h>

#include <random>

#include "attnparse/distance.hpp"
#include "attnparse/synthetic.hpp"

using namespace attnparse;

namespace {

BinaryTree tree_of(const std::string& shape) {
  // "((1 2) 3)" style shapes over 1..z
  std::size_t pos = 0;
  std::function<BinaryTree()> parse = [&]() -> BinaryTree {
    while (shape[pos] == ' ') ++pos;
    if (shape[pos] == '(') {
      ++pos;
      auto l = parse();
      auto r = parse();
      while (shape[pos] == ' ') ++pos;
      ++pos;  // ')'
      return BinaryTree::join(l, r);
    }
    std::size_t end = pos;
    while (std::isdigit(static_cast<unsigned char>(shape[end]))) ++end;
    const auto v = std::stoul(shape.substr(pos, end - pos));
    pos = end;
    return BinaryTree::leaf(v);
  };
  return parse();
}

}  // namespace

TEST(TreeToDistance, WorkedExamples) {
  EXPECT_EQ(tree_to_distance(BinaryTree::leaf(1)), DistanceVector{});
  EXPECT_EQ(tree_to_distance(tree_of("(1 2)")), (DistanceVector{1}));
  EXPECT_EQ(tree_to_distance(tree_of("((1 2) 3)")), (DistanceVector{1, 2}));
  EXPECT_EQ(tree_to_distance(tree_of("(1 (2 3))")), (DistanceVector{2, 1}));
  EXPECT_EQ(tree_to_distance(tree_of("((1 2) (3 4))")), (DistanceVector{1, 2, 1}));
  EXPECT_EQ(tree_to_distance(tree_of("(((1 2) 3) (4 5))")), (DistanceVector{1, 2, 3, 1}));
}

TEST(TreeToDistance, RootGapIsStrictMaximum) {
  synthetic::Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const std::size_t z = 2 + rng() % 14;
    const auto t = synthetic::random_tree(z, rng);
    const auto d = tree_to_distance(t);
    ASSERT_EQ(d.size(), z - 1);
    const std::size_t root_gap = t.node(t.root().left).last - 1;
    for (std::size_t g = 0; g < d.size(); ++g) {
      if (g != root_gap) EXPECT_LT(d[g], d[root_gap]);
    }
  }
}

TEST(DistanceToTree, LeftmostTieBreak) {
  EXPECT_EQ(distance_to_tree(DistanceVector{1, 1}).to_string(), "(1 (2 3))");
  EXPECT_EQ(distance_to_tree(DistanceVector{0, 0, 0}).to_string(), "(1 (2 (3 4)))");
  EXPECT_EQ(distance_to_tree(DistanceVector{}).to_string(), "1");
  EXPECT_EQ(distance_to_tree(DistanceVector{0.2, 0.9, 0.1}).to_string(), "((1 2) (3 4))");
}

TEST(DistanceToTree, RoundTrip) {
  synthetic::Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t z = 1 + rng() % 12;
    const auto t = synthetic::random_tree(z, rng);
    ASSERT_EQ(distance_to_tree(tree_to_distance(t)), t) << t.to_string();
  }
}

TEST(DistanceToTree, InvariantUnderMonotoneTransforms) {
  synthetic::Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 300; ++i) {
    DistanceVector d(1 + rng() % 12);
    for (auto& v : d) v = std::round(u(rng));  // rounding creates ties
    DistanceVector e = d;
    for (auto& v : e) v = std::exp(0.7 * v) + 3.0;
    EXPECT_EQ(distance_to_tree(d), distance_to_tree(e));
  }
}

TEST(AverageDistances, ElementwiseMean) {
  const std::vector<DistanceVector> vs = {{0, 2, 4}, {2, 2, 0}};
  EXPECT_EQ(average_distances(vs), (DistanceVector{1, 2, 2}));
  const std::vector<DistanceVector> one = {{0.5, 0.25}};
  EXPECT_EQ(average_distances(one), one[0]);
}

TEST(AverageDistances, RejectsBadInput) {
  EXPECT_THROW(average_distances(std::vector<DistanceVector>{}), std::invalid_argument);
  const std::vector<DistanceVector> mismatched = {{0, 1}, {0}};
  EXPECT_THROW(average_distances(mismatched), std::invalid_argument);
}

TEST(AverageDistances, IdenticalHeadsGiveTheSameTree) {
  synthetic::Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto t = synthetic::random_tree(2 + rng() % 10, rng);
    const auto d = tree_to_distance(t);
    const std::vector<DistanceVector> copies(4, d);
    EXPECT_EQ(distance_to_tree(average_distances(copies)), t);
  }
}

TEST(RankNormalize, AverageRanks) {
  const auto r = rank_normalize(DistanceVector{3.0, 1.0, 3.0, 2.0});
  EXPECT_EQ(r, (DistanceVector{3.5 / 4, 1.0 / 4, 3.5 / 4, 2.0 / 4}));
  EXPECT_TRUE(rank_normalize(DistanceVector{}).empty());
}

TEST(RankNormalize, PreservesTree) {
  synthetic::Rng rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    DistanceVector d(1 + rng() % 10);
    for (auto& v : d) v = u(rng);
    EXPECT_EQ(distance_to_tree(rank_normalize(d)), distance_to_tree(d));
  }
}
