#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "shyi/metrics.hpp"
#include "shyi/prompt_parser.hpp"

using namespace shyi;

namespace {

RegionMask mask_of(std::size_t h, std::size_t w, std::vector<int> on) {
  RegionMask m{h, w, std::vector<bool>(h * w, false)};
  for (int i : on) m.cells[static_cast<std::size_t>(i)] = true;
  return m;
}

AttentionMap blob(std::size_t h, std::size_t w, std::size_t r, std::size_t c, std::size_t size) {
  std::vector<double> v(h * w, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t k = 0; k < size; ++k) v[(r + i) * w + c + k] = 1.0;
  }
  return AttentionMap(h, w, v);
}

const SemanticHypergraph kPair = parse_annotated("[a]{u} <near>{u,v} [b]{v}");

}  // namespace

TEST(VertexMap, MeanOfMembers) {
  const auto g = parse_annotated("[x y]{u} [z]{v}");
  const std::vector<AttentionMap> maps = {AttentionMap::constant(2, 2, 0.2),
                                          AttentionMap::constant(2, 2, 0.4),
                                          AttentionMap(2, 2, {1, 2, 3, 4})};
  const auto u = vertex_map(g, maps, "u");
  for (double v : u.values()) EXPECT_NEAR(v, 0.3, 1e-15);
  EXPECT_EQ(vertex_map(g, maps, "v"), maps[2]);
  EXPECT_THROW(vertex_map(g, maps, "nope"), InputError);
}

TEST(Binarize, IncreasingRampNearestRank) {
  std::vector<double> v(100);
  for (std::size_t i = 0; i < 100; ++i) v[i] = static_cast<double>(i + 1);
  const auto m = binarize(AttentionMap(1, 100, v), 0.8);
  EXPECT_EQ(m.count(), 21u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(m.cells[i], i >= 79) << i;
}

TEST(Binarize, ConstantAndDelta) {
  EXPECT_EQ(binarize(AttentionMap::constant(3, 4, 0.5), 0.8).count(), 12u);
  std::vector<double> d(81, 0.0);
  d[40] = 1.0;
  const auto m = binarize(AttentionMap(9, 9, d), 0.99);
  EXPECT_EQ(m.count(), 1u);
  EXPECT_TRUE(m.cells[40]);
  EXPECT_THROW(binarize(AttentionMap::constant(2, 2, 1), 1.0), InputError);
  EXPECT_THROW(binarize(AttentionMap::constant(2, 2, 1), 0.0), InputError);
}

TEST(Iou, HandCounts) {
  const auto a = mask_of(2, 4, {0, 1, 2, 3});
  const auto b = mask_of(2, 4, {2, 3, 4, 5});
  EXPECT_NEAR(iou(a, b), 2.0 / 6.0, 1e-15);
  EXPECT_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(a, mask_of(2, 4, {6, 7})), 0.0);
  EXPECT_EQ(iou(mask_of(2, 4, {}), mask_of(2, 4, {})), 0.0);
  EXPECT_THROW(iou(a, mask_of(4, 2, {})), InputError);
}

TEST(Iou, SymmetricAndOneOnlyWhenEqual) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<int> on_a, on_b;
    for (int c = 0; c < 12; ++c) {
      if (rng() % 2) on_a.push_back(c);
      if (rng() % 2) on_b.push_back(c);
    }
    if (on_a.empty()) on_a.push_back(0);
    const auto a = mask_of(3, 4, on_a), b = mask_of(3, 4, on_b);
    EXPECT_EQ(iou(a, b), iou(b, a));
    EXPECT_EQ(iou(a, b) == 1.0, a == b);
  }
}

TEST(Adjacency, IdenticalMapsScoreOne) {
  std::mt19937_64 rng(4);
  std::vector<double> v(64);
  for (double& x : v) x = 0.1 + (rng() % 100) / 100.0;
  const std::vector<AttentionMap> maps(3, AttentionMap(8, 8, v));
  EXPECT_NEAR(adjacency_score(kPair, maps, "u", "v", make_kernel(7, 2.0)), 1.0, 1e-12);
  EXPECT_THROW(adjacency_score(kPair, maps, "u", "u", make_kernel(7, 2.0)), InputError);
}

TEST(Adjacency, FarDeltasScoreZero) {
  const std::vector<AttentionMap> maps = {blob(32, 32, 0, 0, 1), AttentionMap::constant(32, 32, 1),
                                          blob(32, 32, 31, 31, 1)};
  EXPECT_LT(adjacency_score(kPair, maps, "u", "v", make_kernel(7, 1.0)), 1e-6);
}

TEST(Adjacency, AdjacentBeatsSeparated) {
  const auto k = make_kernel(7, 2.0);
  const auto filler = AttentionMap::constant(8, 32, 1);
  const std::vector<AttentionMap> near = {blob(8, 32, 3, 4, 2), filler, blob(8, 32, 3, 6, 2)};
  const std::vector<AttentionMap> far = {blob(8, 32, 3, 4, 2), filler, blob(8, 32, 3, 16, 2)};
  EXPECT_GT(adjacency_score(kPair, near, "u", "v", k), adjacency_score(kPair, far, "u", "v", k));
}

TEST(Adjacency, NonIncreasingWithDistance) {
  const auto k = make_kernel(7, 2.0);
  const auto filler = AttentionMap::constant(8, 40, 1);
  double last = 2.0;
  for (std::size_t gap = 0; gap <= 30; ++gap) {
    const std::vector<AttentionMap> maps = {blob(8, 40, 3, 2, 2), filler, blob(8, 40, 3, 4 + gap, 2)};
    const double s = adjacency_score(kPair, maps, "u", "v", k);
    EXPECT_LE(s, last + 1e-15) << "gap " << gap;
    last = s;
  }
}

TEST(Adjacency, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 30; ++i) {
    std::vector<double> a(100), b(100), c(100);
    for (std::size_t j = 0; j < 100; ++j) {
      a[j] = u(rng);
      b[j] = u(rng);
      c[j] = a[j] * 7.5;
    }
    const auto k = make_kernel(5, 1.5);
    const std::vector<AttentionMap> m1 = {AttentionMap(10, 10, a), AttentionMap(10, 10, a), AttentionMap(10, 10, b)};
    const std::vector<AttentionMap> m2 = {AttentionMap(10, 10, c), AttentionMap(10, 10, a), AttentionMap(10, 10, b)};
    const double s = adjacency_score(kPair, m1, "u", "v", k);
    EXPECT_EQ(s, adjacency_score(kPair, m1, "v", "u", k));
    EXPECT_NEAR(s, adjacency_score(kPair, m2, "u", "v", k), 1e-12);
  }
}

TEST(LinkedPairs, ThreePartyEdge) {
  const auto g = parse_annotated("[a]{x} <meet>{x,y,z} [b]{y} [c]{z}");
  const auto pairs = linked_pairs(g);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0].u, "x");
  EXPECT_EQ(pairs[2].v, "z");
}
