#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "shyi/gradcheck.hpp"
#include "shyi/similarity.hpp"

using namespace shyi;

namespace {

AttentionMap random_map(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> v(h * w);
  for (double& x : v) x = u(rng);
  return AttentionMap(h, w, std::move(v));
}

}  // namespace

TEST(Cosine, HandExamples) {
  const AttentionMap a(1, 2, {1, 0});
  const AttentionMap b(1, 2, {1, 1});
  EXPECT_NEAR(cosine_similarity(a, b), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cosine_similarity(b, b), 1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(a, AttentionMap(1, 2, {0, 3})), 0.0);
}

TEST(Cosine, Errors) {
  EXPECT_THROW(cosine_similarity(AttentionMap::constant(2, 2, 1), AttentionMap::constant(1, 4, 1)),
               InputError);
  const std::vector<double> zero{0, 0}, one{1, 0};
  EXPECT_THROW(cosine_similarity(std::span<const double>(zero), std::span<const double>(one)),
               InputError);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_map(rng, 4, 5);
    const auto b = random_map(rng, 4, 5);
    EXPECT_EQ(cosine_similarity(a, b), cosine_similarity(b, a));
    const double c = scale(rng);
    std::vector<double> scaled(a.values().begin(), a.values().end());
    for (double& v : scaled) v *= c;
    EXPECT_NEAR(cosine_similarity(AttentionMap(4, 5, scaled), b), cosine_similarity(a, b), 1e-12);
    const double s = cosine_similarity(a, b);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Cosine, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_map(rng, 3, 4);
    const auto b = random_map(rng, 3, 4);
    std::vector<double> ga(12, 0.0), gb(12, 0.0);
    cosine_backward(a.values(), b.values(), 1.0, ga, gb);
    const std::vector<double> av(a.values().begin(), a.values().end());
    const std::vector<double> bv(b.values().begin(), b.values().end());
    const auto na = finite_difference(
        [&](std::span<const double> x) { return cosine_similarity(x, std::span<const double>(bv)); }, av);
    const auto nb = finite_difference(
        [&](std::span<const double> x) { return cosine_similarity(std::span<const double>(av), x); }, bv);
    EXPECT_EQ(compare_gradients(ga, na).failures, 0u);
    EXPECT_EQ(compare_gradients(gb, nb).failures, 0u);
  }
}

// At a == b the gradient of cos(a, b_const) vanishes.
TEST(Cosine, GradientAtSelfIsZero) {
  std::mt19937_64 rng(29);
  const auto a = random_map(rng, 3, 3);
  std::vector<double> ga(9, 0.0);
  cosine_backward(a.values(), a.values(), 1.0, ga, {});
  for (double g : ga) EXPECT_NEAR(g, 0.0, 1e-15);
}
