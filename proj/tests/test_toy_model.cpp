#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "shyi/gradcheck.hpp"
#include "shyi/guidance.hpp"
#include "shyi/toy_model.hpp"

using namespace shyi;

namespace {

ToyModelConfig small_config(std::uint64_t seed) {
  ToyModelConfig c;
  c.height = 4;
  c.width = 4;
  c.channels = 3;
  c.temperature = 1.0;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Embeddings, UnitRowsAndSeeded) {
  const auto e = make_embeddings(7, 5, 42);
  for (std::size_t j = 0; j < e.count; ++j) {
    const auto r = e.row(j);
    EXPECT_NEAR(std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0)), 1.0, 1e-12);
  }
  EXPECT_EQ(make_embeddings(7, 5, 42).rows, e.rows);
  EXPECT_NE(make_embeddings(7, 5, 43).rows, e.rows);
}

TEST(Forward, SimplexAtEveryPixel) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    ToyModelConfig c;
    c.height = 2 + rng() % 10;
    c.width = 2 + rng() % 10;
    c.channels = 1 + rng() % 16;
    c.temperature = 0.1 + (rng() % 100) / 50.0;
    c.seed = rng();
    const std::size_t n = 1 + rng() % 8;
    const auto maps = forward(init_latent(c), make_embeddings(n, c.channels, c.seed), c.temperature);
    ASSERT_EQ(maps.size(), n);
    for (std::size_t r = 0; r < c.height; ++r) {
      for (std::size_t col = 0; col < c.width; ++col) {
        double s = 0.0;
        for (const auto& m : maps) {
          s += m.at(r, col);
          EXPECT_GT(m.at(r, col), 0.0);
          if (n > 1) {
            EXPECT_LT(m.at(r, col), 1.0);
          }
        }
        EXPECT_NEAR(s, 1.0, 1e-9);
      }
    }
  }
}

TEST(Forward, SingleTokenIsOne) {
  const auto c = small_config(3);
  const auto maps = forward(init_latent(c), make_embeddings(1, 3, 3), 1.0);
  for (double v : maps[0].values()) EXPECT_EQ(v, 1.0);
}

TEST(Forward, ZeroLatentIsUniform) {
  const LatentState z(4, 5, 6, 0.0);
  const auto maps = forward(z, make_embeddings(4, 6, 9), 0.3);
  for (const auto& m : maps) {
    for (double v : m.values()) EXPECT_NEAR(v, 0.25, 1e-15);
  }
}

TEST(Forward, DimensionMismatch) {
  const LatentState z(4, 4, 3, 0.0);
  EXPECT_THROW(forward(z, make_embeddings(2, 4, 1), 1.0), InputError);
}

// A scalar probe of the maps, differentiated through backward().
TEST(Backward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = small_config(rng());
    const std::size_t n = 2 + rng() % 3;
    const auto e = make_embeddings(n, c.channels, c.seed);
    const auto z = init_latent(c);
    std::vector<Plane> weights;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      Plane p(c.height, c.width, 0.0);
      for (double& v : p.values) v = u(rng);
      weights.push_back(p);
    }
    auto probe = [&](std::span<const double> x) {
      LatentState zz = z;
      zz.values.assign(x.begin(), x.end());
      const auto maps = forward(zz, e, c.temperature);
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < maps[j].size(); ++i) s += weights[j].values[i] * maps[j].values()[i];
      }
      return s;
    };
    const auto analytic = backward(z, e, c.temperature, weights);
    const auto numeric = finite_difference(probe, z.values);
    EXPECT_EQ(compare_gradients(analytic.values, numeric).failures, 0u);
  }
}

TEST(Perturb, ZeroSigmaIsIdentityAndSeeded) {
  const auto c = small_config(5);
  const auto z = init_latent(c);
  std::mt19937_64 a(1), b(1);
  EXPECT_EQ(step_perturb(z, 0.0, a), z);
  a.seed(1);
  EXPECT_EQ(step_perturb(z, 0.3, a), step_perturb(z, 0.3, b));
  EXPECT_THROW(step_perturb(z, -1.0, a), InputError);
}

TEST(Perturb, UnitVarianceNoise) {
  const LatentState z(100, 100, 10, 0.0);  // 1e5 entries
  std::mt19937_64 rng(6);
  const auto out = step_perturb(z, 1.0, rng);
  double mean = 0.0, sq = 0.0;
  for (double v : out.values) mean += v;
  mean /= static_cast<double>(out.values.size());
  for (double v : out.values) sq += (v - mean) * (v - mean);
  const double var = sq / static_cast<double>(out.values.size() - 1);
  EXPECT_GE(var, 0.98);
  EXPECT_LE(var, 1.02);
}

TEST(InitLatent, SeededStandardNormal) {
  ToyModelConfig c;
  c.height = 100;
  c.width = 100;
  c.channels = 10;
  c.seed = 11;
  const auto z = init_latent(c);
  EXPECT_EQ(z.values.size(), 100000u);
  EXPECT_EQ(init_latent(c), z);
  const double mean = std::accumulate(z.values.begin(), z.values.end(), 0.0) / 1e5;
  EXPECT_GE(mean, -0.02);
  EXPECT_LE(mean, 0.02);
  c.seed = 12;
  EXPECT_NE(init_latent(c), z);
}

TEST(ModelConfig, Validation) {
  ToyModelConfig c;
  c.temperature = 0.0;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.channels = 0;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.perturb_sigma = -0.1;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(ToyAttentionModelTest, WrapsFreeFunctions) {
  const auto c = small_config(8);
  const ToyAttentionModel model(3, c);
  EXPECT_EQ(model.token_count(), 3u);
  const auto z = init_latent(c);
  EXPECT_EQ(model.forward(z), forward(z, make_embeddings(3, c.channels, c.seed), c.temperature));
}
