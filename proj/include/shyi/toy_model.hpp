#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "shyi/attention_map.hpp"
#include "shyi/error.hpp"

namespace shyi {

// H x W x d real tensor, channel-fastest. Also used for its gradient.
struct LatentState {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  LatentState() = default;
  LatentState(std::size_t h, std::size_t w, std::size_t d, double fill = 0.0)
      : height(h), width(w), channels(d), values(h * w * d, fill) {}

  std::size_t pixels() const noexcept { return height * width; }
  std::span<const double> pixel(std::size_t p) const {
    return std::span<const double>(values).subspan(p * channels, channels);
  }
  bool same_shape(const LatentState& o) const noexcept {
    return height == o.height && width == o.width && channels == o.channels;
  }
  bool finite() const {
    for (double v : values) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const LatentState&) const = default;
};

using LatentGradient = LatentState;

// Row-major n_tokens x dim matrix of unit vectors standing in for the text
// encoder output.
struct TokenEmbeddings {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> rows;

  std::span<const double> row(std::size_t j) const {
    return std::span<const double>(rows).subspan(j * dim, dim);
  }
};

struct ToyModelConfig {
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t channels = 16;
  double temperature = 0.25;
  double perturb_sigma = 0.02;
  std::uint64_t seed = 4913;

  void validate() const {
    if (height < 1 || width < 1 || channels < 1) {
      throw InputError("model dimensions must be positive");
    }
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
      throw InputError("model temperature must be positive");
    }
    if (!(perturb_sigma >= 0.0) || !std::isfinite(perturb_sigma)) {
      throw InputError("perturb_sigma must be nonnegative");
    }
  }
};

// Independent generator streams derived from one run seed.
enum class Stream : std::uint64_t { latent = 1, embeddings = 2, perturb = 3 };

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

inline TokenEmbeddings make_embeddings(std::size_t n_tokens, std::size_t dim,
                                       std::uint64_t seed) {
  if (n_tokens == 0 || dim == 0) throw InputError("embeddings need tokens and dimensions");
  auto rng = make_rng(seed, Stream::embeddings);
  std::normal_distribution<double> normal;
  TokenEmbeddings e{n_tokens, dim, std::vector<double>(n_tokens * dim)};
  for (std::size_t j = 0; j < n_tokens; ++j) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double v = normal(rng);
        e.rows[j * dim + k] = v;
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < dim; ++k) e.rows[j * dim + k] /= norm;
  }
  return e;
}

inline LatentState init_latent(const ToyModelConfig& config) {
  config.validate();
  auto rng = make_rng(config.seed, Stream::latent);
  std::normal_distribution<double> normal;
  LatentState z(config.height, config.width, config.channels);
  for (double& v : z.values) v = normal(rng);
  return z;
}

// z + sigma * eta, eta ~ N(0, 1) drawn from the caller's generator.
inline LatentState step_perturb(const LatentState& z, double sigma, std::mt19937_64& rng) {
  if (!(sigma >= 0.0)) throw InputError("perturbation sigma must be nonnegative");
  if (sigma == 0.0) return z;
  std::normal_distribution<double> normal;
  LatentState out = z;
  for (double& v : out.values) v += sigma * normal(rng);
  return out;
}

namespace detail {

inline void check_model_shapes(const LatentState& z, const TokenEmbeddings& e) {
  if (z.channels != e.dim) {
    throw InputError("latent has " + std::to_string(z.channels) + " channels, embeddings have " +
                     std::to_string(e.dim));
  }
  if (e.count == 0) throw InputError("no token embeddings");
}

// Per-pixel softmax over tokens of <z_p, e_j> / (temperature * sqrt(d)).
inline std::vector<double> pixel_softmax(const LatentState& z, const TokenEmbeddings& e,
                                         double temperature, std::size_t p) {
  const double scale = 1.0 / (temperature * std::sqrt(static_cast<double>(e.dim)));
  const auto zp = z.pixel(p);
  std::vector<double> logits(e.count);
  double peak = -INFINITY;
  for (std::size_t j = 0; j < e.count; ++j) {
    const auto ej = e.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < e.dim; ++k) s += zp[k] * ej[k];
    logits[j] = s * scale;
    peak = std::max(peak, logits[j]);
  }
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - peak);
    total += l;
  }
  for (double& l : logits) l /= total;
  return logits;
}

}  // namespace detail

// Cross-attention stand-in: one map per token, a softmax over tokens at
// every pixel, so the maps sum to 1 pixelwise.
inline std::vector<AttentionMap> forward(const LatentState& z, const TokenEmbeddings& e,
                                         double temperature) {
  detail::check_model_shapes(z, e);
  if (!(temperature > 0.0)) throw InputError("model temperature must be positive");
  std::vector<std::vector<double>> planes(e.count, std::vector<double>(z.pixels()));
  for (std::size_t p = 0; p < z.pixels(); ++p) {
    const auto probs = detail::pixel_softmax(z, e, temperature, p);
    for (std::size_t j = 0; j < e.count; ++j) {
      if (!std::isfinite(probs[j])) throw NumericError("non-finite attention value");
      planes[j][p] = probs[j];
    }
  }
  std::vector<AttentionMap> maps;
  maps.reserve(e.count);
  for (std::size_t j = 0; j < e.count; ++j) {
    auto& v = planes[j];
    if (std::none_of(v.begin(), v.end(), [](double x) { return x > 0.0; })) {
      throw NumericError("attention for token " + std::to_string(j) + " underflowed to zero");
    }
    maps.emplace_back(z.height, z.width, std::move(v));
  }
  return maps;
}

// Chain rule through forward(): given dL/dA_j for every token, returns dL/dz.
inline LatentGradient backward(const LatentState& z, const TokenEmbeddings& e, double temperature,
                               std::span<const Plane> map_gradient) {
  detail::check_model_shapes(z, e);
  if (map_gradient.size() != e.count) throw InputError("one map gradient per token required");
  const double scale = 1.0 / (temperature * std::sqrt(static_cast<double>(e.dim)));
  LatentGradient g(z.height, z.width, z.channels);
  std::vector<double> dlogit(e.count);
  for (std::size_t p = 0; p < z.pixels(); ++p) {
    const auto probs = detail::pixel_softmax(z, e, temperature, p);
    double mean = 0.0;
    for (std::size_t j = 0; j < e.count; ++j) mean += probs[j] * map_gradient[j].values[p];
    for (std::size_t j = 0; j < e.count; ++j) {
      dlogit[j] = probs[j] * (map_gradient[j].values[p] - mean) * scale;
    }
    for (std::size_t j = 0; j < e.count; ++j) {
      const auto ej = e.row(j);
      for (std::size_t k = 0; k < e.dim; ++k) g.values[p * z.channels + k] += dlogit[j] * ej[k];
    }
  }
  return g;
}

}  // namespace shyi
