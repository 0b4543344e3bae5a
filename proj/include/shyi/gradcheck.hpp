#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "shyi/attention_map.hpp"
#include "shyi/config.hpp"
#include "shyi/losses.hpp"
#include "shyi/pairs.hpp"
#include "shyi/random_instances.hpp"
#include "shyi/toy_model.hpp"

namespace shyi {

inline constexpr double kFiniteDifferenceStep = 1e-4;
inline constexpr double kGradientTolerance = 1e-4;
inline constexpr double kGradientFloor = 1e-8;

// Central differences of a scalar function of a flat parameter vector.
inline std::vector<double> finite_difference(const std::function<double(std::span<const double>)>& f,
                                             std::vector<double> x,
                                             double h = kFiniteDifferenceStep) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

struct GradientComparison {
  double worst_relative = 0.0;
  std::size_t compared = 0;  // entries above the magnitude floor
  std::size_t failures = 0;
};

// Elementwise |a - f| / max(|a|, |f|) on entries where max(|a|, |f|) > floor.
inline GradientComparison compare_gradients(std::span<const double> analytic,
                                            std::span<const double> numeric,
                                            double tolerance = kGradientTolerance,
                                            double floor = kGradientFloor) {
  GradientComparison c;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
    if (!std::isfinite(analytic[i]) || !std::isfinite(numeric[i])) {
      ++c.failures;
      c.worst_relative = INFINITY;
      continue;
    }
    if (scale <= floor) continue;
    const double rel = std::abs(analytic[i] - numeric[i]) / scale;
    ++c.compared;
    c.worst_relative = std::max(c.worst_relative, rel);
    if (rel > tolerance) ++c.failures;
  }
  return c;
}

inline std::vector<double> flatten(std::span<const Plane> planes) {
  std::vector<double> out;
  for (const auto& p : planes) out.insert(out.end(), p.values.begin(), p.values.end());
  return out;
}

inline std::vector<AttentionMap> unflatten_maps(std::span<const double> flat, std::size_t count,
                                                std::size_t height, std::size_t width) {
  std::vector<AttentionMap> out;
  const std::size_t n = height * width;
  for (std::size_t j = 0; j < count; ++j) {
    out.emplace_back(height, width,
                     std::vector<double>(flat.begin() + static_cast<long>(j * n),
                                         flat.begin() + static_cast<long>((j + 1) * n)));
  }
  return out;
}

// Loss of the masked total as a function of the live maps only; detached and
// previous-step maps stay at the values in `fixed`.
inline double masked_total(const PairCollection& pairs, std::span<const AttentionMap> live,
                           const MapSet& fixed, const LossParams& params,
                           const ObjectiveWeights& weights, const ObjectiveMask& mask) {
  const MapSet set{live, fixed.frozen.empty() ? fixed.current : fixed.frozen, fixed.previous};
  return *evaluate_losses(pairs, set, params, weights, mask).breakdown.total;
}

struct GradcheckCase {
  std::string label;
  GradientComparison result;
};

struct GradcheckReport {
  std::vector<GradcheckCase> cases;
  double worst_relative = 0.0;
  std::string worst_label;
  std::size_t failures = 0;

  bool passed() const { return failures == 0 && !cases.empty(); }
};

struct GradcheckOptions {
  std::size_t trials = 20;
  std::uint64_t seed = 4913;
  std::size_t height = 4;
  std::size_t width = 4;
  std::size_t channels = 3;
  FaultInjection fault;
};

// Random prompts and latents through every loss path: each objective alone
// and all three together, differentiated both w.r.t. the maps and w.r.t. the
// toy-model latent, against central differences of the frozen-detachment
// function.
inline GradcheckReport run_gradcheck(const GuidanceConfig& config,
                                     const GradcheckOptions& opt = {}) {
  GradcheckReport report;
  std::mt19937_64 rng(opt.seed);
  const LossParams params = config.loss_params();
  const std::size_t side = std::max({opt.height, opt.width, params.big_kernel.radius() + 1,
                                     params.small_kernel.radius() + 1});
  const std::size_t h = std::max(opt.height, side);
  const std::size_t w = std::max(opt.width, side);

  std::vector<std::pair<std::string, ObjectiveMask>> masks;
  for (auto o : kObjectives) masks.emplace_back(std::string(objective_name(o)), ObjectiveMask::only(o));
  masks.emplace_back("masked_total", ObjectiveMask::all());

  auto note = [&](std::string label, const GradientComparison& c) {
    if (c.worst_relative > report.worst_relative || report.worst_label.empty()) {
      report.worst_relative = c.worst_relative;
      report.worst_label = label;
    }
    report.failures += c.failures;
    report.cases.push_back({std::move(label), c});
  };

  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    RandomGraphOptions gopt;
    gopt.min_vertices = 2;
    gopt.max_vertices = 3;
    gopt.max_group_size = 2;
    gopt.max_edges = 2;
    gopt.max_action_tokens = 2;
    const auto graph = random_graph(rng, gopt);
    const auto n = graph.tokens.size();
    const PairCollection pairs = build_pairs(graph, true);

    ObjectiveWeights weights = config.weights;
    std::uniform_real_distribution<double> wdist(0.25, 2.0);
    for (auto o : kObjectives) weights[o] = wdist(rng);

    // Map space.
    const auto maps = random_maps(rng, n, h, w);
    const auto prev = random_maps(rng, n, h, w);
    const MapSet fixed{maps, maps, prev};
    std::vector<double> flat;
    for (const auto& m : maps) flat.insert(flat.end(), m.values().begin(), m.values().end());

    // Latent space through the toy model.
    ToyModelConfig mc;
    mc.height = h;
    mc.width = w;
    mc.channels = opt.channels;
    mc.temperature = 1.0;
    mc.seed = rng();
    const auto emb = make_embeddings(n, mc.channels, mc.seed);
    const auto z0 = init_latent(mc);
    const auto zmaps = forward(z0, emb, mc.temperature);
    const MapSet zfixed{zmaps, zmaps, prev};

    for (const auto& [name, mask] : masks) {
      const auto eval = evaluate_losses(pairs, {maps, maps, prev}, params, weights, mask, opt.fault);
      if (!eval.breakdown.total) continue;
      const auto analytic = flatten(eval.map_gradient);
      const auto numeric = finite_difference(
          [&](std::span<const double> x) {
            const auto live = unflatten_maps(x, n, h, w);
            return masked_total(pairs, live, fixed, params, weights, mask);
          },
          flat);
      note("trial " + std::to_string(trial) + " " + name + " wrt maps",
           compare_gradients(analytic, numeric));

      const auto zeval =
          evaluate_losses(pairs, {zmaps, zmaps, prev}, params, weights, mask, opt.fault);
      const auto zgrad = backward(z0, emb, mc.temperature, zeval.map_gradient);
      const auto znum = finite_difference(
          [&](std::span<const double> x) {
            LatentState z = z0;
            z.values.assign(x.begin(), x.end());
            const auto live = forward(z, emb, mc.temperature);
            return masked_total(pairs, live, zfixed, params, weights, mask);
          },
          z0.values);
      note("trial " + std::to_string(trial) + " " + name + " wrt latent",
           compare_gradients(zgrad.values, znum));
    }
  }
  return report;
}

}  // namespace shyi
