#pragma once

#include <concepts>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shyi/attention_map.hpp"
#include "shyi/config.hpp"
#include "shyi/error.hpp"
#include "shyi/hypergraph.hpp"
#include "shyi/losses.hpp"
#include "shyi/metrics.hpp"
#include "shyi/pairs.hpp"
#include "shyi/schedule.hpp"
#include "shyi/toy_model.hpp"

namespace shyi {

// Anything that turns a latent into per-token attention maps and can pull a
// map gradient back onto the latent.
template <typename M>
concept AttentionSource = requires(const M& m, const LatentState& z, std::span<const Plane> g,
                                   std::mt19937_64& rng) {
  { m.token_count() } -> std::convertible_to<std::size_t>;
  { m.forward(z) } -> std::same_as<std::vector<AttentionMap>>;
  { m.backward(z, g) } -> std::same_as<LatentGradient>;
  { m.step_perturb(z, rng) } -> std::same_as<LatentState>;
};

class ToyAttentionModel {
 public:
  ToyAttentionModel(std::size_t n_tokens, const ToyModelConfig& config)
      : config_(config), embeddings_(make_embeddings(n_tokens, config.channels, config.seed)) {
    config_.validate();
  }

  std::size_t token_count() const { return embeddings_.count; }
  const TokenEmbeddings& embeddings() const { return embeddings_; }
  const ToyModelConfig& config() const { return config_; }

  std::vector<AttentionMap> forward(const LatentState& z) const {
    return shyi::forward(z, embeddings_, config_.temperature);
  }

  LatentGradient backward(const LatentState& z, std::span<const Plane> g) const {
    return shyi::backward(z, embeddings_, config_.temperature, g);
  }

  LatentState step_perturb(const LatentState& z, std::mt19937_64& rng) const {
    return shyi::step_perturb(z, config_.perturb_sigma, rng);
  }

 private:
  ToyModelConfig config_;
  TokenEmbeddings embeddings_;
};

static_assert(AttentionSource<ToyAttentionModel>);

struct MetricsRow {
  std::size_t step = 0;       // diffusion timestep t, counting down
  std::size_t iteration = 0;  // K marks the end-of-step state
  ObjectiveMask mask;
  LossBreakdown breakdown;
  std::vector<double> ious;       // vertex pairs, vertex order
  std::vector<double> adjacency;  // linked_pairs(graph) order
  bool applied = false;           // whether this row's gradient moved the latent
};

struct StepRecord {
  std::size_t step = 0;
  std::vector<AttentionMap> maps;  // end of step, before perturbation
  std::size_t dropped_pair_sets = 0;
};

struct Trajectory {
  std::vector<MetricsRow> rows;
  std::vector<StepRecord> steps;
  std::vector<LinkedPair> linked;
  std::vector<std::string> iou_labels;
  LatentState initial_latent;
  LatentState final_latent;
  std::vector<AttentionMap> final_maps;
  double initial_iou = 0.0;
  double final_iou = 0.0;
  std::vector<double> initial_adjacency;
  std::vector<double> final_adjacency;
  std::size_t dropped_pair_sets = 0;
  std::size_t updates_applied = 0;
};

// Non-finite state during a run. Carries where it happened and the rows
// recorded so far for a diagnostic dump.
class GuidanceAbort : public NumericError {
 public:
  GuidanceAbort(const std::string& what, std::size_t step, std::size_t iteration,
                Trajectory partial)
      : NumericError(what + " at step " + std::to_string(step) + ", iteration " +
                     std::to_string(iteration)),
        step_(step),
        iteration_(iteration),
        partial_(std::move(partial)) {}

  std::size_t step() const { return step_; }
  std::size_t iteration() const { return iteration_; }
  const Trajectory& partial() const { return partial_; }

 private:
  std::size_t step_;
  std::size_t iteration_;
  Trajectory partial_;
};

namespace detail {

inline std::vector<double> adjacency_all(const SemanticHypergraph& g,
                                         std::span<const AttentionMap> maps,
                                         const std::vector<LinkedPair>& linked,
                                         const SmoothingKernel& big) {
  std::vector<double> out;
  for (const auto& lp : linked) out.push_back(adjacency_score(g, maps, lp.u, lp.v, big));
  return out;
}

}  // namespace detail

// Simulated reverse process: for t = T-1 .. 0, rebuild pairs (previous-step
// maps from t+1 after the first step), take K single-objective gradient steps
// on the latent, then let the model drift the latent to the next step.
template <AttentionSource Model>
Trajectory run_guidance(const Model& model, const SemanticHypergraph& graph,
                        const GuidanceConfig& config, LatentState z, std::mt19937_64& rng,
                        const FaultInjection& fault = {}) {
  config.validate();
  graph.validate();
  if (model.token_count() != graph.tokens.size()) {
    throw InputError("model has " + std::to_string(model.token_count()) + " tokens, prompt has " +
                     std::to_string(graph.tokens.size()));
  }
  const LossParams params = config.loss_params();
  const auto& steps = config.steps;

  Trajectory traj;
  traj.linked = linked_pairs(graph);
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    for (std::size_t k = i + 1; k < graph.vertices.size(); ++k) {
      traj.iou_labels.push_back(graph.vertices[i].id + "_" + graph.vertices[k].id);
    }
  }
  traj.initial_latent = z;

  std::vector<AttentionMap> previous;
  std::size_t global_iteration = 0;
  std::size_t step = steps.timesteps - 1;
  std::size_t iteration = 0;

  auto record = [&](const std::vector<AttentionMap>& maps, const LossEvaluation& eval,
                    const ObjectiveMask& mask) {
    MetricsRow row;
    row.step = step;
    row.iteration = iteration;
    row.mask = mask;
    row.breakdown = eval.breakdown;
    row.ious = vertex_ious(graph, maps, config.quantile);
    row.adjacency = detail::adjacency_all(graph, maps, traj.linked, params.big_kernel);
    traj.rows.push_back(std::move(row));
  };

  try {
    for (std::size_t index = 0; index < steps.timesteps; ++index) {
      step = steps.timesteps - 1 - index;
      const bool have_previous = index > 0;
      const PairCollection pairs = build_pairs(graph, have_previous);
      traj.dropped_pair_sets += pairs.dropped;

      std::vector<AttentionMap> maps = model.forward(z);
      if (index == 0) {
        traj.initial_iou = mean_vertex_iou(graph, maps, config.quantile);
        traj.initial_adjacency = detail::adjacency_all(graph, maps, traj.linked, params.big_kernel);
      }
      const std::size_t iterations = steps.guided(index) ? steps.iterations_per_step : 0;
      const double alpha = steps.alpha_at(index);
      for (iteration = 0; iteration < iterations; ++iteration, ++global_iteration) {
        const ObjectiveMask mask = active_objectives(global_iteration, config.loss_schedule);
        const MapSet set{maps, {}, previous};
        const LossEvaluation eval =
            evaluate_losses(pairs, set, params, config.weights, mask, fault);
        record(maps, eval, mask);
        if (eval.map_gradient.empty() || alpha == 0.0) continue;
        const LatentGradient grad = model.backward(z, eval.map_gradient);
        if (!grad.finite()) throw NumericError("non-finite gradient");
        z = update_latent(z, grad, alpha);
        traj.rows.back().applied = true;
        ++traj.updates_applied;
        maps = model.forward(z);
      }
      iteration = iterations;
      {
        const MapSet set{maps, {}, previous};
        record(maps, evaluate_losses(pairs, set, params, config.weights, ObjectiveMask::none()),
               ObjectiveMask::none());
      }
      traj.steps.push_back({step, maps, pairs.dropped});
      previous = maps;
      if (index + 1 < steps.timesteps) {
        z = model.step_perturb(z, rng);
        if (!z.finite()) throw NumericError("non-finite latent after perturbation");
      }
    }
  } catch (const NumericError& ex) {
    traj.final_latent = z;
    throw GuidanceAbort(ex.what(), step, iteration, std::move(traj));
  }

  traj.final_latent = z;
  traj.final_maps = traj.steps.back().maps;
  traj.final_iou = mean_vertex_iou(graph, traj.final_maps, config.quantile);
  traj.final_adjacency =
      detail::adjacency_all(graph, traj.final_maps, traj.linked, params.big_kernel);
  return traj;
}

// Toy-model run fully determined by config.model.seed.
inline Trajectory run_toy_guidance(const SemanticHypergraph& graph, const GuidanceConfig& config,
                                   const FaultInjection& fault = {}) {
  const ToyAttentionModel model(graph.tokens.size(), config.model);
  auto rng = make_rng(config.model.seed, Stream::perturb);
  return run_guidance(model, graph, config, init_latent(config.model), rng, fault);
}

// ---- trajectory output -----------------------------------------------------

namespace detail {

inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_real(*v) : ""; }

inline nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline std::string metrics_header(const Trajectory& traj) {
  std::string h =
      "step,iteration,objective_mask,loss_total,loss_vertex_contrast,loss_action_contrast,"
      "loss_link";
  for (const auto& label : traj.iou_labels) h += ",iou_" + label;
  for (const auto& lp : traj.linked) h += ",adj_" + lp.edge + "_" + lp.u + "_" + lp.v;
  return h;
}

inline void write_metrics_csv(std::ostream& out, const Trajectory& traj) {
  out << metrics_header(traj) << '\n';
  for (const auto& r : traj.rows) {
    out << r.step << ',' << r.iteration << ',' << r.mask.code() << ','
        << detail::fmt_opt(r.breakdown.total);
    for (auto o : kObjectives) out << ',' << detail::fmt_opt(r.breakdown[o]);
    for (double v : r.ious) out << ',' << detail::fmt_real(v);
    for (double v : r.adjacency) out << ',' << detail::fmt_real(v);
    out << '\n';
  }
}

inline nlohmann::json breakdown_json(const LossBreakdown& b) {
  nlohmann::json j;
  for (auto o : kObjectives) j[std::string(objective_name(o))] = detail::opt_json(b[o]);
  j["total"] = detail::opt_json(b.total);
  j["active_mask"] = b.active_mask.code();
  j["term_counts"] = {{"vertex_contrast", b.term_counts[0]},
                      {"action_contrast", b.term_counts[1]},
                      {"link", b.term_counts[2]}};
  return j;
}

inline void write_breakdown_jsonl(std::ostream& out, const Trajectory& traj) {
  for (const auto& r : traj.rows) {
    auto j = breakdown_json(r.breakdown);
    j["step"] = r.step;
    j["iteration"] = r.iteration;
    j["applied"] = r.applied;
    out << j.dump() << '\n';
  }
}

// Layout: metrics.csv, breakdown.jsonl, step_<t>/token_<j>.csv|pgm.
inline void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto open = [](const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(dir / "metrics.csv");
    write_metrics_csv(out, traj);
  }
  {
    auto out = open(dir / "breakdown.jsonl");
    write_breakdown_jsonl(out, traj);
  }
  for (const auto& s : traj.steps) {
    const auto sub = dir / ("step_" + std::to_string(s.step));
    fs::create_directories(sub, ec);
    if (ec) throw IoError("cannot create " + sub.string() + ": " + ec.message());
    for (std::size_t j = 0; j < s.maps.size(); ++j) {
      const auto stem = "token_" + std::to_string(j);
      save_csv((sub / (stem + ".csv")).string(), s.maps[j]);
      save_pgm((sub / (stem + ".pgm")).string(), s.maps[j]);
    }
  }
}

}  // namespace shyi
