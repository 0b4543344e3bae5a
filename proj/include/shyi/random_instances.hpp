#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "shyi/attention_map.hpp"
#include "shyi/hypergraph.hpp"

namespace shyi {

struct RandomGraphOptions {
  std::size_t min_vertices = 1;
  std::size_t max_vertices = 4;
  std::size_t max_group_size = 3;
  std::size_t max_edges = 2;
  std::size_t max_action_tokens = 1;
  std::size_t max_environment = 2;
};

// Random valid hypergraph. Token order: vertices, then actions, then
// environment. Edges need at least two vertices.
inline SemanticHypergraph random_graph(std::mt19937_64& rng, const RandomGraphOptions& opt = {}) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  SemanticHypergraph g;
  auto add_token = [&](const std::string& prefix) {
    const std::size_t i = g.tokens.size();
    g.tokens.push_back({i, prefix + std::to_string(i)});
    return i;
  };
  const std::size_t nv = pick(opt.min_vertices, opt.max_vertices);
  for (std::size_t v = 0; v < nv; ++v) {
    NounGroup group{"v" + std::to_string(v), {}};
    const std::size_t size = pick(1, opt.max_group_size);
    for (std::size_t k = 0; k < size; ++k) group.token_indices.push_back(add_token("n"));
    g.vertices.push_back(std::move(group));
  }
  const std::size_t ne = nv >= 2 ? pick(0, opt.max_edges) : 0;
  for (std::size_t e = 0; e < ne; ++e) {
    ActionEdge edge{"e" + std::to_string(e), {}, {}};
    const std::size_t na = pick(1, opt.max_action_tokens);
    for (std::size_t k = 0; k < na; ++k) edge.action_token_indices.push_back(add_token("a"));
    std::vector<std::size_t> order(nv);
    for (std::size_t i = 0; i < nv; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t m = pick(2, nv);
    for (std::size_t k = 0; k < m; ++k) edge.party_ids.push_back(g.vertices[order[k]].id);
    g.edges.push_back(std::move(edge));
  }
  const std::size_t nenv = pick(0, opt.max_environment);
  for (std::size_t k = 0; k < nenv; ++k) g.environment_token_indices.push_back(add_token("w"));
  return g;
}

// Maps with entries uniform in [lo, hi], lo > 0.
inline std::vector<AttentionMap> random_maps(std::mt19937_64& rng, std::size_t count,
                                             std::size_t height, std::size_t width,
                                             double lo = 0.05, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<AttentionMap> out;
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<double> v(height * width);
    for (double& x : v) x = u(rng);
    out.emplace_back(height, width, std::move(v));
  }
  return out;
}

}  // namespace shyi
