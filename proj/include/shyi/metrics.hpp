#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "shyi/attention_map.hpp"
#include "shyi/error.hpp"
#include "shyi/hypergraph.hpp"
#include "shyi/similarity.hpp"
#include "shyi/smoothing.hpp"

namespace shyi {

struct RegionMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<bool> cells;

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), true));
  }
  bool operator==(const RegionMask&) const = default;
};

// Mean of the member tokens' maps.
inline AttentionMap vertex_map(const SemanticHypergraph& g, std::span<const AttentionMap> maps,
                               const std::string& vertex_id) {
  const auto& v = g.vertex(vertex_id);
  const auto& first = maps[v.token_indices.front()];
  std::vector<double> acc(first.size(), 0.0);
  for (auto t : v.token_indices) {
    if (t >= maps.size()) throw InputError("no map for token " + std::to_string(t));
    const auto& m = maps[t];
    if (!m.same_shape(first)) throw InputError("vertex member maps differ in shape");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m.values()[i];
  }
  const double n = static_cast<double>(v.token_indices.size());
  for (double& x : acc) x /= n;
  return AttentionMap(first.height(), first.width(), std::move(acc));
}

// Cells at or above the nearest-rank q-quantile: the value at sorted rank
// ceil(q * N).
inline RegionMask binarize(const AttentionMap& map, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InputError("quantile must lie in (0, 1)");
  std::vector<double> sorted(map.values().begin(), map.values().end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  const double threshold = sorted[rank - 1];
  RegionMask mask{map.height(), map.width(), std::vector<bool>(n)};
  for (std::size_t i = 0; i < n; ++i) mask.cells[i] = map.values()[i] >= threshold;
  return mask;
}

inline double iou(const RegionMask& a, const RegionMask& b) {
  if (a.height != b.height || a.width != b.width) throw InputError("iou: shape mismatch");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    inter += a.cells[i] && b.cells[i];
    uni += a.cells[i] || b.cells[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Closeness of two vertices' regions: cosine similarity of their vertex maps
// after big-kernel smoothing. Abutting regions share smoothed border mass.
inline double adjacency_score(const SemanticHypergraph& g, std::span<const AttentionMap> maps,
                              const std::string& u, const std::string& v,
                              const SmoothingKernel& big_kernel) {
  if (u == v) throw InputError("adjacency score needs two distinct vertices");
  const auto a = smooth(vertex_map(g, maps, u), big_kernel);
  const auto b = smooth(vertex_map(g, maps, v), big_kernel);
  return cosine_similarity(a, b);
}

// Pairwise IoU of binarized vertex maps, in vertex order (i < k).
inline std::vector<double> vertex_ious(const SemanticHypergraph& g,
                                       std::span<const AttentionMap> maps, double q) {
  std::vector<RegionMask> masks;
  for (const auto& v : g.vertices) masks.push_back(binarize(vertex_map(g, maps, v.id), q));
  std::vector<double> out;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    for (std::size_t k = i + 1; k < masks.size(); ++k) out.push_back(iou(masks[i], masks[k]));
  }
  return out;
}

inline double mean_vertex_iou(const SemanticHypergraph& g, std::span<const AttentionMap> maps,
                              double q) {
  const auto all = vertex_ious(g, maps, q);
  if (all.empty()) return 0.0;
  double s = 0.0;
  for (double x : all) s += x;
  return s / static_cast<double>(all.size());
}

struct LinkedPair {
  std::string edge;
  std::string u;
  std::string v;
};

// Every (edge, party_i, party_k) with i < k.
inline std::vector<LinkedPair> linked_pairs(const SemanticHypergraph& g) {
  std::vector<LinkedPair> out;
  for (const auto& e : g.edges) {
    for (std::size_t i = 0; i < e.party_ids.size(); ++i) {
      for (std::size_t k = i + 1; k < e.party_ids.size(); ++k) {
        out.push_back({e.id, e.party_ids[i], e.party_ids[k]});
      }
    }
  }
  return out;
}

}  // namespace shyi
