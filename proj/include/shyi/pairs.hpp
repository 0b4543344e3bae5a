#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "shyi/hypergraph.hpp"

namespace shyi {

enum class Step { current, previous };

// Reference to one token's attention map. Previous-step maps are always
// detached; detached maps are treated as constants by the gradient.
struct MapRef {
  std::size_t token = 0;
  Step step = Step::current;
  bool detached = false;

  static MapRef live(std::size_t t) { return {t, Step::current, false}; }
  static MapRef frozen(std::size_t t) { return {t, Step::current, true}; }
  static MapRef previous(std::size_t t) { return {t, Step::previous, true}; }

  bool operator==(const MapRef&) const = default;
  auto operator<=>(const MapRef&) const = default;
};

// Contrast pair set: one loss term per positive, each competing against the
// shared negatives.
struct PairSet {
  MapRef anchor;
  std::vector<MapRef> positives;
  std::vector<MapRef> negatives;

  bool operator==(const PairSet&) const = default;
};

// Link pair set: the anchor is pulled toward `linked_negative` relative to
// its own group members in the denominator.
struct LinkPairSet {
  MapRef anchor;
  MapRef linked_negative;
  std::vector<MapRef> denominator_positives;

  bool operator==(const LinkPairSet&) const = default;
};

namespace detail {

inline std::vector<MapRef> live_refs(const std::vector<std::size_t>& tokens) {
  std::vector<MapRef> out;
  for (auto t : tokens) out.push_back(MapRef::live(t));
  return out;
}

}  // namespace detail

// One PairSet per ordered (anchor, positive) pair inside a vertex, each also
// carrying the anchor's previous-step map. Singleton vertices get a PairSet
// whose only positive is that previous-step map. Negatives are the tokens of
// every other vertex.
inline std::vector<PairSet> build_vertex_contrast(const SemanticHypergraph& g) {
  std::vector<PairSet> out;
  for (std::size_t vi = 0; vi < g.vertices.size(); ++vi) {
    std::vector<MapRef> negatives;
    for (std::size_t wi = 0; wi < g.vertices.size(); ++wi) {
      if (wi == vi) continue;
      for (auto t : g.vertices[wi].token_indices) negatives.push_back(MapRef::live(t));
    }
    const auto& members = g.vertices[vi].token_indices;
    for (auto a : members) {
      if (members.size() == 1) {
        out.push_back({MapRef::live(a), {MapRef::previous(a)}, negatives});
        continue;
      }
      for (auto p : members) {
        if (p == a) continue;
        out.push_back({MapRef::live(a), {MapRef::live(p), MapRef::previous(a)}, negatives});
      }
    }
  }
  return out;
}

// Each action token is positively paired with every token of each party of
// its edge. Everything but the anchor is detached, so only the action map
// receives gradient. Negatives: other edges' action tokens, tokens of
// vertices outside the edge, and all environment tokens.
inline std::vector<PairSet> build_action_contrast(const SemanticHypergraph& g) {
  std::vector<PairSet> out;
  for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
    const auto& edge = g.edges[ei];
    const std::set<std::string> parties(edge.party_ids.begin(), edge.party_ids.end());
    std::vector<MapRef> negatives;
    for (std::size_t oi = 0; oi < g.edges.size(); ++oi) {
      if (oi == ei) continue;
      for (auto t : g.edges[oi].action_token_indices) negatives.push_back(MapRef::frozen(t));
    }
    for (const auto& v : g.vertices) {
      if (parties.count(v.id)) continue;
      for (auto t : v.token_indices) negatives.push_back(MapRef::frozen(t));
    }
    for (auto t : g.environment_token_indices) negatives.push_back(MapRef::frozen(t));

    for (auto a : edge.action_token_indices) {
      for (const auto& party : edge.party_ids) {
        for (auto t : g.vertex(party).token_indices) {
          out.push_back({MapRef::live(a), {MapRef::frozen(t), MapRef::previous(a)}, negatives});
        }
      }
    }
  }
  return out;
}

// For every hyperedge and every unordered pair of its parties (u, v), one
// set per (j in u, j- in v) and, symmetrically, per (j in v, j- in u). The
// denominator holds the anchor's own group members plus its previous-step map.
inline std::vector<LinkPairSet> build_link(const SemanticHypergraph& g) {
  std::vector<LinkPairSet> out;
  auto emit = [&](const NounGroup& from, const NounGroup& to) {
    for (auto j : from.token_indices) {
      std::vector<MapRef> denom;
      for (auto k : from.token_indices) {
        if (k != j) denom.push_back(MapRef::live(k));
      }
      denom.push_back(MapRef::previous(j));
      for (auto n : to.token_indices) out.push_back({MapRef::live(j), MapRef::live(n), denom});
    }
  };
  for (const auto& edge : g.edges) {
    for (std::size_t i = 0; i < edge.party_ids.size(); ++i) {
      for (std::size_t k = i + 1; k < edge.party_ids.size(); ++k) {
        const auto& u = g.vertex(edge.party_ids[i]);
        const auto& v = g.vertex(edge.party_ids[k]);
        emit(u, v);
        emit(v, u);
      }
    }
  }
  return out;
}

template <typename Set>
struct Injected {
  std::vector<Set> pairs;
  std::size_t dropped = 0;
};

// Strips previous-step refs when no previous maps exist (first step). Contrast
// sets left without positives are dropped and counted.
inline Injected<PairSet> inject_previous_step(std::vector<PairSet> pairs,
                                              bool previous_maps_available) {
  Injected<PairSet> out;
  if (previous_maps_available) {
    out.pairs = std::move(pairs);
    return out;
  }
  auto is_prev = [](const MapRef& r) { return r.step == Step::previous; };
  for (auto& p : pairs) {
    std::erase_if(p.positives, is_prev);
    std::erase_if(p.negatives, is_prev);
    if (p.positives.empty()) {
      ++out.dropped;
    } else {
      out.pairs.push_back(std::move(p));
    }
  }
  return out;
}

// Link sets always keep their linked negative, so nothing is dropped; an
// empty denominator simply yields a zero term.
inline Injected<LinkPairSet> inject_previous_step(std::vector<LinkPairSet> pairs,
                                                  bool previous_maps_available) {
  Injected<LinkPairSet> out;
  if (!previous_maps_available) {
    for (auto& p : pairs) {
      std::erase_if(p.denominator_positives,
                    [](const MapRef& r) { return r.step == Step::previous; });
    }
  }
  out.pairs = std::move(pairs);
  return out;
}

// All three objectives' pair sets for one denoising step.
struct PairCollection {
  std::vector<PairSet> vertex_contrast;
  std::vector<PairSet> action_contrast;
  std::vector<LinkPairSet> link;
  std::size_t dropped = 0;

  bool operator==(const PairCollection&) const = default;
};

inline PairCollection build_pairs(const SemanticHypergraph& g, bool previous_maps_available) {
  PairCollection c;
  auto v = inject_previous_step(build_vertex_contrast(g), previous_maps_available);
  auto a = inject_previous_step(build_action_contrast(g), previous_maps_available);
  auto l = inject_previous_step(build_link(g), previous_maps_available);
  c.vertex_contrast = std::move(v.pairs);
  c.action_contrast = std::move(a.pairs);
  c.link = std::move(l.pairs);
  c.dropped = v.dropped + a.dropped + l.dropped;
  return c;
}

}  // namespace shyi
