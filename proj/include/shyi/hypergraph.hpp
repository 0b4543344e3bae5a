#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shyi/error.hpp"

namespace shyi {

struct Token {
  std::size_t index = 0;
  std::string text;

  bool operator==(const Token&) const = default;
};

// A head noun plus its modifiers, one vertex of the hypergraph.
struct NounGroup {
  std::string id;
  std::vector<std::size_t> token_indices;

  bool operator==(const NounGroup&) const = default;
};

// An action joining m >= 2 noun groups.
struct ActionEdge {
  std::string id;
  std::vector<std::size_t> action_token_indices;
  std::vector<std::string> party_ids;

  bool operator==(const ActionEdge&) const = default;
};

struct SemanticHypergraph {
  std::vector<Token> tokens;
  std::vector<NounGroup> vertices;
  std::vector<ActionEdge> edges;
  std::vector<std::size_t> environment_token_indices;

  bool operator==(const SemanticHypergraph&) const = default;

  std::optional<std::size_t> vertex_position(const std::string& id) const {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (vertices[i].id == id) return i;
    }
    return std::nullopt;
  }

  const NounGroup& vertex(const std::string& id) const {
    const auto pos = vertex_position(id);
    if (!pos) throw InputError("unknown vertex '" + id + "'");
    return vertices[*pos];
  }

  // Throws InputError on any structural violation.
  void validate() const;
};

inline void SemanticHypergraph::validate() const {
  if (tokens.empty()) throw InputError("hypergraph has no tokens");
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].index != i) throw InputError("token indices must be contiguous from 0");
    if (tokens[i].text.empty()) throw InputError("token " + std::to_string(i) + " is empty");
  }
  if (vertices.empty()) throw InputError("hypergraph needs at least one vertex");

  std::vector<int> owner(tokens.size(), 0);
  auto claim = [&](std::size_t idx, const std::string& who) {
    if (idx >= tokens.size()) {
      throw InputError(who + " references token " + std::to_string(idx) + " out of range");
    }
    if (owner[idx]++) {
      throw InputError("token " + std::to_string(idx) + " ('" + tokens[idx].text +
                       "') is assigned more than once");
    }
  };

  std::set<std::string> ids;
  for (const auto& v : vertices) {
    if (v.id.empty()) throw InputError("vertex id must be nonempty");
    if (!ids.insert(v.id).second) throw InputError("duplicate vertex id '" + v.id + "'");
    if (v.token_indices.empty()) throw InputError("vertex '" + v.id + "' has no tokens");
    for (auto t : v.token_indices) claim(t, "vertex '" + v.id + "'");
  }
  std::set<std::string> edge_ids;
  for (const auto& e : edges) {
    if (!edge_ids.insert(e.id).second) throw InputError("duplicate edge id '" + e.id + "'");
    if (e.action_token_indices.empty()) throw InputError("edge '" + e.id + "' has no action tokens");
    if (e.party_ids.size() < 2) {
      throw InputError("edge '" + e.id + "' needs at least 2 parties, has " +
                       std::to_string(e.party_ids.size()));
    }
    std::set<std::string> parties;
    for (const auto& p : e.party_ids) {
      if (!vertex_position(p)) {
        throw InputError("edge '" + e.id + "' references unknown vertex '" + p + "'");
      }
      if (!parties.insert(p).second) {
        throw InputError("edge '" + e.id + "' lists party '" + p + "' twice");
      }
    }
    for (auto t : e.action_token_indices) claim(t, "edge '" + e.id + "'");
  }
  for (auto t : environment_token_indices) claim(t, "environment");
  for (std::size_t i = 0; i < owner.size(); ++i) {
    if (!owner[i]) {
      throw InputError("token " + std::to_string(i) + " ('" + tokens[i].text +
                       "') belongs to no vertex, edge or environment");
    }
  }
}

}  // namespace shyi
