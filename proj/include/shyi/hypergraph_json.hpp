#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "shyi/error.hpp"
#include "shyi/hypergraph.hpp"

namespace shyi {

// Graph document:
//   {
//     "tokens":      ["white", "dog", ...],
//     "vertices":    [{"id": "d", "tokens": [0, 1]}, ...],
//     "edges":       [{"id": "plays", "action_tokens": [2], "parties": ["d", "c"]}],
//     "environment": [3, 6, ...]
//   }
inline nlohmann::json to_json(const SemanticHypergraph& g) {
  nlohmann::json doc;
  doc["tokens"] = nlohmann::json::array();
  for (const auto& t : g.tokens) doc["tokens"].push_back(t.text);
  doc["vertices"] = nlohmann::json::array();
  for (const auto& v : g.vertices) {
    doc["vertices"].push_back({{"id", v.id}, {"tokens", v.token_indices}});
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) {
    doc["edges"].push_back(
        {{"id", e.id}, {"action_tokens", e.action_token_indices}, {"parties", e.party_ids}});
  }
  doc["environment"] = g.environment_token_indices;
  return doc;
}

inline std::string serialize(const SemanticHypergraph& g) { return to_json(g).dump(2) + "\n"; }

inline SemanticHypergraph graph_from_json(const nlohmann::json& doc) {
  SemanticHypergraph g;
  try {
    if (!doc.is_object()) throw InputError("graph document must be an object");
    for (const auto& [key, _] : doc.items()) {
      if (key != "tokens" && key != "vertices" && key != "edges" && key != "environment") {
        throw InputError("unknown graph field '" + key + "'");
      }
    }
    const auto& tokens = doc.at("tokens");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      g.tokens.push_back({i, tokens.at(i).get<std::string>()});
    }
    for (const auto& v : doc.at("vertices")) {
      g.vertices.push_back(
          {v.at("id").get<std::string>(), v.at("tokens").get<std::vector<std::size_t>>()});
    }
    for (const auto& e : doc.at("edges")) {
      g.edges.push_back({e.at("id").get<std::string>(),
                         e.at("action_tokens").get<std::vector<std::size_t>>(),
                         e.at("parties").get<std::vector<std::string>>()});
    }
    g.environment_token_indices = doc.at("environment").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("graph schema violation: ") + ex.what());
  }
  g.validate();
  return g;
}

inline SemanticHypergraph deserialize(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw InputError(std::string("graph JSON: ") + ex.what());
  }
  return graph_from_json(doc);
}

}  // namespace shyi
