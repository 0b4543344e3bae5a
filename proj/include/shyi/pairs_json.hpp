#pragma once

#include <nlohmann/json.hpp>

#include "shyi/pairs.hpp"

namespace shyi {

// {"token": 3, "step": "current"|"previous", "detached": bool}
inline nlohmann::json to_json(const MapRef& r) {
  return {{"token", r.token},
          {"step", r.step == Step::current ? "current" : "previous"},
          {"detached", r.detached}};
}

inline nlohmann::json refs_to_json(const std::vector<MapRef>& refs) {
  auto arr = nlohmann::json::array();
  for (const auto& r : refs) arr.push_back(to_json(r));
  return arr;
}

inline nlohmann::json to_json(const PairSet& p) {
  return {{"anchor", to_json(p.anchor)},
          {"positives", refs_to_json(p.positives)},
          {"negatives", refs_to_json(p.negatives)}};
}

inline nlohmann::json to_json(const LinkPairSet& p) {
  return {{"anchor", to_json(p.anchor)},
          {"linked_negative", to_json(p.linked_negative)},
          {"denominator_positives", refs_to_json(p.denominator_positives)}};
}

// {"vertex_contrast": [...], "action_contrast": [...], "link": [...], "dropped": n}
inline nlohmann::json to_json(const PairCollection& c) {
  nlohmann::json doc;
  doc["vertex_contrast"] = nlohmann::json::array();
  for (const auto& p : c.vertex_contrast) doc["vertex_contrast"].push_back(to_json(p));
  doc["action_contrast"] = nlohmann::json::array();
  for (const auto& p : c.action_contrast) doc["action_contrast"].push_back(to_json(p));
  doc["link"] = nlohmann::json::array();
  for (const auto& p : c.link) doc["link"].push_back(to_json(p));
  doc["dropped"] = c.dropped;
  return doc;
}

}  // namespace shyi
