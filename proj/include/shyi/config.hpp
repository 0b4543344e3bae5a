#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "shyi/error.hpp"
#include "shyi/losses.hpp"
#include "shyi/schedule.hpp"
#include "shyi/toy_model.hpp"

namespace shyi {

struct KernelSpec {
  std::size_t size = 3;
  double sigma = 0.5;

  SmoothingKernel make() const { return make_kernel(size, sigma); }
};

struct GuidanceConfig {
  Temperatures temperatures;
  KernelSpec small_kernel{3, 0.5};
  KernelSpec big_kernel{7, 2.0};
  ObjectiveWeights weights;
  LossSchedule loss_schedule;
  StepSchedule steps;
  ToyModelConfig model;
  double quantile = 0.8;

  LossParams loss_params() const {
    return {temperatures, small_kernel.make(), big_kernel.make()};
  }

  void validate() const {
    temperatures.validate();
    (void)small_kernel.make();
    (void)big_kernel.make();
    for (double w : weights.values) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("weights must be nonnegative");
    }
    loss_schedule.validate();
    steps.validate();
    model.validate();
    detail::check_kernel_fits(model.height, model.width, small_kernel.make());
    detail::check_kernel_fits(model.height, model.width, big_kernel.make());
    if (!(quantile > 0.0 && quantile < 1.0)) throw InputError("quantile must lie in (0, 1)");
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> keys,
                           const std::string& where) {
  if (!obj.is_object()) throw InputError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw InputError("unknown config field '" + where + "." + key + "'");
  }
}

template <typename T>
void read_opt(const nlohmann::json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

}  // namespace detail

// Every field is optional; omitted fields keep their defaults. Unknown fields
// are rejected.
inline GuidanceConfig config_from_json(const nlohmann::json& doc) {
  using detail::read_opt;
  GuidanceConfig c;
  try {
    detail::reject_unknown(doc,
                           {"temperatures", "small_kernel", "big_kernel", "weights", "schedule",
                            "steps", "model", "metrics"},
                           "config");
    if (doc.contains("temperatures")) {
      const auto& t = doc.at("temperatures");
      detail::reject_unknown(t, {"tau1", "tau2"}, "temperatures");
      read_opt(t, "tau1", c.temperatures.tau1);
      read_opt(t, "tau2", c.temperatures.tau2);
    }
    for (auto [key, spec] : {std::pair{"small_kernel", &c.small_kernel},
                             std::pair{"big_kernel", &c.big_kernel}}) {
      if (!doc.contains(key)) continue;
      const auto& k = doc.at(key);
      detail::reject_unknown(k, {"size", "sigma"}, key);
      read_opt(k, "size", spec->size);
      read_opt(k, "sigma", spec->sigma);
    }
    if (doc.contains("weights")) {
      const auto& w = doc.at("weights");
      detail::reject_unknown(w, {"vertex_contrast", "action_contrast", "link"}, "weights");
      for (auto o : kObjectives) read_opt(w, std::string(objective_name(o)).c_str(), c.weights[o]);
    }
    if (doc.contains("schedule")) {
      const auto& s = doc.at("schedule");
      detail::reject_unknown(s, {"mode", "order", "probs", "seed"}, "schedule");
      if (s.contains("mode")) {
        const auto mode = s.at("mode").get<std::string>();
        if (mode == "round_robin") {
          c.loss_schedule.mode = ScheduleMode::round_robin;
        } else if (mode == "weighted_random") {
          c.loss_schedule.mode = ScheduleMode::weighted_random;
        } else {
          throw InputError("unknown schedule mode '" + mode + "'");
        }
      }
      if (s.contains("order")) {
        c.loss_schedule.order.clear();
        for (const auto& name : s.at("order")) {
          c.loss_schedule.order.push_back(parse_objective(name.get<std::string>()));
        }
      }
      read_opt(s, "probs", c.loss_schedule.probs);
      read_opt(s, "seed", c.loss_schedule.seed);
    }
    bool cutoff_given = false;
    if (doc.contains("steps")) {
      const auto& s = doc.at("steps");
      detail::reject_unknown(
          s, {"timesteps", "iterations_per_step", "alpha", "alpha_decay", "guidance_cutoff"},
          "steps");
      read_opt(s, "timesteps", c.steps.timesteps);
      read_opt(s, "iterations_per_step", c.steps.iterations_per_step);
      read_opt(s, "alpha", c.steps.alpha);
      if (s.contains("alpha_decay")) {
        const auto d = s.at("alpha_decay").get<std::string>();
        if (d == "constant") {
          c.steps.decay = AlphaDecay::constant;
        } else if (d == "linear") {
          c.steps.decay = AlphaDecay::linear;
        } else {
          throw InputError("unknown alpha_decay '" + d + "'");
        }
      }
      cutoff_given = s.contains("guidance_cutoff");
      read_opt(s, "guidance_cutoff", c.steps.guidance_cutoff);
    }
    if (!cutoff_given) c.steps.guidance_cutoff = c.steps.timesteps;
    if (doc.contains("model")) {
      const auto& m = doc.at("model");
      detail::reject_unknown(
          m, {"height", "width", "channels", "temperature", "perturb_sigma", "seed"}, "model");
      read_opt(m, "height", c.model.height);
      read_opt(m, "width", c.model.width);
      read_opt(m, "channels", c.model.channels);
      read_opt(m, "temperature", c.model.temperature);
      read_opt(m, "perturb_sigma", c.model.perturb_sigma);
      read_opt(m, "seed", c.model.seed);
    }
    if (doc.contains("metrics")) {
      const auto& m = doc.at("metrics");
      detail::reject_unknown(m, {"quantile"}, "metrics");
      read_opt(m, "quantile", c.quantile);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("config schema violation: ") + ex.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json to_json(const GuidanceConfig& c) {
  nlohmann::json order = nlohmann::json::array();
  for (auto o : c.loss_schedule.order) order.push_back(std::string(objective_name(o)));
  return {
      {"temperatures", {{"tau1", c.temperatures.tau1}, {"tau2", c.temperatures.tau2}}},
      {"small_kernel", {{"size", c.small_kernel.size}, {"sigma", c.small_kernel.sigma}}},
      {"big_kernel", {{"size", c.big_kernel.size}, {"sigma", c.big_kernel.sigma}}},
      {"weights",
       {{"vertex_contrast", c.weights[Objective::vertex_contrast]},
        {"action_contrast", c.weights[Objective::action_contrast]},
        {"link", c.weights[Objective::link]}}},
      {"schedule",
       {{"mode", c.loss_schedule.mode == ScheduleMode::round_robin ? "round_robin"
                                                                   : "weighted_random"},
        {"order", order},
        {"probs", c.loss_schedule.probs},
        {"seed", c.loss_schedule.seed}}},
      {"steps",
       {{"timesteps", c.steps.timesteps},
        {"iterations_per_step", c.steps.iterations_per_step},
        {"alpha", c.steps.alpha},
        {"alpha_decay", c.steps.decay == AlphaDecay::constant ? "constant" : "linear"},
        {"guidance_cutoff", c.steps.guidance_cutoff}}},
      {"model",
       {{"height", c.model.height},
        {"width", c.model.width},
        {"channels", c.model.channels},
        {"temperature", c.model.temperature},
        {"perturb_sigma", c.model.perturb_sigma},
        {"seed", c.model.seed}}},
      {"metrics", {{"quantile", c.quantile}}},
  };
}

inline GuidanceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw InputError(path + ": " + ex.what());
  }
  return config_from_json(doc);
}

}  // namespace shyi
