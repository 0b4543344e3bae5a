#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shyi/attention_map.hpp"
#include "shyi/error.hpp"
#include "shyi/pairs.hpp"
#include "shyi/similarity.hpp"
#include "shyi/smoothing.hpp"

namespace shyi {

enum class Objective : std::size_t { vertex_contrast = 0, action_contrast = 1, link = 2 };

inline constexpr std::array<Objective, 3> kObjectives = {
    Objective::vertex_contrast, Objective::action_contrast, Objective::link};

inline std::string_view objective_name(Objective o) {
  switch (o) {
    case Objective::vertex_contrast: return "vertex_contrast";
    case Objective::action_contrast: return "action_contrast";
    case Objective::link: return "link";
  }
  return "?";
}

// Single-letter code used in metrics tables.
inline char objective_code(Objective o) {
  switch (o) {
    case Objective::vertex_contrast: return 'V';
    case Objective::action_contrast: return 'A';
    case Objective::link: return 'L';
  }
  return '?';
}

inline Objective parse_objective(std::string_view name) {
  for (auto o : kObjectives) {
    if (name == objective_name(o) || (name.size() == 1 && name[0] == objective_code(o))) return o;
  }
  throw InputError("unknown objective '" + std::string(name) + "'");
}

struct ObjectiveMask {
  std::array<bool, 3> bits{};

  static ObjectiveMask all() { return {{true, true, true}}; }
  static ObjectiveMask none() { return {}; }
  static ObjectiveMask only(Objective o) {
    ObjectiveMask m;
    m.bits[static_cast<std::size_t>(o)] = true;
    return m;
  }

  bool operator[](Objective o) const { return bits[static_cast<std::size_t>(o)]; }
  bool any() const { return bits[0] || bits[1] || bits[2]; }

  // "V", "VAL", "-" ...
  std::string code() const {
    std::string s;
    for (auto o : kObjectives) {
      if ((*this)[o]) s.push_back(objective_code(o));
    }
    return s.empty() ? "-" : s;
  }

  bool operator==(const ObjectiveMask&) const = default;
};

struct ObjectiveWeights {
  std::array<double, 3> values{1.0, 1.0, 1.0};

  double operator[](Objective o) const { return values[static_cast<std::size_t>(o)]; }
  double& operator[](Objective o) { return values[static_cast<std::size_t>(o)]; }
};

struct Temperatures {
  double tau1 = 0.25;  // contrast
  double tau2 = 1.0;  // link

  void validate() const {
    if (!(tau1 > 0.0) || !(tau2 > 0.0) || !std::isfinite(tau1) || !std::isfinite(tau2)) {
      throw InputError("temperatures must be positive and finite");
    }
  }
};

struct LossParams {
  Temperatures temperatures;
  SmoothingKernel small_kernel = make_kernel(3, 0.5);
  SmoothingKernel big_kernel = make_kernel(7, 2.0);
};

// Resolves MapRefs. Non-detached current refs read `current` and receive
// gradient; detached current refs read `frozen` (or `current` when frozen is
// empty); previous refs read `previous`.
struct MapSet {
  std::span<const AttentionMap> current;
  std::span<const AttentionMap> frozen;
  std::span<const AttentionMap> previous;

  const AttentionMap& resolve(const MapRef& ref) const {
    std::span<const AttentionMap> src = current;
    const char* what = "current";
    if (ref.step == Step::previous) {
      src = previous;
      what = "previous-step";
    } else if (ref.detached && !frozen.empty()) {
      src = frozen;
    }
    if (ref.token >= src.size()) {
      throw InputError("no " + std::string(what) + " map for token " + std::to_string(ref.token));
    }
    return src[ref.token];
  }
};

// Per-objective means. An objective with no terms is absent, not zero.
struct LossBreakdown {
  std::array<std::optional<double>, 3> means{};
  std::array<std::size_t, 3> term_counts{};
  std::optional<double> total;
  ObjectiveMask active_mask;

  const std::optional<double>& operator[](Objective o) const {
    return means[static_cast<std::size_t>(o)];
  }
  std::optional<double> vertex_contrast() const { return (*this)[Objective::vertex_contrast]; }
  std::optional<double> action_contrast() const { return (*this)[Objective::action_contrast]; }
  std::optional<double> link() const { return (*this)[Objective::link]; }
};

// Test hook: negates the gradient contribution of one objective so that the
// gradient checker can prove it notices a broken path.
struct FaultInjection {
  std::optional<Objective> flip_sign;
};

namespace detail {

struct Softmax {
  double loss = 0.0;
  std::vector<double> dloss_dlogit;  // index 0 is the numerator
};

// -log(exp(x0) / sum_n exp(xn)) written relative to x0 so the result is
// nonnegative by construction and exactly 0 for a lone numerator.
inline Softmax info_nce(std::span<const double> logits) {
  Softmax out;
  const std::size_t n = logits.size();
  out.dloss_dlogit.assign(n, 0.0);
  if (n == 1) return out;
  double shift = 0.0;
  for (std::size_t i = 1; i < n; ++i) shift = std::max(shift, logits[i] - logits[0]);
  std::vector<double> e(n);
  e[0] = std::exp(-shift);
  double rest = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    e[i] = std::exp(logits[i] - logits[0] - shift);
    rest += e[i];
  }
  out.loss = shift == 0.0 ? std::log1p(rest) : shift + std::log(e[0] + rest);
  const double z = e[0] + rest;
  out.dloss_dlogit[0] = e[0] / z - 1.0;
  for (std::size_t i = 1; i < n; ++i) out.dloss_dlogit[i] = e[i] / z;
  return out;
}

}  // namespace detail

// Evaluates contrast and link terms over one MapSet, caching smoothed maps
// and accumulating gradients with respect to the live current maps.
class LossEvaluator {
 public:
  LossEvaluator(const MapSet& maps, const LossParams& params) : maps_(maps), params_(params) {
    params_.temperatures.validate();
    const std::size_t n = maps.current.size();
    for (auto& c : cache_) c.resize(n * 3);
    for (auto& g : grads_) g.resize(n);
  }

  // One contrast term: anchor vs `positive` against `negatives`, small kernel.
  // `upstream` scales the gradient; 0 evaluates without accumulating.
  double contrast(const MapRef& anchor, const MapRef& positive, std::span<const MapRef> negatives,
                  double upstream = 0.0) {
    return term(kSmall, params_.temperatures.tau1, anchor, positive, negatives, upstream);
  }

  double link(const LinkPairSet& p, double upstream = 0.0) {
    return term(kBig, params_.temperatures.tau2, p.anchor, p.linked_negative,
                p.denominator_positives, upstream);
  }

  // d(accumulated objective) / d(current map j), one plane per token.
  std::vector<Plane> map_gradient() const {
    std::vector<Plane> out;
    out.reserve(maps_.current.size());
    for (std::size_t j = 0; j < maps_.current.size(); ++j) {
      const auto& m = maps_.current[j];
      Plane g(m.height(), m.width(), 0.0);
      if (grads_[kSmall][j]) add(g, smooth_transpose(*grads_[kSmall][j], params_.small_kernel));
      if (grads_[kBig][j]) add(g, smooth_transpose(*grads_[kBig][j], params_.big_kernel));
      out.push_back(std::move(g));
    }
    return out;
  }

 private:
  static constexpr std::size_t kSmall = 0;
  static constexpr std::size_t kBig = 1;

  static void add(Plane& into, const Plane& from) {
    for (std::size_t i = 0; i < into.size(); ++i) into.values[i] += from.values[i];
  }

  static std::size_t source_of(const MapRef& r) {
    if (r.step == Step::previous) return 2;
    return r.detached ? 1 : 0;
  }

  const Plane& smoothed(const MapRef& ref, std::size_t kernel) {
    const auto& map = maps_.resolve(ref);
    if (ref.token >= maps_.current.size()) {
      throw InputError("token " + std::to_string(ref.token) + " out of range");
    }
    if (!map.same_shape(maps_.current[0])) {
      throw InputError("map for token " + std::to_string(ref.token) + " has mismatched shape");
    }
    auto& slot = cache_[kernel][ref.token * 3 + source_of(ref)];
    if (!slot) {
      slot = smooth(map.to_plane(), kernel == kSmall ? params_.small_kernel : params_.big_kernel);
    }
    return *slot;
  }

  std::span<double> grad_slot(const MapRef& ref, std::size_t kernel, const Plane& shape) {
    if (ref.step == Step::previous || ref.detached) return {};
    auto& slot = grads_[kernel][ref.token];
    if (!slot) slot = Plane(shape.height, shape.width, 0.0);
    return slot->values;
  }

  double term(std::size_t kernel, double tau, const MapRef& anchor, const MapRef& numerator,
              std::span<const MapRef> others, double upstream) {
    std::vector<const MapRef*> refs{&numerator};
    for (const auto& r : others) refs.push_back(&r);

    const Plane& a = smoothed(anchor, kernel);
    std::vector<double> logits;
    logits.reserve(refs.size());
    for (const auto* r : refs) {
      logits.push_back(cosine_similarity(a.values, smoothed(*r, kernel).values) / tau);
    }
    const auto sm = detail::info_nce(logits);
    if (!std::isfinite(sm.loss)) throw NumericError("non-finite loss term");
    if (upstream != 0.0) {
      auto ga = grad_slot(anchor, kernel, a);
      for (std::size_t i = 0; i < refs.size(); ++i) {
        const double d = upstream * sm.dloss_dlogit[i] / tau;
        if (d == 0.0) continue;
        const Plane& b = smoothed(*refs[i], kernel);
        cosine_backward(a.values, b.values, d, ga, grad_slot(*refs[i], kernel, b));
      }
    }
    return sm.loss;
  }

  MapSet maps_;
  LossParams params_;
  std::array<std::vector<std::optional<Plane>>, 2> cache_;
  std::array<std::vector<std::optional<Plane>>, 2> grads_;
};

// One contrast term for the positive at `positive_index`.
inline double contrast_term(const PairSet& p, std::size_t positive_index, const MapSet& maps,
                            double tau1, const SmoothingKernel& small_kernel) {
  if (positive_index >= p.positives.size()) throw InputError("positive index out of range");
  LossParams params{{tau1, 1.0}, small_kernel, small_kernel};
  LossEvaluator ev(maps, params);
  return ev.contrast(p.anchor, p.positives[positive_index], p.negatives);
}

// A PairSet expands to one term per positive.
inline std::vector<double> contrast_terms(const PairSet& p, const MapSet& maps, double tau1,
                                          const SmoothingKernel& small_kernel) {
  LossParams params{{tau1, 1.0}, small_kernel, small_kernel};
  LossEvaluator ev(maps, params);
  std::vector<double> out;
  for (const auto& pos : p.positives) out.push_back(ev.contrast(p.anchor, pos, p.negatives));
  return out;
}

inline double link_term(const LinkPairSet& p, const MapSet& maps, double tau2,
                        const SmoothingKernel& big_kernel) {
  LossParams params{{1.0, tau2}, big_kernel, big_kernel};
  LossEvaluator ev(maps, params);
  return ev.link(p);
}

inline std::size_t contrast_term_count(const std::vector<PairSet>& pairs) {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.positives.size();
  return n;
}

// Sum of weights over objectives that are active and have at least one term.
inline double effective_weight(const LossBreakdown& b, const ObjectiveWeights& w,
                               const ObjectiveMask& mask) {
  double total = 0.0;
  for (auto o : kObjectives) {
    if (mask[o] && b[o]) total += w[o];
  }
  return total;
}

// Weighted average of the active, present objective means.
inline double total_loss(const LossBreakdown& b, const ObjectiveWeights& w,
                         const ObjectiveMask& mask) {
  for (auto o : kObjectives) {
    if (w[o] < 0.0) throw InputError("objective weights must be nonnegative");
  }
  const double denom = effective_weight(b, w, mask);
  if (!(denom > 0.0)) throw InputError("no active objective with nonzero weight");
  double num = 0.0;
  for (auto o : kObjectives) {
    if (mask[o] && b[o]) num += w[o] * *b[o];
  }
  return num / denom;
}

struct LossEvaluation {
  LossBreakdown breakdown;
  std::vector<Plane> map_gradient;  // empty when no objective carried weight
};

// Means of every objective; gradient of the masked weighted total with
// respect to the live current maps. The total is left empty when the mask
// selects nothing with weight.
inline LossEvaluation evaluate_losses(const PairCollection& pairs, const MapSet& maps,
                                      const LossParams& params, const ObjectiveWeights& weights,
                                      const ObjectiveMask& mask,
                                      const FaultInjection& fault = {}) {
  LossEvaluation out;
  auto& b = out.breakdown;
  b.active_mask = mask;
  b.term_counts = {contrast_term_count(pairs.vertex_contrast),
                   contrast_term_count(pairs.action_contrast), pairs.link.size()};
  for (auto o : kObjectives) {
    if (b.term_counts[static_cast<std::size_t>(o)] > 0) b.means[static_cast<std::size_t>(o)] = 0.0;
  }
  for (auto o : kObjectives) {
    if (weights[o] < 0.0) throw InputError("objective weights must be nonnegative");
  }
  const double denom = effective_weight(b, weights, mask);

  LossEvaluator ev(maps, params);
  auto upstream_for = [&](Objective o) {
    const auto count = b.term_counts[static_cast<std::size_t>(o)];
    if (!(denom > 0.0) || !mask[o] || count == 0) return 0.0;
    const double sign = fault.flip_sign == o ? -1.0 : 1.0;
    return sign * weights[o] / (denom * static_cast<double>(count));
  };

  const std::array<const std::vector<PairSet>*, 2> contrast_lists = {&pairs.vertex_contrast,
                                                                    &pairs.action_contrast};
  for (std::size_t k = 0; k < 2; ++k) {
    const Objective o = kObjectives[k];
    const double up = upstream_for(o);
    double sum = 0.0;
    for (const auto& p : *contrast_lists[k]) {
      for (const auto& pos : p.positives) sum += ev.contrast(p.anchor, pos, p.negatives, up);
    }
    if (b.term_counts[k]) b.means[k] = sum / static_cast<double>(b.term_counts[k]);
  }
  {
    const double up = upstream_for(Objective::link);
    double sum = 0.0;
    for (const auto& p : pairs.link) sum += ev.link(p, up);
    if (b.term_counts[2]) b.means[2] = sum / static_cast<double>(b.term_counts[2]);
  }

  if (denom > 0.0) {
    b.total = total_loss(b, weights, mask);
    out.map_gradient = ev.map_gradient();
  }
  return out;
}

// Per-objective means without gradient.
inline LossBreakdown mean_losses(const PairCollection& pairs, const MapSet& maps,
                                 const LossParams& params) {
  return evaluate_losses(pairs, maps, params, ObjectiveWeights{{0.0, 0.0, 0.0}},
                         ObjectiveMask::none())
      .breakdown;
}

}  // namespace shyi
