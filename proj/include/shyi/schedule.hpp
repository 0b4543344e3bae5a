#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "shyi/error.hpp"
#include "shyi/losses.hpp"
#include "shyi/toy_model.hpp"

namespace shyi {

enum class ScheduleMode { round_robin, weighted_random };

// Which single objective drives each gradient iteration.
struct LossSchedule {
  ScheduleMode mode = ScheduleMode::round_robin;
  std::vector<Objective> order{Objective::vertex_contrast, Objective::action_contrast,
                               Objective::link};
  std::vector<double> probs;  // weighted_random only, aligned with `order`
  std::uint64_t seed = 0;

  void validate() const {
    if (order.empty()) throw InputError("loss schedule order must be nonempty");
    if (mode == ScheduleMode::weighted_random || !probs.empty()) {
      if (probs.size() != order.size()) {
        throw InputError("loss schedule probs must align with order");
      }
      double total = 0.0;
      for (double p : probs) {
        if (!(p >= 0.0)) throw InputError("loss schedule probs must be nonnegative");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw InputError("loss schedule probs must sum to 1");
    }
  }
};

// Pure in (iteration, schedule): the random mode reseeds from (seed, iteration)
// so any iteration's choice can be replayed in isolation.
inline ObjectiveMask active_objectives(std::size_t iteration, const LossSchedule& schedule) {
  schedule.validate();
  if (schedule.mode == ScheduleMode::round_robin) {
    return ObjectiveMask::only(schedule.order[iteration % schedule.order.size()]);
  }
  std::seed_seq seq{static_cast<std::uint32_t>(schedule.seed),
                    static_cast<std::uint32_t>(schedule.seed >> 32),
                    static_cast<std::uint32_t>(iteration),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(iteration) >> 32)};
  std::mt19937_64 rng(seq);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < schedule.order.size(); ++i) {
    acc += schedule.probs[i];
    if (u < acc) return ObjectiveMask::only(schedule.order[i]);
  }
  // u landed in the rounding gap above the cumulative sum.
  for (std::size_t i = schedule.order.size(); i-- > 0;) {
    if (schedule.probs[i] > 0.0) return ObjectiveMask::only(schedule.order[i]);
  }
  return ObjectiveMask::only(schedule.order.back());
}

enum class AlphaDecay { constant, linear };

struct StepSchedule {
  std::size_t timesteps = 10;
  std::size_t iterations_per_step = 3;
  double alpha = 10.0;
  AlphaDecay decay = AlphaDecay::constant;
  std::size_t guidance_cutoff = 10;  // number of leading steps that receive guidance

  void validate() const {
    if (timesteps < 1) throw InputError("timesteps must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be nonnegative");
    if (guidance_cutoff > timesteps) throw InputError("guidance_cutoff must not exceed timesteps");
  }

  // Step size at the `step_index`-th processed step (0 = first, t = T-1).
  double alpha_at(std::size_t step_index) const {
    if (decay == AlphaDecay::constant) return alpha;
    return alpha * static_cast<double>(timesteps - step_index) / static_cast<double>(timesteps);
  }

  bool guided(std::size_t step_index) const { return step_index < guidance_cutoff; }
};

// z - alpha * g, returned as a new state.
inline LatentState update_latent(const LatentState& z, const LatentGradient& g, double alpha) {
  if (!z.same_shape(g) || z.values.size() != g.values.size()) {
    throw InputError("latent and gradient shapes differ");
  }
  if (!(alpha > 0.0)) throw InputError("step size must be positive");
  LatentState out = z;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= alpha * g.values[i];
  if (!out.finite()) throw NumericError("latent update produced non-finite values");
  return out;
}

}  // namespace shyi
