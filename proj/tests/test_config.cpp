#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "shyi/config.hpp"

using namespace shyi;
using nlohmann::json;

TEST(Config, Defaults) {
  const GuidanceConfig c = config_from_json(json::object());
  EXPECT_EQ(c.steps.timesteps, 10u);
  EXPECT_EQ(c.steps.iterations_per_step, 3u);
  EXPECT_EQ(c.steps.alpha, 10.0);
  EXPECT_EQ(c.steps.guidance_cutoff, 10u);
  EXPECT_EQ(c.loss_schedule.mode, ScheduleMode::round_robin);
  EXPECT_EQ(c.loss_schedule.order.size(), 3u);
  EXPECT_EQ(c.weights.values, (std::array<double, 3>{1.0, 1.0, 1.0}));
  EXPECT_EQ(c.small_kernel.size, 3u);
  EXPECT_EQ(c.big_kernel.size, 7u);
  EXPECT_EQ(c.model.height, 16u);
  EXPECT_EQ(c.quantile, 0.8);
}

TEST(Config, CutoffFollowsTimestepsUnlessGiven) {
  EXPECT_EQ(config_from_json({{"steps", {{"timesteps", 4}}}}).steps.guidance_cutoff, 4u);
  EXPECT_EQ(config_from_json({{"steps", {{"timesteps", 4}, {"guidance_cutoff", 2}}}})
                .steps.guidance_cutoff,
            2u);
}

TEST(Config, RoundTrip) {
  const json doc = {
      {"temperatures", {{"tau1", 0.3}, {"tau2", 2.0}}},
      {"small_kernel", {{"size", 5}, {"sigma", 0.9}}},
      {"weights", {{"link", 0.5}}},
      {"schedule", {{"mode", "weighted_random"}, {"order", {"V", "link"}}, {"probs", {0.25, 0.75}}, {"seed", 9}}},
      {"steps", {{"alpha", 2.5}, {"alpha_decay", "linear"}}},
      {"model", {{"channels", 4}, {"seed", 123}}},
      {"metrics", {{"quantile", 0.7}}},
  };
  const auto c = config_from_json(doc);
  EXPECT_EQ(c.loss_schedule.order,
            (std::vector<Objective>{Objective::vertex_contrast, Objective::link}));
  EXPECT_EQ(c.weights[Objective::link], 0.5);
  EXPECT_EQ(c.steps.decay, AlphaDecay::linear);
  const auto again = config_from_json(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(config_from_json({{"bogus", 1}}), InputError);
  EXPECT_THROW(config_from_json({{"steps", {{"timestep", 4}}}}), InputError);
  EXPECT_THROW(config_from_json({{"temperatures", {{"tau1", 0.0}}}}), InputError);
  EXPECT_THROW(config_from_json({{"temperatures", {{"tau1", "hot"}}}}), InputError);
  EXPECT_THROW(config_from_json({{"small_kernel", {{"size", 4}}}}), InputError);
  EXPECT_THROW(config_from_json({{"weights", {{"link", -1.0}}}}), InputError);
  EXPECT_THROW(config_from_json({{"schedule", {{"mode", "shuffle"}}}}), InputError);
  EXPECT_THROW(config_from_json({{"schedule", {{"order", {"X"}}}}}), InputError);
  EXPECT_THROW(config_from_json({{"steps", {{"alpha", -1.0}}}}), InputError);
  EXPECT_THROW(config_from_json({{"steps", {{"guidance_cutoff", 11}}}}), InputError);
  EXPECT_THROW(config_from_json({{"model", {{"height", 3}}}}), InputError);  // big kernel 7 > 5
  EXPECT_THROW(config_from_json({{"metrics", {{"quantile", 1.0}}}}), InputError);
  EXPECT_THROW(config_from_json(json::array()), InputError);
}

TEST(Config, LoadErrors) {
  EXPECT_THROW(load_config("/nonexistent/cfg.json"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "shyi_bad_config.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_config(path.string()), InputError);
  std::filesystem::remove(path);
}
