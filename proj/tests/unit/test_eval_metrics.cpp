// Copyright 2026 The lorafuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lorafuse/error.hpp"
#include "lorafuse/eval_metrics.hpp"

using namespace lorafuse;

namespace
{

using Track = std::vector<Eigen::Vector2d>;

Track random_track(std::mt19937_64 & rng, std::size_t n)
{
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  Track t(n);
  for (auto & p : t) {
    p = {u(rng), u(rng)};
  }
  return t;
}

RunMetrics run(const std::string & profile, std::size_t anchors, double odo, double fused)
{
  RunMetrics m;
  m.scenario_id = "s";
  m.profile = profile;
  m.anchors = anchors;
  m.rmse_odo_m = odo;
  m.rmse_fused_m = fused;
  if (anchors > 0) {
    m.gain = accuracy_gain(odo, fused);
  }
  return m;
}

}  // namespace

TEST(EvalMetrics, RmseExamples)
{
  const Track a{{0, 0}, {1, 1}, {2, 2}};
  EXPECT_EQ(rmse(a, a), 0.0);
  Track shifted = a;
  for (auto & p : shifted) {
    p += Eigen::Vector2d(3.0, 0.0);
  }
  EXPECT_DOUBLE_EQ(rmse(shifted, a), 3.0);
  const Track e{{3, 0}, {0, 4}};
  const Track z{{0, 0}, {0, 0}};
  EXPECT_NEAR(rmse(e, z), std::sqrt(12.5), 1e-12);
}

TEST(EvalMetrics, RmseRejectsBadInput)
{
  const Track a{{0, 0}};
  const Track b{{0, 0}, {1, 1}};
  EXPECT_THROW(rmse(a, b), Error);
  EXPECT_THROW(rmse(Track{}, Track{}), Error);
}

TEST(EvalMetrics, AccuracyGainExamples)
{
  // Corridor RMSEs without anchors and with three.
  EXPECT_NEAR(accuracy_gain(17.603, 5.679), (17.603 - 5.679) / 17.603, 1e-15);
  EXPECT_NEAR(accuracy_gain(17.603, 5.679), 0.6774, 5e-5);
  EXPECT_NEAR(accuracy_gain(3.202, 2.067), 0.3545, 5e-5);
  EXPECT_EQ(accuracy_gain(2.0, 2.0), 0.0);
  EXPECT_THROW(accuracy_gain(0.0, 1.0), Error);
  EXPECT_THROW(accuracy_gain(-1.0, 1.0), Error);
}

TEST(EvalMetricsProperty, RmseInvariants)
{
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + rng() % 50;
    const Track a = random_track(rng, n);
    const Track b = random_track(rng, n);
    const double base = rmse(a, b);
    ASSERT_GE(base, 0.0);
    ASSERT_EQ(rmse(a, a), 0.0);
    ASSERT_NEAR(rmse(b, a), base, 1e-12);
    const Eigen::Vector2d shift(u(rng), u(rng));
    Track as = a;
    Track bs = b;
    for (std::size_t k = 0; k < n; ++k) {
      as[k] += shift;
      bs[k] += shift;
    }
    ASSERT_NEAR(rmse(as, bs), base, 1e-9 * (1.0 + base));
  }
}

TEST(EvalMetricsProperty, GainBelowOneAndSignedByImprovement)
{
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double odo = u(rng) + 1e-6;
    const double fused = u(rng);
    const double g = accuracy_gain(odo, fused);
    ASSERT_LE(g, 1.0);
    ASSERT_EQ(g < 0.0, fused > odo);
  }
}

TEST(EvalMetrics, SummarizeSingleRun)
{
  const std::vector<RunMetrics> runs{run("ionet_like", 3, 10.0, 4.0)};
  const MetricsReport r = summarize(runs);
  ASSERT_EQ(r.rows.size(), 1U);
  EXPECT_EQ(r.rows[0].seeds, 1U);
  EXPECT_EQ(r.rows[0].rmse_odo_m.mean, 10.0);
  EXPECT_EQ(r.rows[0].rmse_fused_m.max, 4.0);
  EXPECT_NEAR(r.rows[0].gain->mean, 0.6, 1e-12);
  EXPECT_EQ(r.runs.size(), 1U);
}

TEST(EvalMetrics, SummarizeGroupsAndSorts)
{
  const std::vector<RunMetrics> runs{
    run("milliego_like", 3, 3.0, 2.0), run("ionet_like", 3, 10.0, 4.0),
    run("ionet_like", 0, 10.0, 10.0), run("ionet_like", 1, 10.0, 8.0),
    run("ionet_like", 3, 20.0, 6.0),
  };
  const MetricsReport r = summarize(runs);
  ASSERT_EQ(r.rows.size(), 4U);
  EXPECT_EQ(r.rows[0].profile, "ionet_like");
  EXPECT_EQ(r.rows[0].anchors, 0U);
  EXPECT_FALSE(r.rows[0].gain.has_value());
  EXPECT_EQ(r.rows[2].anchors, 3U);
  EXPECT_EQ(r.rows[2].seeds, 2U);
  EXPECT_EQ(r.rows[2].rmse_odo_m.mean, 15.0);
  EXPECT_EQ(r.rows[2].rmse_fused_m.min, 4.0);
  EXPECT_NEAR(r.rows[2].gain->mean, (0.6 + 0.7) / 2, 1e-12);
  EXPECT_NEAR(r.rows[2].gain->min, 0.6, 1e-12);
  EXPECT_EQ(r.rows[3].profile, "milliego_like");

  const std::string csv = r.to_csv();
  EXPECT_EQ(csv.rfind("profile,anchors,seeds,rmse_odo_mean_m,rmse_fused_mean_m,gain_mean\n", 0), 0U);
  EXPECT_NE(csv.find("ionet_like,0,1,10.000000,10.000000,\n"), std::string::npos);
  EXPECT_NE(csv.find("ionet_like,3,2,15.000000,5.000000,0.650000\n"), std::string::npos);
  const std::string text = r.to_text();
  EXPECT_NE(text.find("milliego_like"), std::string::npos);
  EXPECT_NE(text.find(" - "), std::string::npos);

  EXPECT_THROW(summarize(std::vector<RunMetrics>{}), Error);
}
