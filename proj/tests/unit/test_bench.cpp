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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lorafuse/bench.hpp"
#include "lorafuse/error.hpp"
#include "lorafuse/scenario_io.hpp"

using namespace lorafuse;

namespace
{

std::vector<Scenario> short_suite()
{
  std::vector<Scenario> out;
  for (const auto & p : list_scenarios(std::string(LORAFUSE_SCENARIO_DIR) + "/corridor")) {
    Scenario s = load_scenario(p);
    s.duration_s = 20.0;
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(Bench, ListsSortedScenarios)
{
  const auto files = list_scenarios(std::string(LORAFUSE_SCENARIO_DIR) + "/corridor");
  ASSERT_EQ(files.size(), 12U);
  EXPECT_TRUE(std::is_sorted(files.begin(), files.end()));

  const auto empty = std::filesystem::temp_directory_path() / "lorafuse_bench_empty";
  std::filesystem::remove_all(empty);
  std::filesystem::create_directories(empty);
  std::ofstream(empty / "notes.txt") << "x";
  try {
    list_scenarios(empty);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  try {
    list_scenarios(empty / "missing");
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Bench, ResultsIndependentOfThreadCount)
{
  const auto suite = short_suite();
  BenchOptions one;
  one.seeds = 3;
  one.threads = 1;
  BenchOptions four = one;
  four.threads = 4;
  const auto a = run_batch(suite, one);
  const auto b = run_batch(suite, four);
  ASSERT_EQ(a.size(), suite.size() * 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].scenario_id, b[i].scenario_id);
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_EQ(a[i].rmse_fused_m, b[i].rmse_fused_m);
  }
  EXPECT_EQ(a[0].seed, suite[0].seed);
  EXPECT_EQ(a[2].seed, suite[0].seed + 2);
}

TEST(Bench, BaseSeedOverridesScenarioSeed)
{
  auto suite = short_suite();
  suite.resize(1);
  BenchOptions opts;
  opts.seeds = 2;
  opts.base_seed = 100;
  const auto runs = run_batch(suite, opts);
  ASSERT_EQ(runs.size(), 2U);
  EXPECT_EQ(runs[0].seed, 100U);
  EXPECT_EQ(runs[1].seed, 101U);

  Scenario direct = suite[0];
  direct.seed = 101;
  EXPECT_EQ(run_scenario(direct).metrics.rmse_fused_m, runs[1].rmse_fused_m);
}

TEST(Bench, SingleScenarioOneSeedGivesOneRow)
{
  auto suite = short_suite();
  suite.resize(1);
  BenchOptions opts;
  opts.seeds = 1;
  const MetricsReport r = run_bench(suite, opts);
  EXPECT_EQ(r.rows.size(), 1U);
  EXPECT_EQ(r.runs.size(), 1U);
}
