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

#ifndef LORAFUSE__BENCH_HPP_
#define LORAFUSE__BENCH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "lorafuse/eval_metrics.hpp"
#include "lorafuse/scenario_sim.hpp"

namespace lorafuse
{

struct BenchOptions
{
  std::size_t seeds = 10;
  /// Replaces each scenario's own seed as the first seed of the batch.
  std::optional<std::uint64_t> base_seed;
  /// 0 picks the hardware concurrency.
  std::size_t threads = 0;
};

/// Sorted *.json files in `dir`. kIo if `dir` is not a readable directory,
/// kInvalidArgument if it holds no scenario.
std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path & dir);

/// Runs every scenario for seeds base, base + 1, ..., base + seeds - 1.
/// Runs are spread over threads; the returned runs are ordered by
/// (scenario, seed) whatever the completion order.
std::vector<RunMetrics> run_batch(std::span<const Scenario> scenarios, const BenchOptions & opts);

MetricsReport run_bench(std::span<const Scenario> scenarios, const BenchOptions & opts);

}  // namespace lorafuse

#endif  // LORAFUSE__BENCH_HPP_
