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

#include "lorafuse/bench.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "lorafuse/error.hpp"

namespace lorafuse
{

std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path & dir)
{
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    raise(ErrorCode::kIo, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> out;
  for (const auto & entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      out.push_back(entry.path());
    }
  }
  if (ec) {
    raise(ErrorCode::kIo, "cannot list " + dir.string());
  }
  if (out.empty()) {
    raise(ErrorCode::kInvalidArgument, "no scenario files in " + dir.string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RunMetrics> run_batch(std::span<const Scenario> scenarios, const BenchOptions & opts)
{
  if (scenarios.empty() || opts.seeds == 0) {
    raise(ErrorCode::kInvalidArgument, "bench needs at least one scenario and one seed");
  }
  const std::size_t jobs = scenarios.size() * opts.seeds;
  std::vector<RunMetrics> results(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
      for (std::size_t j = next++; j < jobs; j = next++) {
        try {
          Scenario s = scenarios[j / opts.seeds];
          s.seed = opts.base_seed.value_or(s.seed) + j % opts.seeds;
          results[j] = run_scenario(s).metrics;
        } catch (...) {
          errors[j] = std::current_exception();
        }
      }
    };

  std::size_t threads = opts.threads != 0 ? opts.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, jobs);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    worker();
  }
  for (const auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return results;
}

MetricsReport run_bench(std::span<const Scenario> scenarios, const BenchOptions & opts)
{
  const auto runs = run_batch(scenarios, opts);
  return summarize(runs);
}

}  // namespace lorafuse
