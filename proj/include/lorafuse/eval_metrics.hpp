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

#ifndef LORAFUSE__EVAL_METRICS_HPP_
#define LORAFUSE__EVAL_METRICS_HPP_

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lorafuse
{

/// Root mean square of the frame-wise 2D Euclidean error. No alignment is
/// applied. Throws kInvalidArgument on a length mismatch or empty input.
double rmse(std::span<const Eigen::Vector2d> est, std::span<const Eigen::Vector2d> truth);

/// (rmse_odo - rmse_fused) / rmse_odo. Throws kInvalidArgument if
/// rmse_odo <= 0.
double accuracy_gain(double rmse_odo_m, double rmse_fused_m);

/// Metrics of a single seeded run.
struct RunMetrics
{
  std::string scenario_id;
  std::string profile;
  std::size_t anchors = 0;
  std::uint64_t seed = 0;
  double rmse_odo_m = 0.0;
  double rmse_fused_m = 0.0;
  /// Absent when there are no anchors or the odometry error is zero.
  std::optional<double> gain;
};

struct Stat
{
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// One (profile, anchor count) row.
struct MetricsRow
{
  std::string profile;
  std::size_t anchors = 0;
  std::size_t seeds = 0;
  Stat rmse_odo_m;
  Stat rmse_fused_m;
  std::optional<Stat> gain;
};

struct MetricsReport
{
  std::vector<MetricsRow> rows;
  std::vector<RunMetrics> runs;

  /// Header `profile,anchors,seeds,rmse_odo_mean_m,rmse_fused_mean_m,gain_mean`.
  std::string to_csv() const;
  /// Aligned table including min/max columns.
  std::string to_text() const;
};

/// Groups runs by (profile, anchors), sorted by profile then anchor count.
/// The gain statistics average per-run gains. Throws kInsufficientData on
/// an empty input.
MetricsReport summarize(std::span<const RunMetrics> runs);

}  // namespace lorafuse

#endif  // LORAFUSE__EVAL_METRICS_HPP_
