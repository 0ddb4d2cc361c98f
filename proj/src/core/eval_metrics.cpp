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

#include "lorafuse/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include "lorafuse/error.hpp"

namespace lorafuse
{

namespace
{

Stat stat_of(const std::vector<double> & v)
{
  Stat s{0.0, v.front(), v.front()};
  for (double x : v) {
    s.mean += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean /= static_cast<double>(v.size());
  return s;
}

std::string fmt(double v, int prec = 4)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

}  // namespace

double rmse(std::span<const Eigen::Vector2d> est, std::span<const Eigen::Vector2d> truth)
{
  if (est.size() != truth.size()) {
    raise(
      ErrorCode::kInvalidArgument,
      "trajectory lengths differ (" + std::to_string(est.size()) + " vs " +
      std::to_string(truth.size()) + ")");
  }
  if (est.empty()) {
    raise(ErrorCode::kInvalidArgument, "rmse of an empty trajectory");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    sum += (est[i] - truth[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(est.size()));
}

double accuracy_gain(double rmse_odo_m, double rmse_fused_m)
{
  if (!(rmse_odo_m > 0.0)) {
    raise(ErrorCode::kInvalidArgument, "accuracy gain needs a positive odometry RMSE");
  }
  return (rmse_odo_m - rmse_fused_m) / rmse_odo_m;
}

MetricsReport summarize(std::span<const RunMetrics> runs)
{
  if (runs.empty()) {
    raise(ErrorCode::kInsufficientData, "no runs to summarize");
  }
  struct Acc
  {
    std::vector<double> odo, fused, gain;
  };
  std::map<std::pair<std::string, std::size_t>, Acc> groups;
  for (const auto & r : runs) {
    auto & g = groups[{r.profile, r.anchors}];
    g.odo.push_back(r.rmse_odo_m);
    g.fused.push_back(r.rmse_fused_m);
    if (r.gain) {
      g.gain.push_back(*r.gain);
    }
  }

  MetricsReport report;
  report.runs.assign(runs.begin(), runs.end());
  for (const auto & [key, g] : groups) {
    MetricsRow row;
    row.profile = key.first;
    row.anchors = key.second;
    row.seeds = g.odo.size();
    row.rmse_odo_m = stat_of(g.odo);
    row.rmse_fused_m = stat_of(g.fused);
    if (key.second > 0 && !g.gain.empty()) {
      row.gain = stat_of(g.gain);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string MetricsReport::to_csv() const
{
  std::string out = "profile,anchors,seeds,rmse_odo_mean_m,rmse_fused_mean_m,gain_mean\n";
  for (const auto & r : rows) {
    out += r.profile + "," + std::to_string(r.anchors) + "," + std::to_string(r.seeds) + "," +
      fmt(r.rmse_odo_m.mean, 6) + "," + fmt(r.rmse_fused_m.mean, 6) + "," +
      (r.gain ? fmt(r.gain->mean, 6) : "") + "\n";
  }
  return out;
}

std::string MetricsReport::to_text() const
{
  const std::vector<std::string> header{
    "profile", "anchors", "seeds", "odo_mean", "odo_min", "odo_max",
    "fused_mean", "fused_min", "fused_max", "gain_mean", "gain_min", "gain_max"};
  std::vector<std::vector<std::string>> cells{header};
  for (const auto & r : rows) {
    cells.push_back(
      {r.profile, std::to_string(r.anchors), std::to_string(r.seeds),
        fmt(r.rmse_odo_m.mean), fmt(r.rmse_odo_m.min), fmt(r.rmse_odo_m.max),
        fmt(r.rmse_fused_m.mean), fmt(r.rmse_fused_m.min), fmt(r.rmse_fused_m.max),
        r.gain ? fmt(r.gain->mean) : "-", r.gain ? fmt(r.gain->min) : "-",
        r.gain ? fmt(r.gain->max) : "-"});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto & row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  for (const auto & row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      // Left-align the profile name, right-align numbers.
      const std::string pad(width[c] - row[c].size(), ' ');
      out += c == 0 ? row[c] + pad : pad + row[c];
      out += c + 1 == row.size() ? "\n" : "  ";
    }
  }
  return out;
}

}  // namespace lorafuse
