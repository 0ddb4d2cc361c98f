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

#include "lorafuse/rf_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "lorafuse/error.hpp"

namespace lorafuse
{

void PathLossModel::validate() const
{
  if (!std::isfinite(slope_db_per_decade) || !(slope_db_per_decade < 0.0)) {
    raise(ErrorCode::kInvalidArgument, "path loss slope must be negative");
  }
  if (!std::isfinite(intercept_dbm)) {
    raise(ErrorCode::kInvalidArgument, "path loss intercept must be finite");
  }
  if (!std::isfinite(noise_std_db) || noise_std_db < 0.0) {
    raise(ErrorCode::kInvalidArgument, "RSSI noise std must be >= 0");
  }
  if (!std::isfinite(nlos_scale) || nlos_scale < 1.0) {
    raise(ErrorCode::kInvalidArgument, "NLOS scale must be >= 1");
  }
  if (!std::isfinite(ref_distance_m) || !(ref_distance_m > 0.0)) {
    raise(ErrorCode::kInvalidArgument, "reference distance must be > 0");
  }
  if (!std::isfinite(tx_power_dbm) || !std::isfinite(ref_pathloss_db)) {
    raise(ErrorCode::kInvalidArgument, "tx power and reference path loss must be finite");
  }
}

double rssi_at_distance(const PathLossModel & m, double d, bool nlos)
{
  if (!std::isfinite(d) || d < m.ref_distance_m) {
    raise(
      ErrorCode::kOutOfModelRange,
      "distance " + std::to_string(d) + " m is below the model reference distance");
  }
  return m.effective_slope(nlos) * std::log10(d) + m.intercept_dbm;
}

double distance_from_rssi(const PathLossModel & m, double rssi_dbm, bool nlos)
{
  if (!std::isfinite(rssi_dbm)) {
    raise(ErrorCode::kInvalidArgument, "RSSI must be finite");
  }
  const double d = std::pow(10.0, (rssi_dbm - m.intercept_dbm) / m.effective_slope(nlos));
  return std::max(d, m.ref_distance_m);
}

double sample_rssi(const PathLossModel & m, double d, bool nlos, std::mt19937_64 & rng)
{
  const double mean = rssi_at_distance(m, d, nlos);
  double noise = 0.0;
  if (m.noise_std_db > 0.0) {
    std::normal_distribution<double> n(0.0, m.noise_std_db);
    noise = n(rng);
  }
  return std::round(mean + noise);
}

SmoothingWindow::SmoothingWindow(std::size_t capacity)
: capacity_(capacity)
{
  if (capacity == 0) {
    raise(ErrorCode::kInvalidArgument, "smoothing window must hold at least one sample");
  }
}

double SmoothingWindow::push(double sample_dbm)
{
  buffer_.push_back(sample_dbm);
  if (buffer_.size() > capacity_) {
    buffer_.pop_front();
  }
  return mean();
}

double SmoothingWindow::mean() const
{
  if (buffer_.empty()) {
    raise(ErrorCode::kInvalidArgument, "smoothing window is empty");
  }
  double sum = 0.0;
  for (double v : buffer_) {
    sum += v;
  }
  return sum / static_cast<double>(buffer_.size());
}

double SmoothingWindow::min() const
{
  return *std::min_element(buffer_.begin(), buffer_.end());
}

double SmoothingWindow::max() const
{
  return *std::max_element(buffer_.begin(), buffer_.end());
}

PathLossFit fit_path_loss(std::span<const PathLossSample> samples)
{
  if (samples.size() < 3) {
    raise(ErrorCode::kInsufficientData, "path loss fit needs at least 3 samples");
  }
  const auto n = static_cast<double>(samples.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto & s : samples) {
    if (!std::isfinite(s.distance_m) || !(s.distance_m > 0.0) || !std::isfinite(s.rssi_dbm)) {
      raise(ErrorCode::kInvalidArgument, "path loss samples need finite d > 0 and finite RSSI");
    }
    mx += std::log10(s.distance_m);
    my += s.rssi_dbm;
  }
  mx /= n;
  my /= n;

  // Centered sums keep the normal equations well conditioned.
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto & s : samples) {
    const double dx = std::log10(s.distance_m) - mx;
    sxx += dx * dx;
    sxy += dx * (s.rssi_dbm - my);
  }
  if (sxx <= 1e-12 * n) {
    raise(ErrorCode::kInsufficientData, "path loss fit needs at least two distinct distances");
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;

  double sse = 0.0;
  for (const auto & s : samples) {
    const double r = s.rssi_dbm - (slope * std::log10(s.distance_m) + intercept);
    sse += r * r;
  }
  return {slope, intercept, std::sqrt(sse / (n - 2.0))};
}

namespace
{

std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string & cell, std::size_t line, const char * column)
{
  const std::string t = trim(cell);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(v)) {
    raise(
      ErrorCode::kSchema,
      "line " + std::to_string(line) + ": column " + column + " is not a number: '" + t + "'");
  }
  return v;
}

}  // namespace

std::vector<PathLossSample> read_pathloss_csv(std::istream & in)
{
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<PathLossSample> out;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) {
      continue;
    }
    if (!have_header) {
      if (t != "distance_m,rssi_dbm") {
        raise(ErrorCode::kSchema, "line 1: expected header 'distance_m,rssi_dbm', got '" + t + "'");
      }
      have_header = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      raise(ErrorCode::kSchema, "line " + std::to_string(line_no) + ": expected two columns");
    }
    out.push_back(
      {parse_number(t.substr(0, comma), line_no, "distance_m"),
        parse_number(t.substr(comma + 1), line_no, "rssi_dbm")});
  }
  if (!have_header) {
    raise(ErrorCode::kSchema, "empty CSV: missing header 'distance_m,rssi_dbm'");
  }
  return out;
}

LogDistanceParams log_distance_params(const PathLossModel & m)
{
  // PL(d) = tx - slope*log10(d) - intercept. Matching the log term gives
  // 10 n = -slope; matching at d0 gives the bias against PL(d0).
  const double n = -m.slope_db_per_decade / 10.0;
  const double pl_at_d0 = m.tx_power_dbm - rssi_at_distance(m, m.ref_distance_m, false);
  return {n, pl_at_d0 - m.ref_pathloss_db};
}

namespace
{

constexpr std::array<AirtimeEntry, 5> kAirtime{{
  {7, 62.5, 0.447},
  {8, 19.2, 0.551},
  {9, 9.6, 0.674},
  {10, 4.8, 0.860},
  {11, 1.2, 1.708},
}};

}  // namespace

std::span<const AirtimeEntry> airtime_table()
{
  return kAirtime;
}

double airtime(int sf)
{
  for (const auto & e : kAirtime) {
    if (e.sf == sf) {
      return e.air_time_s;
    }
  }
  raise(ErrorCode::kInvalidArgument, "unsupported spreading factor " + std::to_string(sf));
}

}  // namespace lorafuse
