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

#ifndef LORAFUSE__RF_MODEL_HPP_
#define LORAFUSE__RF_MODEL_HPP_

#include <cstddef>
#include <deque>
#include <istream>
#include <random>
#include <span>
#include <vector>

namespace lorafuse
{

/// Log-distance path loss model, RSSI(d) = slope * log10(d) + intercept.
///
/// Defaults are the SF7 regression constants. Under NLOS the slope is scaled
/// by `nlos_scale`, so the NLOS curve diverges from LOS with distance. The
/// tx power / reference path loss pair is only used to express the model in
/// the PL(d0) + 10 n log10(d/d0) + C form (see log_distance_params()).
struct PathLossModel
{
  double slope_db_per_decade = -28.5737;
  double intercept_dbm = -5.06;
  double noise_std_db = 4.887;
  double nlos_scale = 1.92;
  double tx_power_dbm = 22.0;
  double ref_distance_m = 1.0;
  double ref_pathloss_db = 30.483;

  /// Throws kInvalidArgument when slope >= 0, noise < 0, d0 <= 0 or nlos_scale < 1.
  void validate() const;

  double effective_slope(bool nlos) const
  {
    return nlos ? slope_db_per_decade * nlos_scale : slope_db_per_decade;
  }
};

/// Mean RSSI at distance d >= ref_distance_m. Closer than that is
/// kOutOfModelRange.
double rssi_at_distance(const PathLossModel & m, double d, bool nlos);

/// Inverse of rssi_at_distance(), clamped below at ref_distance_m.
double distance_from_rssi(const PathLossModel & m, double rssi_dbm, bool nlos);

/// Mean RSSI plus N(0, noise_std^2), rounded to whole dBm like a real receiver.
double sample_rssi(const PathLossModel & m, double d, bool nlos, std::mt19937_64 & rng);

/// Uniform moving average over the last `capacity` RSSI samples of one anchor.
/// Before the window fills, the mean of what has arrived is returned.
class SmoothingWindow
{
public:
  explicit SmoothingWindow(std::size_t capacity = 4);

  double push(double sample_dbm);
  double mean() const;
  std::size_t size() const {return buffer_.size();}
  std::size_t capacity() const {return capacity_;}
  bool empty() const {return buffer_.empty();}
  double min() const;
  double max() const;

private:
  std::size_t capacity_;
  std::deque<double> buffer_;
};

/// Pushes `sample_dbm` and returns the smoothed value.
inline double smooth_rssi(SmoothingWindow & w, double sample_dbm) {return w.push(sample_dbm);}

struct PathLossSample
{
  double distance_m;
  double rssi_dbm;
};

struct PathLossFit
{
  double slope_db_per_decade;
  double intercept_dbm;
  double residual_std_db;
};

/// Ordinary least squares of rssi against log10(d). residual_std uses n - 2
/// degrees of freedom. Needs >= 3 samples over >= 2 distinct distances.
PathLossFit fit_path_loss(std::span<const PathLossSample> samples);

/// Parses `distance_m,rssi_dbm` CSV (header required). Throws kSchema on
/// malformed content.
std::vector<PathLossSample> read_pathloss_csv(std::istream & in);

/// (n, C) of PL(d) = PL(d0) + 10 n log10(d / d0) + C, obtained by equating
/// PL(d) = tx_power - RSSI(d) at d0 and one decade out.
struct LogDistanceParams
{
  double attenuation_n;
  double bias_db;
};
LogDistanceParams log_distance_params(const PathLossModel & m);

/// Measured air speed / air time of a 240-byte message per spreading factor.
struct AirtimeEntry
{
  int sf;
  double air_speed_kbps;
  double air_time_s;
};

std::span<const AirtimeEntry> airtime_table();

/// Air time (s) for SF 7..11; other values are kInvalidArgument.
double airtime(int sf);

}  // namespace lorafuse

#endif  // LORAFUSE__RF_MODEL_HPP_
