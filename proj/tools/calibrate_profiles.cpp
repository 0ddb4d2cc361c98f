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

// Calibrates the odometry drift profiles used by the bundled corridor suite.
//
// For each profile the shape (ratios between noise terms) is fixed and a
// single magnitude is bisected until the mean standalone RMSE over the
// calibration seeds hits the target. The fused RMSE with 1, 3 and 4 anchors
// under the default filter settings is printed for reference.
//
// Usage: calibrate_profiles [--write DIR]
// With --write, the corridor suite (profile x anchors {0,1,3,4}) and
// corridor.json are written into DIR.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lorafuse/scenario_io.hpp"
#include "lorafuse/scenario_sim.hpp"

namespace
{

using namespace lorafuse;

constexpr std::uint64_t kCalibrationSeed = 1000;
constexpr int kCalibrationSeeds = 10;
constexpr std::uint64_t kSuiteSeed = 1;

// Compact scenario file: the profile by its built-in name and only the
// settings that differ from the defaults.
std::string suite_json(const Scenario & s)
{
  auto j = nlohmann::ordered_json::parse(scenario_to_json(s));
  j["odometry_profile"] = s.odometry_profile.name;
  j["rf"] = {{"nlos", s.rf.nlos}};
  j.erase("filter");
  j.erase("start");
  return j.dump(2) + "\n";
}

struct Target
{
  const char * name;
  OdometryProfile shape;
  double standalone_rmse_m;
};

Scenario corridor(const OdometryProfile & p, std::size_t anchors)
{
  static const std::vector<Anchor> kAnchors{
    {1, -8.0, -6.0, 1.0}, {2, 28.0, 12.0, 1.0}, {3, 5.0, 40.0, 1.0},
    {4, -10.0, 20.0, 1.0}, {5, 25.0, -8.0, 1.0}};
  Scenario s;
  s.id = "corridor_" + p.name + "_a" + std::to_string(anchors);
  s.seed = kSuiteSeed;
  s.frame_rate_fps = 10.0;
  s.duration_s = 160.0;
  s.trajectory = RectangleTrajectory{20.0, 30.0, 2, 1.4, 90.0};
  s.anchors = std::vector<Anchor>(kAnchors.begin(), kAnchors.begin() + static_cast<long>(anchors));
  s.odometry_profile = p;
  s.rf.nlos = true;
  return s;
}

OdometryProfile scaled(const OdometryProfile & shape, double k)
{
  OdometryProfile p = shape;
  p.translation_noise_std *= k;
  p.yaw_noise_std *= k;
  p.yaw_bias_drift *= k;
  p.translation_scale_error *= k;
  return p;
}

struct Mean
{
  double odo = 0.0;
  double fused = 0.0;
};

Mean mean_rmse(Scenario s)
{
  Mean m;
  for (int i = 0; i < kCalibrationSeeds; ++i) {
    s.seed = kCalibrationSeed + static_cast<std::uint64_t>(i);
    const auto r = run_scenario(s);
    m.odo += r.metrics.rmse_odo_m / kCalibrationSeeds;
    m.fused += r.metrics.rmse_fused_m / kCalibrationSeeds;
  }
  return m;
}

double calibrate_magnitude(const Target & t)
{
  double lo = 1e-3;
  double hi = 2.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double rmse = mean_rmse(corridor(scaled(t.shape, mid), 0)).odo;
    (rmse < t.standalone_rmse_m ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

int main(int argc, char ** argv)
{
  std::filesystem::path write_dir;
  if (argc == 3 && std::string(argv[1]) == "--write") {
    write_dir = argv[2];
  } else if (argc != 1) {
    std::fprintf(stderr, "usage: %s [--write DIR]\n", argv[0]);
    return 2;
  }

  // Shapes: IONet-like drift is dominated by scale error, the radar and
  // thermal frontends by per-frame noise.
  const std::vector<Target> targets{
    {"ionet_like", {"ionet_like", 0.5, 0.02, 0.005, 1.0, 10.0}, 17.603},
    {"milliego_like", {"milliego_like", 1.0, 0.05, 0.01, 1.0, 10.0}, 3.202},
    {"deeptio_like", {"deeptio_like", 1.0, 0.05, 0.01, 1.0, 10.0}, 3.517},
  };

  for (const auto & t : targets) {
    const double k = calibrate_magnitude(t);
    const OdometryProfile p = scaled(t.shape, k);
    std::printf(
      "%s: magnitude %.5f -> translation_noise_std %.6g, yaw_noise_std %.6g, "
      "yaw_bias_drift %.6g, translation_scale_error %.6g\n",
      t.name, k, p.translation_noise_std, p.yaw_noise_std, p.yaw_bias_drift,
      p.translation_scale_error);
    const OdometryProfile frozen = builtin_profile(t.name);
    if (std::abs(frozen.translation_scale_error / p.translation_scale_error - 1.0) > 1e-5) {
      std::printf("  note: built-in %s differs from this calibration\n", t.name);
    }
    std::printf("  fused RMSE:");
    for (std::size_t m : {1, 3, 4}) {
      std::printf(" %zu anchors %.3f m", m, mean_rmse(corridor(p, m)).fused);
    }
    std::printf("\n");

    if (!write_dir.empty()) {
      std::filesystem::create_directories(write_dir / "corridor");
      for (std::size_t m : {0, 1, 3, 4}) {
        const Scenario s = corridor(p, m);
        write_text_file(write_dir / "corridor" / (s.id + ".json"), suite_json(s));
      }
      if (t.name == std::string("milliego_like")) {
        Scenario s = corridor(p, 3);
        s.id = "corridor";
        write_text_file(write_dir / "corridor.json", suite_json(s));
      }
    }
  }
  return 0;
}
