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

// Writes the path loss CSV fixtures used by the tests:
//   pathloss_noiseless.csv   canonical model at 1, 2, 5, 10, 20, 50 m
//   pathloss_noisy_seed42.csv  1000 samples, log-uniform d in [1, 100] m,
//                              canonical noise, rounded to whole dBm
//
// Usage: make_pathloss_fixture OUT_DIR

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "lorafuse/rf_model.hpp"
#include "lorafuse/scenario_io.hpp"

int main(int argc, char ** argv)
{
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s OUT_DIR\n", argv[0]);
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  const lorafuse::PathLossModel model;
  char line[64];

  std::string exact = "distance_m,rssi_dbm\n";
  for (double d : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
    std::snprintf(line, sizeof(line), "%.1f,%.10f\n", d, lorafuse::rssi_at_distance(model, d, false));
    exact += line;
  }
  lorafuse::write_text_file(dir / "pathloss_noiseless.csv", exact);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> log_d(0.0, 2.0);
  std::string noisy = "distance_m,rssi_dbm\n";
  for (int i = 0; i < 1000; ++i) {
    const double d = std::pow(10.0, log_d(rng));
    std::snprintf(line, sizeof(line), "%.4f,%.0f\n", d, lorafuse::sample_rssi(model, d, false, rng));
    noisy += line;
  }
  lorafuse::write_text_file(dir / "pathloss_noisy_seed42.csv", noisy);
  return 0;
}
