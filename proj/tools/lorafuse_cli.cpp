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

// lorafuse command line: simulate, pathloss-fit, airtime, bench.
//
// Exit codes: 0 success, 2 usage or schema error, 3 IO or runtime error.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lorafuse/lorafuse.h"

namespace
{

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int exit_code(lf_status s)
{
  switch (s) {
    case LF_OK:
      return 0;
    case LF_IO:
    case LF_INTERNAL:
    case LF_NUMERICAL_FAILURE:
    case LF_NEAR_SINGULARITY:
    case LF_DEGENERATE_POSE:
      return kExitRuntime;
    default:
      return kExitUsage;
  }
}

int report(lf_status s, const char * what)
{
  std::fprintf(stderr, "lorafuse: %s: %s: %s\n", what, lf_status_string(s), lf_last_error());
  return exit_code(s);
}

// --seed wins over LORAFUSE_SEED; neither keeps the scenario's own seed.
bool resolve_seed(const std::optional<std::uint64_t> & flag, std::optional<std::uint64_t> & out)
{
  if (flag) {
    out = flag;
    return true;
  }
  const char * env = std::getenv("LORAFUSE_SEED");
  if (env == nullptr || *env == '\0') {
    return true;
  }
  char * end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || env[0] == '-') {
    std::fprintf(stderr, "lorafuse: LORAFUSE_SEED is not an unsigned integer: '%s'\n", env);
    return false;
  }
  out = v;
  return true;
}

struct Handles
{
  lf_scenario * scenario = nullptr;
  lf_run * run = nullptr;
  lf_report * report = nullptr;
  ~Handles()
  {
    lf_run_destroy(run);
    lf_scenario_destroy(scenario);
    lf_report_destroy(report);
  }
};

int cmd_simulate(const std::string & path, const std::string & out_dir, std::optional<std::uint64_t> seed_flag)
{
  std::optional<std::uint64_t> seed;
  if (!resolve_seed(seed_flag, seed)) {
    return kExitUsage;
  }
  Handles h;
  if (auto s = lf_scenario_load(path.c_str(), &h.scenario); s != LF_OK) {
    return report(s, "cannot load scenario");
  }
  if (seed) {
    lf_scenario_set_seed(h.scenario, *seed);
  }
  if (auto s = lf_run_scenario(h.scenario, &h.run); s != LF_OK) {
    return report(s, "simulation failed");
  }
  if (auto s = lf_run_write(h.run, out_dir.c_str()); s != LF_OK) {
    return report(s, "cannot write outputs");
  }
  lf_run_metrics m{};
  lf_run_metrics_get(h.run, &m);
  std::printf(
    "seed %llu: %zu frames, %zu anchors, rmse_odo %.3f m, rmse_fused %.3f m",
    static_cast<unsigned long long>(m.seed), m.frames, m.anchors, m.rmse_odo_m, m.rmse_fused_m);
  if (m.has_gain != 0) {
    std::printf(", gain %.3f", m.gain);
  }
  std::printf("\n");
  return 0;
}

int cmd_pathloss_fit(const std::string & path, const std::string & out_path)
{
  lf_pathloss_fit fit{};
  if (auto s = lf_pathloss_fit_csv(path.c_str(), &fit); s != LF_OK) {
    return report(s, "path loss fit failed");
  }
  nlohmann::ordered_json j;
  j["samples"] = fit.samples;
  j["slope_db_per_decade"] = fit.slope_db_per_decade;
  j["intercept_dbm"] = fit.intercept_dbm;
  j["residual_std_db"] = fit.residual_std_db;
  j["attenuation_n"] = fit.attenuation_n;
  j["bias_db"] = fit.bias_db;
  const std::string text = j.dump(2) + "\n";
  std::fputs(text.c_str(), stdout);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
      std::fprintf(stderr, "lorafuse: cannot write %s\n", out_path.c_str());
      return kExitRuntime;
    }
  }
  return 0;
}

int cmd_airtime(int sf)
{
  double t = 0.0;
  if (auto s = lf_airtime(sf, &t); s != LF_OK) {
    return report(s, "airtime");
  }
  std::printf("%.3f\n", t);
  return 0;
}

int cmd_bench(
  const std::string & dir, std::size_t seeds, std::optional<std::uint64_t> seed_flag,
  std::size_t threads, bool csv, const std::string & out_dir)
{
  std::optional<std::uint64_t> seed;
  if (!resolve_seed(seed_flag, seed)) {
    return kExitUsage;
  }
  lf_bench_options opts{seeds, seed ? 1 : 0, seed.value_or(0), threads};
  Handles h;
  if (auto s = lf_bench_dir(dir.c_str(), &opts, &h.report); s != LF_OK) {
    return report(s, "bench failed");
  }
  std::fputs(csv ? lf_report_csv(h.report) : lf_report_text(h.report), stdout);
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream c(std::filesystem::path(out_dir) / "metrics.csv", std::ios::binary);
    c << lf_report_csv(h.report);
    std::ofstream t(std::filesystem::path(out_dir) / "metrics.txt", std::ios::binary);
    t << lf_report_text(h.report);
    if (ec || !c || !t) {
      std::fprintf(stderr, "lorafuse: cannot write bench outputs to %s\n", out_dir.c_str());
      return kExitRuntime;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"EKF fusion of drifting odometry with LoRa RSSI ranges"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lf_version());

  std::string scenario_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  auto * simulate = app.add_subcommand("simulate", "Run one scenario and write trajectory files");
  simulate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  simulate->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
  simulate->add_option("--seed", seed, "Seed (overrides LORAFUSE_SEED and the scenario)");

  std::string samples_path;
  std::string fit_out;
  auto * fit = app.add_subcommand("pathloss-fit", "Fit RSSI = slope log10(d) + intercept");
  fit->add_option("samples", samples_path, "CSV with header distance_m,rssi_dbm")->required();
  fit->add_option("-o,--out", fit_out, "Also write the fitted model JSON here");

  int sf = 0;
  auto * air = app.add_subcommand("airtime", "Air time of a 240-byte message");
  air->add_option("--sf", sf, "Spreading factor (7-11)")->required();

  std::string bench_dir;
  std::size_t seeds = 10;
  std::size_t threads = 0;
  bool csv = false;
  std::string bench_out;
  auto * bench = app.add_subcommand("bench", "Run every scenario in a directory over several seeds");
  bench->add_option("dir", bench_dir, "Directory of scenario JSON files")->required();
  bench->add_option("--seeds", seeds, "Seeds per scenario")->capture_default_str();
  bench->add_option("--seed", seed, "First seed (overrides LORAFUSE_SEED and the scenarios)");
  bench->add_option("--threads", threads, "Worker threads, 0 = all cores")->capture_default_str();
  bench->add_flag("--csv", csv, "Print CSV instead of the text table");
  bench->add_option("-o,--out", bench_out, "Also write metrics.csv and metrics.txt here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*simulate) {
    return cmd_simulate(scenario_path, out_dir, seed);
  }
  if (*fit) {
    return cmd_pathloss_fit(samples_path, fit_out);
  }
  if (*air) {
    return cmd_airtime(sf);
  }
  return cmd_bench(bench_dir, seeds, seed, threads, csv, bench_out);
}
