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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
//
//   lorafuse_acceptance --cli PATH_TO_LORAFUSE --work SCRATCH_DIR

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lorafuse/backhaul.hpp"
#include "lorafuse/bench.hpp"
#include "lorafuse/ekf_fusion.hpp"
#include "lorafuse/error.hpp"
#include "lorafuse/rf_model.hpp"
#include "lorafuse/scenario_io.hpp"
#include "lorafuse/scenario_sim.hpp"

using namespace lorafuse;
namespace fs = std::filesystem;

namespace
{

constexpr double kPi = std::numbers::pi;
const std::string kScenarios = LORAFUSE_SCENARIO_DIR;

// Tolerances.
constexpr double kJacobianRelTol = 1e-5;
constexpr double kRssi10mTol = 1e-4;
constexpr double kAttenuationTol = 1e-5;
constexpr double kFitSlopeTol = 1.5;
constexpr double kFitInterceptTol = 1.0;
constexpr double kFitResidualTol = 0.5;
constexpr double kIonetMinGain = 0.50;
constexpr double kMilliegoMinGain = 0.20;
constexpr double kMonotoneSlack = 0.10;
constexpr double kConvergedM = 1.0;
constexpr int kConvergeSteps = 200;
constexpr double kPsdTol = -1e-9;
constexpr int kSeeds = 10;

struct Outcome
{
  bool pass;
  std::string detail;
};

std::string fmt(const char * f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Means
{
  double odo = 0.0;
  double fused = 0.0;
  double gain = 0.0;
};

Means batch_means(const Scenario & s, double fps = 0.0)
{
  Scenario copy = s;
  if (fps > 0.0) {
    copy.frame_rate_fps = fps;
  }
  BenchOptions opts;
  opts.seeds = kSeeds;
  const auto runs = run_batch(std::span<const Scenario>(&copy, 1), opts);
  Means m;
  for (const auto & r : runs) {
    m.odo += r.rmse_odo_m / kSeeds;
    m.fused += r.rmse_fused_m / kSeeds;
    m.gain += r.gain.value_or(0.0) / kSeeds;
  }
  return m;
}

Scenario corridor(const std::string & profile, int anchors)
{
  return load_scenario(
    kScenarios + "/corridor/corridor_" + profile + "_a" + std::to_string(anchors) + ".json");
}

Outcome jacobian()
{
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-50.0, 50.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  const PathLossModel m;
  double worst = 0.0;
  int trials = 0;
  while (trials < 100) {
    const AnchorSet anchors({{1, pos(rng), pos(rng), 0.0}});
    const EkfState s{pos(rng), pos(rng), ang(rng)};
    if (std::hypot(s.x - anchors[0].x, s.y - anchors[0].y) < 0.5) {
      continue;
    }
    ++trials;
    const Eigen::MatrixXd jac = measurement_jacobian(s, anchors, m);
    for (int c = 0; c < 3; ++c) {
      const double h = 1e-6 * std::max(1.0, std::abs(s.vector()(c)));
      Eigen::Vector3d plus = s.vector();
      Eigen::Vector3d minus = s.vector();
      plus(c) += h;
      minus(c) -= h;
      const EkfState sp{plus.x(), plus.y(), plus.z()};
      const EkfState sm{minus.x(), minus.y(), minus.z()};
      Eigen::VectorXd fd = (measurement_fn(sp, anchors, m) - measurement_fn(sm, anchors, m)) / (2 * h);
      for (int r = 0; r < fd.size(); ++r) {
        const double scale = std::max(std::abs(fd(r)), std::abs(jac(r, c)));
        if (scale > 1e-12) {
          worst = std::max(worst, std::abs(fd(r) - jac(r, c)) / scale);
        }
      }
    }
  }
  const double t = seconds_since(t0);
  return {worst < kJacobianRelTol && t < 1.0,
    fmt("max relative error %.2e (tol %.0e), %.3f s", worst, kJacobianRelTol, t)};
}

Outcome pathloss_constants()
{
  const PathLossModel m;
  const double at1 = rssi_at_distance(m, 1.0, false);
  const double at10 = rssi_at_distance(m, 10.0, false);
  const double n = log_distance_params(m).attenuation_n;
  const bool ok = at1 == -5.06 && std::abs(at10 + 33.6337) <= kRssi10mTol &&
    std::abs(n - 2.85737) <= kAttenuationTol;
  return {ok, fmt("RSSI(1 m) %.6f, RSSI(10 m) %.6f, n %.7f", at1, at10, n)};
}

Outcome regression()
{
  const auto t0 = std::chrono::steady_clock::now();
  const PathLossModel m;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> logd(0.0, 2.0);
  std::vector<PathLossSample> samples;
  for (int i = 0; i < 1000; ++i) {
    const double d = std::pow(10.0, logd(rng));
    samples.push_back({d, sample_rssi(m, d, false, rng)});
  }
  const PathLossFit f = fit_path_loss(samples);
  const double t = seconds_since(t0);
  const bool ok = std::abs(f.slope_db_per_decade + 28.5737) <= kFitSlopeTol &&
    std::abs(f.intercept_dbm + 5.06) <= kFitInterceptTol &&
    std::abs(f.residual_std_db - 4.887) <= kFitResidualTol && t < 1.0;
  return {ok, fmt(
      "slope %.3f, intercept %.3f, residual std %.3f, %.3f s", f.slope_db_per_decade,
      f.intercept_dbm, f.residual_std_db, t)};
}

Outcome airtimes()
{
  const double expected[] = {0.447, 0.551, 0.674, 0.860, 1.708};
  bool ok = true;
  std::string got;
  for (int sf = 7; sf <= 11; ++sf) {
    ok = ok && airtime(sf) == expected[sf - 7];
    got += fmt("%s%.3f", sf == 7 ? "" : " ", airtime(sf));
  }
  return {ok, "SF7-11: " + got};
}

Outcome gain(const std::string & profile, double min_gain, double max_seconds)
{
  const auto t0 = std::chrono::steady_clock::now();
  const Means a0 = batch_means(corridor(profile, 0));
  const Means a3 = batch_means(corridor(profile, 3));
  const double t = seconds_since(t0);
  const bool ok = a3.gain >= min_gain && (max_seconds <= 0.0 || t < max_seconds);
  return {ok, fmt(
      "standalone %.3f m, fused %.3f m with 3 anchors, mean gain %.4f (min %.2f), %.2f s",
      a0.odo, a3.fused, a3.gain, min_gain, t)};
}

Outcome monotone()
{
  bool ok = true;
  std::string detail;
  for (const char * p : {"ionet_like", "milliego_like", "deeptio_like"}) {
    double prev = 0.0;
    detail += std::string(detail.empty() ? "" : "; ") + p + ":";
    for (int a : {0, 1, 3}) {
      const double fused = batch_means(corridor(p, a)).fused;
      if (a > 0 && fused > prev * (1.0 + kMonotoneSlack)) {
        ok = false;
      }
      detail += fmt(" %.3f", fused);
      prev = fused;
    }
  }
  return {ok, detail + fmt(" (slack %.0f%%)", kMonotoneSlack * 100)};
}

Outcome convergence()
{
  PathLossModel quiet;
  quiet.noise_std_db = 0.0;
  const AnchorSet anchors({{1, -8.0, -6.0, 1.0}, {2, 28.0, 12.0, 1.0}, {3, 5.0, 40.0, 1.0}});
  EkfFilter f({10.0, 0.0, 0.0}, default_initial_covariance(), NoiseConfig{}, anchors, quiet);
  Pose truth = make_initial_pose(0.0, 0.0);
  int first = -1;
  double err = 0.0;
  for (int k = 1; k <= kConvergeSteps; ++k) {
    const PoseDelta d = make_planar_delta(0.14, 0.0, 0.0);
    truth = compose(truth, d);
    std::vector<std::optional<double>> rssi;
    for (const auto & a : anchors.anchors()) {
      const Eigen::Vector3d off(truth.translation().x() - a.x, truth.translation().y() - a.y, -a.z);
      rssi.push_back(rssi_at_distance(quiet, off.norm(), false));
    }
    f.step(d, 0.1, rssi);
    err = std::hypot(f.state().x - truth.translation().x(), f.state().y - truth.translation().y());
    if (first < 0 && err < kConvergedM) {
      first = k;
    }
  }
  return {first > 0 && err < kConvergedM,
    fmt("10 m offset: error < %.0f m at step %d, %.4f m at step %d", kConvergedM, first, err, kConvergeSteps)};
}

Outcome filter_health()
{
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(-60.0, 60.0);
  std::uniform_real_distribution<double> rssi(-120.0, 0.0);
  std::uniform_real_distribution<double> ang(-3 * kPi, 3 * kPi);
  std::bernoulli_distribution coin(0.5);
  const AnchorSet anchors({{1, -8.0, -6.0, 1.0}, {2, 28.0, 12.0, 1.0}, {3, 5.0, 40.0, 1.0}, {4, -10, 20, 1}});
  EkfFilter f({0.0, 0.0, 0.0}, default_initial_covariance(), NoiseConfig{}, anchors, PathLossModel{});
  double min_eig = 1e300;
  double max_asym = 0.0;
  bool theta_ok = true;
  for (int i = 0; i < 10000; ++i) {
    if (coin(rng)) {
      f.predict();
      Measurement z;
      z.has_odometry = coin(rng);
      z.xi_x = pos(rng);
      z.xi_y = pos(rng);
      z.xi_theta = ang(rng);
      z.omega = std::abs(ang(rng));
      for (std::size_t a = 0; a < anchors.size(); ++a) {
        z.gammas.push_back(coin(rng) ? std::optional<double>(rssi(rng)) : std::nullopt);
      }
      f.update(z);
    } else {
      std::vector<std::optional<double>> r;
      for (std::size_t a = 0; a < anchors.size(); ++a) {
        r.push_back(coin(rng) ? std::optional<double>(rssi(rng)) : std::nullopt);
      }
      f.step(make_planar_delta(pos(rng) / 60.0, pos(rng) / 120.0, ang(rng) / 6.0), 0.1, r);
    }
    const Covariance3 & p = f.covariance();
    max_asym = std::max(max_asym, (p - p.transpose()).cwiseAbs().maxCoeff());
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Covariance3>(p).eigenvalues().minCoeff());
    theta_ok = theta_ok && f.state().theta > -kPi && f.state().theta <= kPi;
  }
  return {min_eig >= kPsdTol && max_asym <= 1e-9 && theta_ok,
    fmt("10000 cycles: min eigenvalue %.3e, max asymmetry %.1e, theta in range: %s",
      min_eig, max_asym, theta_ok ? "yes" : "no")};
}

Outcome wire_protocol()
{
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<float> u(-1e4F, 1e4F);
  std::uniform_real_distribution<float> ang(-3.14F, 3.14F);
  std::uniform_int_distribution<int> rssi(kMinRssiDbm, kMaxRssiDbm);
  std::size_t round_trips = 0;
  std::vector<std::vector<std::uint8_t>> sample;
  for (int i = 0; i < 10000; ++i) {
    PosePacket p;
    p.device_id = static_cast<std::uint16_t>(rng());
    p.seq = static_cast<std::uint32_t>(rng());
    p.timestamp_ms = rng();
    p.translation = {u(rng), u(rng), u(rng)};
    p.yaw = ang(rng);
    if (i % 2 == 0) {
      p.quaternion = {std::cos(p.yaw / 2), 0.0F, 0.0F, std::sin(p.yaw / 2)};
    }
    const RssiRelayPacket r{
      static_cast<std::uint16_t>(rng()), static_cast<std::uint16_t>(rng()),
      static_cast<std::uint32_t>(rng()), static_cast<std::int16_t>(rssi(rng))};
    auto fp = encode(p);
    auto fr = encode(r);
    round_trips += std::get<PosePacket>(decode(fp).packet) == p;
    round_trips += std::get<RssiRelayPacket>(decode(fr).packet) == r;
    if (i < 500) {
      sample.push_back(std::move(fp));
      sample.push_back(std::move(fr));
    }
  }

  std::size_t flips = 0;
  std::size_t detected = 0;
  for (const auto & f : sample) {
    for (std::size_t bit = 0; bit < f.size() * 8; ++bit) {
      auto g = f;
      g[bit / 8] ^= static_cast<std::uint8_t>(1U << (bit % 8));
      ++flips;
      try {
        decode(g);
      } catch (const Error &) {
        ++detected;
      }
    }
  }

  const auto tf = std::chrono::steady_clock::now();
  std::size_t classified = 0;
  std::vector<std::uint8_t> buf;
  for (int i = 0; i < 1000000; ++i) {
    buf.resize(rng() % 64);
    for (auto & b : buf) {
      b = static_cast<std::uint8_t>(rng());
    }
    if (buf.size() >= 2 && (i & 1) != 0) {
      buf[0] = kMagic0;
      buf[1] = kMagic1;
    }
    try {
      decode(buf);
      ++classified;
    } catch (const Error &) {
      ++classified;
    }
  }
  const double fuzz_s = seconds_since(tf);
  const bool ok = round_trips == 20000 && detected == flips && classified == 1000000 && fuzz_s < 60.0;
  return {ok, fmt(
      "round trips %zu/20000, bit flips detected %zu/%zu on %zu frames, fuzz 1e6 inputs in %.2f s (total %.2f s)",
      round_trips, detected, flips, sample.size(), fuzz_s, seconds_since(t0))};
}

std::string read_file(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string & cli, const fs::path & work)
{
  if (cli.empty()) {
    return {false, "no --cli given"};
  }
  fs::remove_all(work);
  for (const char * run : {"a", "b"}) {
    const std::string cmd = "\"" + cli + "\" simulate \"" + kScenarios + "/corridor.json\" -o \"" +
      (work / run).string() + "\" --seed 7 > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      return {false, "simulate failed: " + cmd};
    }
  }
  std::size_t same = 0;
  const char * files[] = {"trajectory.csv", "rssi.csv", "metrics.csv", "summary.json"};
  for (const char * f : files) {
    const std::string a = read_file(work / "a" / f);
    same += !a.empty() && a == read_file(work / "b" / f);
  }
  return {same == 4, fmt("%zu/4 output files byte-identical across two runs (seed 7)", same)};
}

Outcome frame_rate()
{
  const Scenario s = corridor("ionet_like", 0);
  const Means at10 = batch_means(s, 10.0);
  const Means at5 = batch_means(s, 5.0);
  return {at5.odo > at10.odo, fmt("standalone RMSE %.3f m at 10 FPS, %.3f m at 5 FPS", at10.odo, at5.odo)};
}

}  // namespace

int main(int argc, char ** argv)
{
  std::string cli;
  fs::path work = fs::temp_directory_path() / "lorafuse_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") {
      cli = argv[i + 1];
    } else if (flag == "--work") {
      work = argv[i + 1];
    } else {
      std::fprintf(stderr, "unknown argument %s\n", argv[i]);
      return 2;
    }
  }

  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
    {"Jacobian matches finite differences", jacobian},
    {"Path loss constants", pathloss_constants},
    {"Regression recovery", regression},
    {"Airtime table", airtimes},
    {"IONet-like fusion gain", [] {return gain("ionet_like", kIonetMinGain, 30.0);}},
    {"milliEgo-like fusion gain", [] {return gain("milliego_like", kMilliegoMinGain, 0.0);}},
    {"Anchor monotonicity", monotone},
    {"Convergence from a 10 m offset", convergence},
    {"Filter health", filter_health},
    {"Wire protocol", wire_protocol},
    {"Determinism", [&] {return determinism(cli, work);}},
    {"Frame-rate trend", frame_rate},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception & e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
