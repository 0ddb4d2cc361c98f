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

#include "lorafuse/lorafuse.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "lorafuse/backhaul.hpp"
#include "lorafuse/bench.hpp"
#include "lorafuse/ekf_fusion.hpp"
#include "lorafuse/error.hpp"
#include "lorafuse/rf_model.hpp"
#include "lorafuse/scenario_io.hpp"
#include "lorafuse/scenario_sim.hpp"

struct lf_filter
{
  lorafuse::EkfFilter filter;
};

struct lf_scenario
{
  lorafuse::Scenario scenario;
};

struct lf_run
{
  lorafuse::RunRecord record;
};

struct lf_report
{
  lorafuse::MetricsReport report;
  std::string csv;
  std::string text;
};

namespace
{

thread_local std::string g_last_error;

lf_status to_status(lorafuse::ErrorCode code)
{
  using lorafuse::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return LF_INVALID_ARGUMENT;
    case ErrorCode::kOutOfModelRange: return LF_OUT_OF_MODEL_RANGE;
    case ErrorCode::kDegeneratePose: return LF_DEGENERATE_POSE;
    case ErrorCode::kInsufficientData: return LF_INSUFFICIENT_DATA;
    case ErrorCode::kNearSingularity: return LF_NEAR_SINGULARITY;
    case ErrorCode::kNumericalFailure: return LF_NUMERICAL_FAILURE;
    case ErrorCode::kNotAFrame: return LF_NOT_A_FRAME;
    case ErrorCode::kCorruptFrame: return LF_CORRUPT_FRAME;
    case ErrorCode::kUnsupportedFrame: return LF_UNSUPPORTED_FRAME;
    case ErrorCode::kTruncatedFrame: return LF_TRUNCATED_FRAME;
    case ErrorCode::kSchema: return LF_SCHEMA;
    case ErrorCode::kIo: return LF_IO;
  }
  return LF_INTERNAL;
}

lf_status fail(lf_status status, const std::string & msg)
{
  g_last_error = msg;
  return status;
}

// Runs fn, translating exceptions into a status and the thread's last error.
template<typename Fn>
lf_status guarded(Fn && fn) noexcept
{
  try {
    g_last_error.clear();
    return fn();
  } catch (const lorafuse::Error & e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return fail(LF_INTERNAL, "out of memory");
  } catch (const std::exception & e) {
    return fail(LF_INTERNAL, e.what());
  } catch (...) {
    return fail(LF_INTERNAL, "unknown exception");
  }
}

lf_status null_arg(const char * name)
{
  return fail(LF_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

void fill_fit(const lorafuse::PathLossFit & fit, std::size_t n, lf_pathloss_fit * out)
{
  lorafuse::PathLossModel m;
  m.slope_db_per_decade = fit.slope_db_per_decade;
  m.intercept_dbm = fit.intercept_dbm;
  const auto params = lorafuse::log_distance_params(m);
  *out = {fit.slope_db_per_decade, fit.intercept_dbm, fit.residual_std_db, params.attenuation_n,
    params.bias_db, n};
}

lorafuse::Packet from_c(const lf_packet & p)
{
  if (p.type == LF_PACKET_POSE) {
    lorafuse::PosePacket q;
    q.device_id = p.pose.device_id;
    q.seq = p.pose.seq;
    q.timestamp_ms = p.pose.timestamp_ms;
    std::memcpy(q.translation.data(), p.pose.translation, sizeof(p.pose.translation));
    q.yaw = p.pose.yaw;
    std::memcpy(q.quaternion.data(), p.pose.quaternion, sizeof(p.pose.quaternion));
    return q;
  }
  if (p.type == LF_PACKET_RELAY) {
    return lorafuse::RssiRelayPacket{
      p.relay.anchor_id, p.relay.ref_device_id, p.relay.ref_seq, p.relay.rssi_dbm};
  }
  lorafuse::raise(lorafuse::ErrorCode::kInvalidArgument, "unknown packet type");
}

lf_packet to_c(const lorafuse::Packet & p)
{
  lf_packet out{};
  if (const auto * pose = std::get_if<lorafuse::PosePacket>(&p)) {
    out.type = LF_PACKET_POSE;
    out.pose.device_id = pose->device_id;
    out.pose.seq = pose->seq;
    out.pose.timestamp_ms = pose->timestamp_ms;
    std::memcpy(out.pose.translation, pose->translation.data(), sizeof(out.pose.translation));
    out.pose.yaw = pose->yaw;
    std::memcpy(out.pose.quaternion, pose->quaternion.data(), sizeof(out.pose.quaternion));
  } else {
    const auto & r = std::get<lorafuse::RssiRelayPacket>(p);
    out.type = LF_PACKET_RELAY;
    out.relay = {r.anchor_id, r.ref_device_id, r.ref_seq, r.rssi_dbm};
  }
  return out;
}

}  // namespace

extern "C" {

const char * lf_status_string(lf_status status)
{
  switch (status) {
    case LF_OK: return "ok";
    case LF_INVALID_ARGUMENT: return "invalid-argument";
    case LF_OUT_OF_MODEL_RANGE: return "out-of-model-range";
    case LF_DEGENERATE_POSE: return "degenerate-pose";
    case LF_INSUFFICIENT_DATA: return "insufficient-data";
    case LF_NEAR_SINGULARITY: return "near-singularity";
    case LF_NUMERICAL_FAILURE: return "numerical-failure";
    case LF_NOT_A_FRAME: return "not-a-frame";
    case LF_CORRUPT_FRAME: return "corrupt-frame";
    case LF_UNSUPPORTED_FRAME: return "unsupported-frame";
    case LF_TRUNCATED_FRAME: return "truncated-frame";
    case LF_SCHEMA: return "schema";
    case LF_IO: return "io";
    case LF_BUFFER_TOO_SMALL: return "buffer-too-small";
    case LF_INTERNAL: return "internal";
  }
  return "unknown";
}

const char * lf_last_error(void) {return g_last_error.c_str();}

const char * lf_version(void) {return "0.1.0";}

lf_status lf_airtime(int sf, double * out_seconds)
{
  if (out_seconds == nullptr) {
    return null_arg("out_seconds");
  }
  return guarded([&] {
      *out_seconds = lorafuse::airtime(sf);
      return LF_OK;
    });
}

lf_status lf_rssi_at_distance(double distance_m, int nlos, double * out_dbm)
{
  if (out_dbm == nullptr) {
    return null_arg("out_dbm");
  }
  return guarded([&] {
      *out_dbm = lorafuse::rssi_at_distance(lorafuse::PathLossModel{}, distance_m, nlos != 0);
      return LF_OK;
    });
}

lf_status lf_pathloss_fit_arrays(
  const double * distance_m, const double * rssi_dbm, size_t count, lf_pathloss_fit * out)
{
  if (out == nullptr || (count > 0 && (distance_m == nullptr || rssi_dbm == nullptr))) {
    return null_arg("distance_m, rssi_dbm and out");
  }
  return guarded([&] {
      std::vector<lorafuse::PathLossSample> samples;
      samples.reserve(count);
      for (size_t i = 0; i < count; ++i) {
        samples.push_back({distance_m[i], rssi_dbm[i]});
      }
      fill_fit(lorafuse::fit_path_loss(samples), count, out);
      return LF_OK;
    });
}

lf_status lf_pathloss_fit_csv(const char * path, lf_pathloss_fit * out)
{
  if (path == nullptr || out == nullptr) {
    return null_arg("path and out");
  }
  return guarded([&] {
      std::ifstream in(path);
      if (!in) {
        lorafuse::raise(lorafuse::ErrorCode::kIo, std::string("cannot read ") + path);
      }
      const auto samples = lorafuse::read_pathloss_csv(in);
      fill_fit(lorafuse::fit_path_loss(samples), samples.size(), out);
      return LF_OK;
    });
}

void lf_filter_config_default(lf_filter_config * cfg)
{
  if (cfg == nullptr) {
    return;
  }
  const lorafuse::NoiseConfig noise;
  *cfg = lf_filter_config{};
  cfg->p0_diag[0] = 10.0;
  cfg->p0_diag[1] = 10.0;
  cfg->p0_diag[2] = 1.0;
  for (int i = 0; i < 3; ++i) {
    cfg->q_diag[i] = noise.q_diag[static_cast<std::size_t>(i)];
  }
  cfg->sigma_xy = noise.sigma_xy;
  cfg->rssi_var = noise.rssi_var;
  cfg->smoothing_window = 4;
}

lf_status lf_filter_create(
  const lf_filter_config * cfg, const lf_anchor * anchors, size_t anchor_count, lf_filter ** out)
{
  if (cfg == nullptr || out == nullptr || (anchor_count > 0 && anchors == nullptr)) {
    return null_arg("cfg, anchors and out");
  }
  *out = nullptr;
  return guarded([&] {
      std::vector<lorafuse::Anchor> list;
      for (size_t i = 0; i < anchor_count; ++i) {
        list.push_back({anchors[i].id, anchors[i].x, anchors[i].y, anchors[i].z});
      }
      lorafuse::NoiseConfig noise;
      noise.q_diag = {cfg->q_diag[0], cfg->q_diag[1], cfg->q_diag[2]};
      noise.sigma_xy = cfg->sigma_xy;
      noise.rssi_var = cfg->rssi_var;
      const lorafuse::Covariance3 p0 =
        Eigen::Vector3d(cfg->p0_diag[0], cfg->p0_diag[1], cfg->p0_diag[2]).asDiagonal();
      *out = new lf_filter{lorafuse::EkfFilter(
          {cfg->x0, cfg->y0, cfg->theta0}, p0, noise, lorafuse::AnchorSet(std::move(list)),
          lorafuse::PathLossModel{}, {cfg->nlos != 0, cfg->smoothing_window})};
      return LF_OK;
    });
}

lf_status lf_filter_step(
  lf_filter * filter, double dx, double dy, double dyaw, double dt,
  const double * rssi_dbm, const uint8_t * present, size_t count)
{
  if (filter == nullptr) {
    return null_arg("filter");
  }
  return guarded([&] {
      if (count != filter->filter.anchors().size()) {
        lorafuse::raise(
          lorafuse::ErrorCode::kInvalidArgument, "RSSI count does not match the anchor set");
      }
      std::vector<std::optional<double>> rssis(count);
      if (rssi_dbm != nullptr && present != nullptr) {
        for (size_t i = 0; i < count; ++i) {
          if (present[i] != 0) {
            rssis[i] = rssi_dbm[i];
          }
        }
      }
      filter->filter.step(lorafuse::make_planar_delta(dx, dy, dyaw), dt, rssis);
      return LF_OK;
    });
}

lf_status lf_filter_state(const lf_filter * filter, double state[3], double covariance[9])
{
  if (filter == nullptr || state == nullptr) {
    return null_arg("filter and state");
  }
  const auto & s = filter->filter.state();
  state[0] = s.x;
  state[1] = s.y;
  state[2] = s.theta;
  if (covariance != nullptr) {
    const auto & p = filter->filter.covariance();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        covariance[r * 3 + c] = p(r, c);
      }
    }
  }
  return LF_OK;
}

void lf_filter_destroy(lf_filter * filter) {delete filter;}

lf_status lf_encode(const lf_packet * packet, uint8_t * buf, size_t capacity, size_t * out_len)
{
  if (packet == nullptr || out_len == nullptr) {
    return null_arg("packet and out_len");
  }
  return guarded([&] {
      const auto frame = lorafuse::encode(from_c(*packet));
      *out_len = frame.size();
      if (buf == nullptr || capacity < frame.size()) {
        return fail(LF_BUFFER_TOO_SMALL, "output buffer holds fewer bytes than the frame");
      }
      std::memcpy(buf, frame.data(), frame.size());
      return LF_OK;
    });
}

lf_status lf_decode(const uint8_t * buf, size_t len, lf_packet * out, size_t * consumed)
{
  if ((buf == nullptr && len > 0) || out == nullptr) {
    return null_arg("buf and out");
  }
  return guarded([&] {
      const auto d = lorafuse::decode({buf, len});
      *out = to_c(d.packet);
      if (consumed != nullptr) {
        *consumed = d.consumed;
      }
      return LF_OK;
    });
}

uint16_t lf_crc16(const uint8_t * buf, size_t len)
{
  if (buf == nullptr) {
    return lorafuse::crc16_ccitt_false({});
  }
  return lorafuse::crc16_ccitt_false({buf, len});
}

lf_status lf_scenario_load(const char * path, lf_scenario ** out)
{
  if (path == nullptr || out == nullptr) {
    return null_arg("path and out");
  }
  *out = nullptr;
  return guarded([&] {
      *out = new lf_scenario{lorafuse::load_scenario(path)};
      return LF_OK;
    });
}

lf_status lf_scenario_parse(const char * json, lf_scenario ** out)
{
  if (json == nullptr || out == nullptr) {
    return null_arg("json and out");
  }
  *out = nullptr;
  return guarded([&] {
      *out = new lf_scenario{lorafuse::parse_scenario(json)};
      return LF_OK;
    });
}

lf_status lf_scenario_set_seed(lf_scenario * scenario, uint64_t seed)
{
  if (scenario == nullptr) {
    return null_arg("scenario");
  }
  scenario->scenario.seed = seed;
  return LF_OK;
}

lf_status lf_scenario_seed(const lf_scenario * scenario, uint64_t * out)
{
  if (scenario == nullptr || out == nullptr) {
    return null_arg("scenario and out");
  }
  *out = scenario->scenario.seed;
  return LF_OK;
}

void lf_scenario_destroy(lf_scenario * scenario) {delete scenario;}

lf_status lf_run_scenario(const lf_scenario * scenario, lf_run ** out)
{
  if (scenario == nullptr || out == nullptr) {
    return null_arg("scenario and out");
  }
  *out = nullptr;
  return guarded([&] {
      *out = new lf_run{lorafuse::run_scenario(scenario->scenario)};
      return LF_OK;
    });
}

lf_status lf_run_metrics_get(const lf_run * run, lf_run_metrics * out)
{
  if (run == nullptr || out == nullptr) {
    return null_arg("run and out");
  }
  const auto & m = run->record.metrics;
  *out = {m.seed, run->record.t_s.size(), m.anchors, m.rmse_odo_m, m.rmse_fused_m,
    m.gain ? 1 : 0, m.gain.value_or(0.0)};
  return LF_OK;
}

lf_status lf_run_write(const lf_run * run, const char * out_dir)
{
  if (run == nullptr || out_dir == nullptr) {
    return null_arg("run and out_dir");
  }
  return guarded([&] {
      lorafuse::write_run_outputs(run->record, out_dir);
      return LF_OK;
    });
}

void lf_run_destroy(lf_run * run) {delete run;}

lf_status lf_bench_dir(const char * dir, const lf_bench_options * opts, lf_report ** out)
{
  if (dir == nullptr || opts == nullptr || out == nullptr) {
    return null_arg("dir, opts and out");
  }
  *out = nullptr;
  return guarded([&] {
      std::vector<lorafuse::Scenario> scenarios;
      for (const auto & path : lorafuse::list_scenarios(dir)) {
        scenarios.push_back(lorafuse::load_scenario(path));
      }
      lorafuse::BenchOptions bo;
      bo.seeds = opts->seeds;
      if (opts->has_base_seed != 0) {
        bo.base_seed = opts->base_seed;
      }
      bo.threads = opts->threads;
      auto report = std::make_unique<lf_report>();
      report->report = lorafuse::run_bench(scenarios, bo);
      report->csv = report->report.to_csv();
      report->text = report->report.to_text();
      *out = report.release();
      return LF_OK;
    });
}

size_t lf_report_rows(const lf_report * report)
{
  return report == nullptr ? 0 : report->report.rows.size();
}

const char * lf_report_csv(const lf_report * report)
{
  return report == nullptr ? "" : report->csv.c_str();
}

const char * lf_report_text(const lf_report * report)
{
  return report == nullptr ? "" : report->text.c_str();
}

void lf_report_destroy(lf_report * report) {delete report;}

}  // extern "C"
