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

/* C interface to the lorafuse library. */
#ifndef LORAFUSE__LORAFUSE_H_
#define LORAFUSE__LORAFUSE_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(LORAFUSE_BUILDING_LIBRARY)
#define LF_API __attribute__((visibility("default")))
#else
#define LF_API
#endif

typedef enum lf_status
{
  LF_OK = 0,
  LF_INVALID_ARGUMENT = 1,
  LF_OUT_OF_MODEL_RANGE = 2,
  LF_DEGENERATE_POSE = 3,
  LF_INSUFFICIENT_DATA = 4,
  LF_NEAR_SINGULARITY = 5,
  LF_NUMERICAL_FAILURE = 6,
  LF_NOT_A_FRAME = 7,
  LF_CORRUPT_FRAME = 8,
  LF_UNSUPPORTED_FRAME = 9,
  LF_TRUNCATED_FRAME = 10,
  LF_SCHEMA = 11,
  LF_IO = 12,
  LF_BUFFER_TOO_SMALL = 13,
  LF_INTERNAL = 14
} lf_status;

/* Static string such as "corrupt-frame". */
LF_API const char * lf_status_string(lf_status status);

/* Message of the last failed call on this thread; "" if none. */
LF_API const char * lf_last_error(void);

LF_API const char * lf_version(void);

/* ---- path loss and airtime ------------------------------------------ */

/* Air time of a 240-byte message at spreading factor 7..11. */
LF_API lf_status lf_airtime(int sf, double * out_seconds);

/* Canonical model: RSSI at distance d >= 1 m. */
LF_API lf_status lf_rssi_at_distance(double distance_m, int nlos, double * out_dbm);

typedef struct lf_pathloss_fit
{
  double slope_db_per_decade;
  double intercept_dbm;
  double residual_std_db;
  /* Log-distance view of the fitted line, with the canonical tx power and
   * reference path loss: PL(d) = PL(d0) + 10 n log10(d / d0) + C. */
  double attenuation_n;
  double bias_db;
  size_t samples;
} lf_pathloss_fit;

LF_API lf_status lf_pathloss_fit_arrays(
  const double * distance_m, const double * rssi_dbm, size_t count, lf_pathloss_fit * out);

/* CSV with header "distance_m,rssi_dbm". */
LF_API lf_status lf_pathloss_fit_csv(const char * path, lf_pathloss_fit * out);

/* ---- filter ---------------------------------------------------------- */

typedef struct lf_anchor
{
  int32_t id;
  double x;
  double y;
  double z;
} lf_anchor;

typedef struct lf_filter_config
{
  double x0;
  double y0;
  double theta0;
  double p0_diag[3];
  double q_diag[3];
  double sigma_xy;
  double rssi_var;
  int nlos;
  size_t smoothing_window;
} lf_filter_config;

typedef struct lf_filter lf_filter;

/* Canonical noise, P0 = diag(10, 10, 1), start at the origin. */
LF_API void lf_filter_config_default(lf_filter_config * cfg);

LF_API lf_status lf_filter_create(
  const lf_filter_config * cfg, const lf_anchor * anchors, size_t anchor_count,
  lf_filter ** out);

/* One odometry frame: planar delta (forward dx, left dy, yaw dyaw) over dt
 * seconds. rssi_dbm and present are indexed like the anchors; either may be
 * NULL when no RSSI arrived. count must equal the anchor count. */
LF_API lf_status lf_filter_step(
  lf_filter * filter, double dx, double dy, double dyaw, double dt,
  const double * rssi_dbm, const uint8_t * present, size_t count);

/* state: x, y, theta. covariance: row-major 3x3, may be NULL. */
LF_API lf_status lf_filter_state(const lf_filter * filter, double state[3], double covariance[9]);

LF_API void lf_filter_destroy(lf_filter * filter);

/* ---- wire protocol --------------------------------------------------- */

enum { LF_POSE_FRAME_SIZE = 53, LF_RELAY_FRAME_SIZE = 17 };

typedef enum lf_packet_type { LF_PACKET_POSE = 0, LF_PACKET_RELAY = 1 } lf_packet_type;

typedef struct lf_pose_packet
{
  uint16_t device_id;
  uint32_t seq;
  uint64_t timestamp_ms;
  float translation[3];
  float yaw;
  float quaternion[4]; /* w, x, y, z; all zero when absent */
} lf_pose_packet;

typedef struct lf_relay_packet
{
  uint16_t anchor_id;
  uint16_t ref_device_id;
  uint32_t ref_seq;
  int16_t rssi_dbm;
} lf_relay_packet;

typedef struct lf_packet
{
  lf_packet_type type;
  lf_pose_packet pose;
  lf_relay_packet relay;
} lf_packet;

/* Writes the frame into buf. *out_len receives the frame size even when the
 * buffer is too small. */
LF_API lf_status lf_encode(const lf_packet * packet, uint8_t * buf, size_t capacity, size_t * out_len);

/* Decodes the frame at the start of buf; *consumed is its length. */
LF_API lf_status lf_decode(const uint8_t * buf, size_t len, lf_packet * out, size_t * consumed);

LF_API uint16_t lf_crc16(const uint8_t * buf, size_t len);

/* ---- scenarios and runs ---------------------------------------------- */

typedef struct lf_scenario lf_scenario;
typedef struct lf_run lf_run;

LF_API lf_status lf_scenario_load(const char * path, lf_scenario ** out);
LF_API lf_status lf_scenario_parse(const char * json, lf_scenario ** out);
LF_API lf_status lf_scenario_set_seed(lf_scenario * scenario, uint64_t seed);
LF_API lf_status lf_scenario_seed(const lf_scenario * scenario, uint64_t * out);
LF_API void lf_scenario_destroy(lf_scenario * scenario);

typedef struct lf_run_metrics
{
  uint64_t seed;
  size_t frames;
  size_t anchors;
  double rmse_odo_m;
  double rmse_fused_m;
  int has_gain;
  double gain;
} lf_run_metrics;

LF_API lf_status lf_run_scenario(const lf_scenario * scenario, lf_run ** out);
LF_API lf_status lf_run_metrics_get(const lf_run * run, lf_run_metrics * out);

/* trajectory.csv, rssi.csv, metrics.csv and summary.json under out_dir. */
LF_API lf_status lf_run_write(const lf_run * run, const char * out_dir);
LF_API void lf_run_destroy(lf_run * run);

/* ---- batch evaluation ------------------------------------------------ */

typedef struct lf_report lf_report;

typedef struct lf_bench_options
{
  size_t seeds;
  int has_base_seed;
  uint64_t base_seed;
  size_t threads; /* 0 = hardware concurrency */
} lf_bench_options;

/* Every *.json scenario in dir, each run for `seeds` consecutive seeds. */
LF_API lf_status lf_bench_dir(const char * dir, const lf_bench_options * opts, lf_report ** out);

LF_API size_t lf_report_rows(const lf_report * report);
/* Owned by the report. */
LF_API const char * lf_report_csv(const lf_report * report);
LF_API const char * lf_report_text(const lf_report * report);
LF_API void lf_report_destroy(lf_report * report);

#ifdef __cplusplus
}
#endif

#endif /* LORAFUSE__LORAFUSE_H_ */
