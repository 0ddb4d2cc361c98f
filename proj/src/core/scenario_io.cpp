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

#include "lorafuse/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "lorafuse/error.hpp"

namespace lorafuse
{

namespace
{

using nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string & path, const std::string & what)
{
  raise(ErrorCode::kSchema, path + ": " + what);
}

// Reads fields of one JSON object and rejects anything left unread.
class Fields
{
public:
  Fields(const json & j, std::string path)
  : j_(j), path_(std::move(path))
  {
    if (!j_.is_object()) {
      schema_error(path_, "expected an object");
    }
  }

  std::string at(const std::string & key) const {return path_ + "." + key;}

  const json * find(const std::string & key)
  {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json & require(const std::string & key)
  {
    const json * v = find(key);
    if (v == nullptr) {
      schema_error(at(key), "required field is missing");
    }
    return *v;
  }

  void number(const std::string & key, double & out)
  {
    if (const json * v = find(key)) {
      out = as_number(*v, at(key));
    }
  }

  void boolean(const std::string & key, bool & out)
  {
    if (const json * v = find(key)) {
      if (!v->is_boolean()) {
        schema_error(at(key), "expected a boolean");
      }
      out = v->get<bool>();
    }
  }

  template<typename T>
  void integer(const std::string & key, T & out)
  {
    if (const json * v = find(key)) {
      out = as_integer<T>(*v, at(key));
    }
  }

  void string(const std::string & key, std::string & out)
  {
    if (const json * v = find(key)) {
      if (!v->is_string()) {
        schema_error(at(key), "expected a string");
      }
      out = v->get<std::string>();
    }
  }

  void triple(const std::string & key, std::array<double, 3> & out)
  {
    if (const json * v = find(key)) {
      if (!v->is_array() || v->size() != 3) {
        schema_error(at(key), "expected an array of 3 numbers");
      }
      for (std::size_t i = 0; i < 3; ++i) {
        out[i] = as_number((*v)[i], at(key) + "[" + std::to_string(i) + "]");
      }
    }
  }

  void finish() const
  {
    for (const auto & [key, value] : j_.items()) {
      if (seen_.count(key) == 0) {
        schema_error(at(key), "unknown field");
      }
    }
  }

  static double as_number(const json & v, const std::string & path)
  {
    if (!v.is_number()) {
      schema_error(path, "expected a number");
    }
    return v.get<double>();
  }

  template<typename T>
  static T as_integer(const json & v, const std::string & path)
  {
    if (!v.is_number_integer()) {
      schema_error(path, "expected an integer");
    }
    if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) {
        schema_error(path, "expected a non-negative integer");
      }
      return static_cast<T>(v.get<std::uint64_t>());
    } else {
      return static_cast<T>(v.get<std::int64_t>());
    }
  }

private:
  const json & j_;
  std::string path_;
  std::set<std::string> seen_;
};

StartPose parse_start(const json & j, const std::string & path)
{
  Fields f(j, path);
  StartPose s;
  f.number("x", s.x);
  f.number("y", s.y);
  f.number("yaw", s.yaw);
  f.finish();
  return s;
}

TrajectorySpec parse_trajectory(const json & j, const std::string & path)
{
  Fields f(j, path);
  std::string type;
  f.string("type", type);
  if (type == "rectangle") {
    RectangleTrajectory r;
    f.number("width_m", r.width_m);
    f.number("height_m", r.height_m);
    f.integer("laps", r.laps);
    f.number("speed_mps", r.speed_mps);
    f.number("turn_rate_dps", r.turn_rate_dps);
    f.finish();
    return r;
  }
  if (type == "waypoints") {
    WaypointTrajectory w;
    const json & pts = f.require("waypoints");
    if (!pts.is_array()) {
      schema_error(f.at("waypoints"), "expected an array of [x, y] pairs");
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string p = f.at("waypoints") + "[" + std::to_string(i) + "]";
      if (!pts[i].is_array() || pts[i].size() != 2) {
        schema_error(p, "expected [x, y]");
      }
      w.waypoints.emplace_back(
        Fields::as_number(pts[i][0], p + "[0]"), Fields::as_number(pts[i][1], p + "[1]"));
    }
    f.number("speed_mps", w.speed_mps);
    f.number("turn_rate_dps", w.turn_rate_dps);
    f.finish();
    return w;
  }
  schema_error(f.at("type"), "expected \"rectangle\" or \"waypoints\"");
}

AnchorSpec parse_anchors(const json & j, const std::string & path)
{
  if (j.is_array()) {
    std::vector<Anchor> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      Fields f(j[i], path + "[" + std::to_string(i) + "]");
      Anchor a;
      a.id = Fields::as_integer<int>(f.require("id"), f.at("id"));
      a.x = Fields::as_number(f.require("x"), f.at("x"));
      a.y = Fields::as_number(f.require("y"), f.at("y"));
      f.number("z", a.z);
      f.finish();
      out.push_back(a);
    }
    return out;
  }
  Fields f(j, path);
  RandomAnchors r;
  r.count = Fields::as_integer<std::size_t>(f.require("count"), f.at("count"));
  f.number("radius_m", r.radius_m);
  f.number("z_m", r.z_m);
  if (const json * v = f.find("placement_seed")) {
    r.placement_seed = Fields::as_integer<std::uint64_t>(*v, f.at("placement_seed"));
  }
  f.finish();
  return r;
}

OdometryProfile parse_profile(const json & j, const std::string & path)
{
  if (j.is_string()) {
    try {
      return builtin_profile(j.get<std::string>());
    } catch (const Error & e) {
      schema_error(path, e.what());
    }
  }
  Fields f(j, path);
  OdometryProfile p;
  p.name = "custom";
  f.string("name", p.name);
  f.number("translation_noise_std", p.translation_noise_std);
  f.number("yaw_noise_std", p.yaw_noise_std);
  f.number("yaw_bias_drift", p.yaw_bias_drift);
  f.number("translation_scale_error", p.translation_scale_error);
  f.number("reference_fps", p.reference_fps);
  f.finish();
  return p;
}

RfSettings parse_rf(const json & j, const std::string & path)
{
  Fields f(j, path);
  RfSettings rf;
  f.number("slope_db_per_decade", rf.model.slope_db_per_decade);
  f.number("intercept_dbm", rf.model.intercept_dbm);
  f.number("noise_std_db", rf.model.noise_std_db);
  f.number("nlos_scale", rf.model.nlos_scale);
  f.number("tx_power_dbm", rf.model.tx_power_dbm);
  f.number("ref_distance_m", rf.model.ref_distance_m);
  f.number("ref_pathloss_db", rf.model.ref_pathloss_db);
  f.boolean("nlos", rf.nlos);
  if (f.find("filter_nlos") != nullptr) {
    bool v = false;
    f.boolean("filter_nlos", v);
    rf.filter_nlos = v;
  }
  f.integer("smoothing_window", rf.smoothing_window);
  f.number("loss_prob", rf.loss_prob);
  f.integer("sf", rf.sf);
  f.finish();
  return rf;
}

FilterSettings parse_filter(const json & j, const std::string & path)
{
  Fields f(j, path);
  FilterSettings fs;
  f.triple("q_diag", fs.noise.q_diag);
  f.number("sigma_xy", fs.noise.sigma_xy);
  f.number("theta_var_gain", fs.noise.theta_var_gain);
  f.number("theta_var_rate", fs.noise.theta_var_rate);
  f.number("theta_var_floor", fs.noise.theta_var_floor);
  f.number("rssi_var", fs.noise.rssi_var);
  f.triple("p0_diag", fs.p0_diag);
  if (const json * v = f.find("initial_state")) {
    Fields g(*v, f.at("initial_state"));
    EkfState x;
    x.x = Fields::as_number(g.require("x"), g.at("x"));
    x.y = Fields::as_number(g.require("y"), g.at("y"));
    g.number("theta", x.theta);
    g.finish();
    fs.initial_state = x;
  }
  f.finish();
  return fs;
}

std::string fmt(double v, int prec)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

ojson link_json(const IngestStats & s)
{
  ojson j;
  j["poses"] = s.poses;
  j["relays_fused"] = s.relays_fused;
  j["late_relays"] = s.late_relays;
  j["orphan_relays"] = s.orphan_relays;
  j["duplicates"] = s.duplicates;
  j["bad_frames"] = s.bad_frames;
  return j;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text)
{
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error & e) {
    raise(ErrorCode::kSchema, std::string("$: invalid JSON: ") + e.what());
  }
  Fields f(doc, "$");
  Scenario s;
  f.string("id", s.id);
  f.integer("seed", s.seed);
  f.number("frame_rate_fps", s.frame_rate_fps);
  s.duration_s = Fields::as_number(f.require("duration_s"), f.at("duration_s"));
  if (const json * v = f.find("start")) {
    s.start = parse_start(*v, f.at("start"));
  }
  s.trajectory = parse_trajectory(f.require("trajectory"), f.at("trajectory"));
  if (const json * v = f.find("anchors")) {
    s.anchors = parse_anchors(*v, f.at("anchors"));
  }
  if (const json * v = f.find("odometry_profile")) {
    s.odometry_profile = parse_profile(*v, f.at("odometry_profile"));
  }
  if (const json * v = f.find("rf")) {
    s.rf = parse_rf(*v, f.at("rf"));
  }
  if (const json * v = f.find("filter")) {
    s.filter = parse_filter(*v, f.at("filter"));
  }
  f.finish();
  try {
    s.validate();
  } catch (const Error & e) {
    raise(ErrorCode::kSchema, std::string("$: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorCode::kIo, "cannot read scenario file " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const Error & e) {
    if (e.code() == ErrorCode::kSchema) {
      raise(ErrorCode::kSchema, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::string scenario_to_json(const Scenario & s)
{
  ojson j;
  j["id"] = s.id;
  j["seed"] = s.seed;
  j["frame_rate_fps"] = s.frame_rate_fps;
  j["duration_s"] = s.duration_s;
  j["start"] = {{"x", s.start.x}, {"y", s.start.y}, {"yaw", s.start.yaw}};
  if (const auto * r = std::get_if<RectangleTrajectory>(&s.trajectory)) {
    j["trajectory"] = {
      {"type", "rectangle"}, {"width_m", r->width_m}, {"height_m", r->height_m},
      {"laps", r->laps}, {"speed_mps", r->speed_mps}, {"turn_rate_dps", r->turn_rate_dps}};
  } else {
    const auto & w = std::get<WaypointTrajectory>(s.trajectory);
    ojson pts = ojson::array();
    for (const auto & p : w.waypoints) {
      pts.push_back({p.x(), p.y()});
    }
    j["trajectory"] = {
      {"type", "waypoints"}, {"waypoints", pts}, {"speed_mps", w.speed_mps},
      {"turn_rate_dps", w.turn_rate_dps}};
  }
  if (const auto * list = std::get_if<std::vector<Anchor>>(&s.anchors)) {
    ojson arr = ojson::array();
    for (const auto & a : *list) {
      arr.push_back({{"id", a.id}, {"x", a.x}, {"y", a.y}, {"z", a.z}});
    }
    j["anchors"] = arr;
  } else {
    const auto & r = std::get<RandomAnchors>(s.anchors);
    j["anchors"] = {{"count", r.count}, {"radius_m", r.radius_m}, {"z_m", r.z_m}};
    if (r.placement_seed) {
      j["anchors"]["placement_seed"] = *r.placement_seed;
    }
  }
  const auto & p = s.odometry_profile;
  j["odometry_profile"] = {
    {"name", p.name}, {"translation_noise_std", p.translation_noise_std},
    {"yaw_noise_std", p.yaw_noise_std}, {"yaw_bias_drift", p.yaw_bias_drift},
    {"translation_scale_error", p.translation_scale_error}, {"reference_fps", p.reference_fps}};
  const auto & m = s.rf.model;
  ojson rf = {
    {"slope_db_per_decade", m.slope_db_per_decade}, {"intercept_dbm", m.intercept_dbm},
    {"noise_std_db", m.noise_std_db}, {"nlos_scale", m.nlos_scale},
    {"tx_power_dbm", m.tx_power_dbm}, {"ref_distance_m", m.ref_distance_m},
    {"ref_pathloss_db", m.ref_pathloss_db}, {"nlos", s.rf.nlos}};
  if (s.rf.filter_nlos) {
    rf["filter_nlos"] = *s.rf.filter_nlos;
  }
  rf["smoothing_window"] = s.rf.smoothing_window;
  rf["loss_prob"] = s.rf.loss_prob;
  rf["sf"] = s.rf.sf;
  j["rf"] = rf;
  const auto & n = s.filter.noise;
  ojson filter = {
    {"q_diag", n.q_diag}, {"sigma_xy", n.sigma_xy}, {"theta_var_gain", n.theta_var_gain},
    {"theta_var_rate", n.theta_var_rate}, {"theta_var_floor", n.theta_var_floor},
    {"rssi_var", n.rssi_var}, {"p0_diag", s.filter.p0_diag}};
  if (s.filter.initial_state) {
    const auto & x = *s.filter.initial_state;
    filter["initial_state"] = {{"x", x.x}, {"y", x.y}, {"theta", x.theta}};
  }
  j["filter"] = filter;
  return j.dump(2) + "\n";
}

void write_trajectory_csv(std::ostream & out, const RunRecord & rec)
{
  out << "t_s,gt_x,gt_y,gt_theta,odo_x,odo_y,odo_theta,fused_x,fused_y,fused_theta\n";
  for (std::size_t k = 0; k < rec.t_s.size(); ++k) {
    std::string line = fmt(rec.t_s[k], 4);
    for (const auto * traj : {&rec.truth, &rec.odometry, &rec.fused}) {
      const auto & p = (*traj)[k];
      line += "," + fmt(p.x, 6) + "," + fmt(p.y, 6) + "," + fmt(p.theta, 6);
    }
    out << line << '\n';
  }
}

void write_rssi_csv(std::ostream & out, const RunRecord & rec)
{
  out << "t_s,anchor_id,rssi_dbm,smoothed_dbm\n";
  for (const auto & r : rec.rssi) {
    out << fmt(r.t_s, 4) << ',' << r.anchor_id << ',' << r.rssi_dbm << ',' << fmt(r.smoothed_dbm, 4)
        << '\n';
  }
}

std::string summary_json(const RunRecord & rec)
{
  ojson j;
  j["scenario_id"] = rec.scenario_id;
  j["seed"] = rec.seed;
  j["profile"] = rec.metrics.profile;
  j["frames"] = rec.t_s.size();
  j["anchors"] = rec.metrics.anchors;
  j["rmse_odo_m"] = rec.metrics.rmse_odo_m;
  j["rmse_fused_m"] = rec.metrics.rmse_fused_m;
  j["accuracy_gain"] = rec.metrics.gain ? ojson(*rec.metrics.gain) : ojson(nullptr);
  j["link"] = link_json(rec.link);
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path & path, std::string_view text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    raise(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    raise(ErrorCode::kIo, "write to " + path.string() + " failed");
  }
}

void write_run_outputs(const RunRecord & rec, const std::filesystem::path & dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    raise(ErrorCode::kIo, "cannot create output directory " + dir.string());
  }
  std::ostringstream traj;
  write_trajectory_csv(traj, rec);
  write_text_file(dir / "trajectory.csv", traj.str());
  std::ostringstream rssi;
  write_rssi_csv(rssi, rec);
  write_text_file(dir / "rssi.csv", rssi.str());
  const RunMetrics one[] = {rec.metrics};
  write_text_file(dir / "metrics.csv", summarize(one).to_csv());
  write_text_file(dir / "summary.json", summary_json(rec));
}

}  // namespace lorafuse
