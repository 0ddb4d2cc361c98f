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

#ifndef LORAFUSE__SCENARIO_IO_HPP_
#define LORAFUSE__SCENARIO_IO_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

#include "lorafuse/eval_metrics.hpp"
#include "lorafuse/scenario_sim.hpp"

namespace lorafuse
{

/// Parses a scenario document (schema in docs/scenario_schema.md). Unknown
/// fields, wrong types and invalid values raise kSchema with a JSON path
/// such as "$.rf.sf".
Scenario parse_scenario(std::string_view json_text);

/// kIo if the file cannot be read, otherwise as parse_scenario().
Scenario load_scenario(const std::filesystem::path & path);

/// Canonical JSON form; parse_scenario(scenario_to_json(s)) reproduces s.
std::string scenario_to_json(const Scenario & s);

/// t_s,gt_x,gt_y,gt_theta,odo_x,odo_y,odo_theta,fused_x,fused_y,fused_theta
void write_trajectory_csv(std::ostream & out, const RunRecord & rec);

/// t_s,anchor_id,rssi_dbm,smoothed_dbm
void write_rssi_csv(std::ostream & out, const RunRecord & rec);

std::string summary_json(const RunRecord & rec);

/// Writes trajectory.csv, rssi.csv, metrics.csv and summary.json into
/// `dir`, creating it if needed. Throws kIo on failure.
void write_run_outputs(const RunRecord & rec, const std::filesystem::path & dir);

/// Writes `text` to `path`; kIo on failure.
void write_text_file(const std::filesystem::path & path, std::string_view text);

}  // namespace lorafuse

#endif  // LORAFUSE__SCENARIO_IO_HPP_
