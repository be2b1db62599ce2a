// Copyright 2026 The ghzsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GHZSIM_CONFIG_H
#define GHZSIM_CONFIG_H

#include <cstdint>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"

#include "ghzsim/experiments.h"
#include "ghzsim/layouts.h"

namespace ghzsim {

/// Pump settings as written in a config file; turned into a PumpConfig per
/// layout.
struct PumpSettings {
    double power_mw = 25.0;
    double rep_rate_mhz = 76.0;
    double hwp_bd1_deg = 22.5;
    double hwp_bd2_deg = 22.5;
    /// When non-empty, pump exactly these beams with equal power.
    std::vector<int> beams;
};

struct ScanSettings {
    std::vector<double> powers_mw = {25.0, 50.0, 100.0};
    int slips_from = 0;
    int slips_to = 8;
    double span_ns = 60.0;
    double step_ns = 0.5;
    int max_slips = 8;
};

struct RunConfig {
    /// Empty means "whatever the protocol needs".
    std::string layout;
    PumpSettings pump;
    SimSettings sim;
    std::uint64_t trials = 1000000;
    std::uint64_t seed = 1;
    std::string output = "out";
    ScanSettings scan;
    CalibrationSettings calibration;

    void validate() const;
    /// Pump for the configured layout.
    PumpConfig pump_config() const;
    PumpConfig pump_config(double power_mw) const;
    Circuit circuit() const;
    /// Copy bound to `kind`; throws ConfigError if another layout was set.
    RunConfig for_layout(LayoutKind kind) const;
};

nlohmann::json to_json(const RunConfig &config);
RunConfig config_from_json(const nlohmann::json &j);

/// Loads YAML or JSON. A run manifest (JSON with a "config" member) is also
/// accepted. Unknown keys are rejected.
RunConfig load_config(const std::string &path);
RunConfig parse_config_text(const std::string &text);
nlohmann::json yaml_text_to_json(const std::string &text);

/// Stable 64-bit FNV-1a hash of the canonical JSON form, as 16 hex digits.
std::string config_hash(const RunConfig &config);

std::string version_string();

nlohmann::json run_manifest(const RunConfig &config, const std::string &command, const nlohmann::json &results);

/// Parses "a..b" (inclusive) or a comma list of integers.
std::vector<int> parse_int_range(const std::string &text);
std::vector<double> parse_double_list(const std::string &text);

}  // namespace ghzsim

#endif
