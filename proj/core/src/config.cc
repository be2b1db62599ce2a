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

#include "ghzsim/config.h"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ghzsim/error.h"

#ifndef GHZSIM_VERSION
#define GHZSIM_VERSION "unknown"
#endif

namespace ghzsim {

using nlohmann::json;

std::string version_string() {
    return GHZSIM_VERSION;
}

namespace {

/// Reads members of one JSON object and rejects the ones nobody asked for.
class Section {
   public:
    Section(const json &j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) {
            throw ConfigError("'" + where_ + "' must be a mapping");
        }
    }
    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) {
            return;
        }
        for (const auto &[k, v] : j_.items()) {
            if (!seen_.contains(k)) {
                throw ConfigError("unknown key '" + k + "' in '" + where_ + "'");
            }
        }
    }
    template <typename T>
    void get(const char *key, T &out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) {
            return;
        }
        try {
            out = it->template get<T>();
        } catch (const json::exception &) {
            throw ConfigError("key '" + std::string(key) + "' in '" + where_ + "' has the wrong type");
        }
    }
    const json *child(const char *key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }
    std::string path(const char *key) const {
        return where_ + "." + key;
    }

   private:
    const json &j_;
    std::string where_;
    std::set<std::string> seen_;
};

const char *statistics_name(PairStatistics s) {
    return s == PairStatistics::kThermal ? "thermal" : "poisson";
}

PairStatistics parse_statistics(const std::string &s) {
    if (s == "thermal") {
        return PairStatistics::kThermal;
    }
    if (s == "poisson") {
        return PairStatistics::kPoisson;
    }
    throw ConfigError("pair statistics must be 'thermal' or 'poisson', not '" + s + "'");
}

const char *kernel_name(OverlapKernel k) {
    return k == OverlapKernel::kGaussian ? "gaussian" : "lorentzian";
}

OverlapKernel parse_kernel(const std::string &s) {
    if (s == "gaussian") {
        return OverlapKernel::kGaussian;
    }
    if (s == "lorentzian") {
        return OverlapKernel::kLorentzian;
    }
    throw ConfigError("overlap kernel must be 'gaussian' or 'lorentzian', not '" + s + "'");
}

const char *trigger_name(TriggerSource s) {
    switch (s) {
        case TriggerSource::kCoincidenceCD:
            return "coincidence-cd";
        case TriggerSource::kSingleC:
            return "single-c";
        case TriggerSource::kSingleD:
            return "single-d";
    }
    return "?";
}

TriggerSource parse_trigger(const std::string &s) {
    for (auto t : {TriggerSource::kCoincidenceCD, TriggerSource::kSingleC, TriggerSource::kSingleD}) {
        if (s == trigger_name(t)) {
            return t;
        }
    }
    throw ConfigError("trigger source must be coincidence-cd, single-c or single-d, not '" + s + "'");
}

json detector_json(const DetectorModel &d) {
    return {{"efficiency", d.efficiency},
            {"gate_ns", d.gate_ns},
            {"dark_hz", d.dark_hz},
            {"max_trigger_mhz", d.max_trigger_mhz},
            {"internal_delay_ns", d.internal_delay_ns}};
}

DetectorModel detector_from(const json &j, const std::string &where, DetectorModel d) {
    Section s(j, where);
    s.get("efficiency", d.efficiency);
    s.get("gate_ns", d.gate_ns);
    s.get("dark_hz", d.dark_hz);
    s.get("max_trigger_mhz", d.max_trigger_mhz);
    s.get("internal_delay_ns", d.internal_delay_ns);
    return d;
}

json yaml_to_json(const YAML::Node &node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined:
            return nullptr;
        case YAML::NodeType::Sequence: {
            json arr = json::array();
            for (const auto &item : node) {
                arr.push_back(yaml_to_json(item));
            }
            return arr;
        }
        case YAML::NodeType::Map: {
            json obj = json::object();
            for (const auto &kv : node) {
                obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            }
            return obj;
        }
        case YAML::NodeType::Scalar:
            break;
    }
    const std::string &text = node.Scalar();
    if (node.Tag() == "!") {
        return text;
    }
    if (text == "true" || text == "false") {
        return text == "true";
    }
    if (text == "~" || text == "null") {
        return nullptr;
    }
    if (!text.empty()) {
        const char *b = text.c_str();
        char *e = nullptr;
        if (text.find_first_of(".eE") == std::string::npos && text.find_first_not_of("+-0123456789") == std::string::npos) {
            if (text[0] == '-') {
                long long v = std::strtoll(b, &e, 10);
                if (*e == '\0') {
                    return v;
                }
            } else {
                unsigned long long v = std::strtoull(b, &e, 10);
                if (*e == '\0') {
                    return v;
                }
            }
        }
        double d = std::strtod(b, &e);
        if (*e == '\0' && std::isfinite(d)) {
            return d;
        }
    }
    return text;
}

}  // namespace

json yaml_text_to_json(const std::string &text) {
    try {
        return yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

void RunConfig::validate() const {
    if (!layout.empty()) {
        parse_layout(layout);
    }
    sim.validate();
    if (trials < 1) {
        throw ConfigError("trials must be at least 1");
    }
    if (!(pump.power_mw >= 0.0) || !(pump.rep_rate_mhz > 0.0)) {
        throw ConfigError("pump power must be nonnegative and repetition rate positive");
    }
    if (std::abs(pump.rep_rate_mhz - sim.rep_rate_mhz) > 1e-12) {
        throw ConfigError("pump and simulation repetition rates disagree");
    }
    for (int b : pump.beams) {
        beam_path(b);
    }
    for (double p : scan.powers_mw) {
        if (!(p > 0.0)) {
            throw ConfigError("scan powers must be positive");
        }
    }
    if (scan.slips_from < 0 || scan.slips_to < scan.slips_from) {
        throw ConfigError("slip range must satisfy 0 <= from <= to");
    }
    if (!(scan.span_ns > 0.0) || !(scan.step_ns > 0.0)) {
        throw ConfigError("g2 span and step must be positive");
    }
    if (scan.max_slips < 0) {
        throw ConfigError("max_slips must be nonnegative");
    }
    if (!layout.empty()) {
        pump_config().validate();
    }
}

RunConfig RunConfig::for_layout(LayoutKind kind) const {
    if (!layout.empty() && parse_layout(layout) != kind) {
        throw ConfigError("this command needs layout '" + std::string(layout_name(kind)) + "' but the config selects '" +
                          layout + "'");
    }
    RunConfig c = *this;
    c.layout = std::string(layout_name(kind));
    return c;
}

PumpConfig RunConfig::pump_config() const {
    return pump_config(pump.power_mw);
}

PumpConfig RunConfig::pump_config(double power_mw) const {
    if (layout.empty()) {
        throw ConfigError("no layout selected");
    }
    LayoutKind kind = parse_layout(layout);
    PumpConfig p;
    if (!pump.beams.empty()) {
        p = PumpConfig::balanced(pump.beams, power_mw);
    } else {
        switch (kind) {
            case LayoutKind::kFig1:
                p = PumpConfig::two_beam(pump.hwp_bd1_deg, power_mw);
                break;
            case LayoutKind::kFig2:
                p = PumpConfig::four_beam(pump.hwp_bd1_deg, pump.hwp_bd2_deg, power_mw);
                break;
            case LayoutKind::kFig4Hom:
                p = PumpConfig::balanced({1, 3}, power_mw);
                break;
            case LayoutKind::kFig6G2:
                p = PumpConfig::balanced({3}, power_mw);
                break;
        }
    }
    p.rep_rate_mhz = pump.rep_rate_mhz;
    if (kind != LayoutKind::kFig1) {
        p.with_arrivals(sim.geometry.pump_arrivals());
    }
    return p;
}

Circuit RunConfig::circuit() const {
    Circuit c;
    switch (parse_layout(layout)) {
        case LayoutKind::kFig1:
            c = bell_circuit();
            break;
        case LayoutKind::kFig2:
            c = ghz_circuit(sim.geometry);
            break;
        case LayoutKind::kFig4Hom: {
            HomOptions o;
            o.slip_delay_ps = sim.slip_delay_ps;
            o.hwp_error_deg = sim.hwp_error_deg;
            c = hom_circuit(sim.geometry, o);
            break;
        }
        case LayoutKind::kFig6G2:
            c = g2_circuit(sim.geometry, sim.hwp_error_deg);
            break;
    }
    for (auto &[port, d] : c.detectors) {
        auto it = sim.detectors.find(port);
        if (it != sim.detectors.end()) {
            d = it->second;
        }
    }
    c.validate();
    return c;
}

json to_json(const RunConfig &c) {
    json detectors = json::object();
    for (const auto &[p, d] : c.sim.detectors) {
        detectors[std::string(path_name(p))] = detector_json(d);
    }
    const auto &ch = c.sim.chain;
    return {
        {"layout", c.layout},
        {"pump",
         {{"power_mw", c.pump.power_mw},
          {"rep_rate_mhz", c.pump.rep_rate_mhz},
          {"hwp_bd1_deg", c.pump.hwp_bd1_deg},
          {"hwp_bd2_deg", c.pump.hwp_bd2_deg},
          {"beams", c.pump.beams}}},
        {"spdc",
         {{"mu_per_mw", c.sim.spdc.mu_per_mw},
          {"statistics", statistics_name(c.sim.spdc.statistics)},
          {"truncation", c.sim.spdc.truncation}}},
        {"overlap", {{"sigma_t_ps", c.sim.overlap.sigma_t_ps}, {"kernel", kernel_name(c.sim.overlap.kernel)}}},
        {"geometry",
         {{"pump_extra_34_ps", c.sim.geometry.pump_extra_34_ps},
          {"bd3_extra_24_ps", c.sim.geometry.bd3_extra_24_ps},
          {"bd4_extra_12_ps", c.sim.geometry.bd4_extra_12_ps},
          {"slip_delay_ps", c.sim.slip_delay_ps}}},
        {"imperfections", {{"hwp_error_deg", c.sim.hwp_error_deg}}},
        {"detectors", detectors},
        {"chain",
         {{"divide_by", ch.divide_by},
          {"dg535_ch1_ns", ch.dg535_ch1_ns},
          {"dg535_ch2_ns", ch.dg535_ch2_ns},
          {"dg535_step_ns", ch.dg535_step_ns},
          {"fiber_delay_ns", ch.fiber_delay_ns},
          {"coincidence_window_ns", ch.coincidence_window_ns},
          {"latency_ns", ch.latency_ns},
          {"source", trigger_name(ch.source)}}},
        {"run", {{"trials", c.trials}, {"seed", c.seed}, {"threads", c.sim.threads}, {"output", c.output}}},
        {"scan",
         {{"powers_mw", c.scan.powers_mw},
          {"slips", std::to_string(c.scan.slips_from) + ".." + std::to_string(c.scan.slips_to)},
          {"span_ns", c.scan.span_ns},
          {"step_ns", c.scan.step_ns},
          {"max_slips", c.scan.max_slips}}},
        {"calibration",
         {{"trials", c.calibration.trials},
          {"coarse_step_ns", c.calibration.coarse_step_ns},
          {"range_ns", c.calibration.range_ns},
          {"fine_half_width_ns", c.calibration.fine_half_width_ns},
          {"hidden_offset_ns", c.calibration.hidden_offset_ns},
          {"hidden_d_offset_ns", c.calibration.hidden_d_offset_ns}}},
    };
}

RunConfig config_from_json(const json &j) {
    RunConfig c;
    Section top(j, "config");
    top.get("layout", c.layout);
    if (const json *p = top.child("pump")) {
        Section s(*p, "pump");
        s.get("power_mw", c.pump.power_mw);
        s.get("rep_rate_mhz", c.pump.rep_rate_mhz);
        s.get("hwp_bd1_deg", c.pump.hwp_bd1_deg);
        s.get("hwp_bd2_deg", c.pump.hwp_bd2_deg);
        s.get("beams", c.pump.beams);
        c.sim.rep_rate_mhz = c.pump.rep_rate_mhz;
    }
    if (const json *p = top.child("spdc")) {
        Section s(*p, "spdc");
        s.get("mu_per_mw", c.sim.spdc.mu_per_mw);
        std::string stats = statistics_name(c.sim.spdc.statistics);
        s.get("statistics", stats);
        c.sim.spdc.statistics = parse_statistics(stats);
        s.get("truncation", c.sim.spdc.truncation);
    }
    if (const json *p = top.child("overlap")) {
        Section s(*p, "overlap");
        s.get("sigma_t_ps", c.sim.overlap.sigma_t_ps);
        std::string kernel = kernel_name(c.sim.overlap.kernel);
        s.get("kernel", kernel);
        c.sim.overlap.kernel = parse_kernel(kernel);
    }
    if (const json *p = top.child("geometry")) {
        Section s(*p, "geometry");
        s.get("pump_extra_34_ps", c.sim.geometry.pump_extra_34_ps);
        s.get("bd3_extra_24_ps", c.sim.geometry.bd3_extra_24_ps);
        s.get("bd4_extra_12_ps", c.sim.geometry.bd4_extra_12_ps);
        s.get("slip_delay_ps", c.sim.slip_delay_ps);
    }
    if (const json *p = top.child("imperfections")) {
        Section s(*p, "imperfections");
        s.get("hwp_error_deg", c.sim.hwp_error_deg);
    }
    if (const json *p = top.child("detectors")) {
        if (!p->is_object()) {
            throw ConfigError("'detectors' must be a mapping");
        }
        for (const auto &[name, d] : p->items()) {
            Path port = parse_path(name);
            DetectorModel base = c.sim.detectors.contains(port) ? c.sim.detectors.at(port) : default_detector(port);
            c.sim.detectors[port] = detector_from(d, "detectors." + name, base);
        }
    }
    if (const json *p = top.child("chain")) {
        Section s(*p, "chain");
        auto &ch = c.sim.chain;
        s.get("divide_by", ch.divide_by);
        s.get("dg535_ch1_ns", ch.dg535_ch1_ns);
        s.get("dg535_ch2_ns", ch.dg535_ch2_ns);
        s.get("dg535_step_ns", ch.dg535_step_ns);
        s.get("fiber_delay_ns", ch.fiber_delay_ns);
        s.get("coincidence_window_ns", ch.coincidence_window_ns);
        s.get("latency_ns", ch.latency_ns);
        std::string source = trigger_name(ch.source);
        s.get("source", source);
        ch.source = parse_trigger(source);
    }
    if (const json *p = top.child("run")) {
        Section s(*p, "run");
        s.get("trials", c.trials);
        s.get("seed", c.seed);
        s.get("threads", c.sim.threads);
        s.get("output", c.output);
    }
    if (const json *p = top.child("scan")) {
        Section s(*p, "scan");
        s.get("powers_mw", c.scan.powers_mw);
        std::string slips;
        s.get("slips", slips);
        if (!slips.empty()) {
            auto r = parse_int_range(slips);
            c.scan.slips_from = r.front();
            c.scan.slips_to = r.back();
        }
        s.get("span_ns", c.scan.span_ns);
        s.get("step_ns", c.scan.step_ns);
        s.get("max_slips", c.scan.max_slips);
    }
    if (const json *p = top.child("calibration")) {
        Section s(*p, "calibration");
        s.get("trials", c.calibration.trials);
        s.get("coarse_step_ns", c.calibration.coarse_step_ns);
        s.get("range_ns", c.calibration.range_ns);
        s.get("fine_half_width_ns", c.calibration.fine_half_width_ns);
        s.get("hidden_offset_ns", c.calibration.hidden_offset_ns);
        s.get("hidden_d_offset_ns", c.calibration.hidden_d_offset_ns);
    }
    return c;
}

RunConfig parse_config_text(const std::string &text) {
    json j;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            j = json::parse(text);
        } catch (const json::exception &e) {
            throw ConfigError(std::string("malformed JSON config: ") + e.what());
        }
    } else {
        j = yaml_text_to_json(text);
        if (j.is_null()) {
            j = json::object();
        }
    }
    if (j.is_object() && j.contains("config") && j.contains("config_hash")) {
        j = j.at("config");
    }
    RunConfig c = config_from_json(j);
    c.validate();
    return c;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_hash(const RunConfig &config) {
    std::string text = to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json run_manifest(const RunConfig &config, const std::string &command, const json &results) {
    return {
        {"command", command},
        {"version", version_string()},
        {"seed", config.seed},
        {"config_hash", config_hash(config)},
        {"config", to_json(config)},
        {"results", results},
    };
}

std::vector<int> parse_int_range(const std::string &text) {
    std::vector<int> out;
    try {
        auto dots = text.find("..");
        if (dots != std::string::npos) {
            std::size_t used = 0;
            int a = std::stoi(text.substr(0, dots), &used);
            if (used != dots) {
                throw ConfigError("bad range");
            }
            std::string rest = text.substr(dots + 2);
            int b = std::stoi(rest, &used);
            if (used != rest.size() || b < a) {
                throw ConfigError("bad range");
            }
            for (int k = a; k <= b; k++) {
                out.push_back(k);
            }
            return out;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) {
                throw ConfigError("bad list");
            }
        }
    } catch (const std::logic_error &) {
        throw ConfigError("expected an integer range 'a..b' or a comma list, got '" + text + "'");
    }
    if (out.empty()) {
        throw ConfigError("empty integer list");
    }
    return out;
}

std::vector<double> parse_double_list(const std::string &text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument("trailing");
            }
        } catch (const std::logic_error &) {
            throw ConfigError("expected a comma list of numbers, got '" + text + "'");
        }
    }
    if (out.empty()) {
        throw ConfigError("empty number list");
    }
    return out;
}

}  // namespace ghzsim
