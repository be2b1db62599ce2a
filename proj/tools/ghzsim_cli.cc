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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"

#include "ghzsim/config.h"
#include "ghzsim/error.h"
#include "ghzsim/experiments.h"
#include "ghzsim/parallel.h"

namespace {

using ghzsim::ConfigError;
using ghzsim::RunConfig;
using nlohmann::json;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> trials;
    std::optional<std::string> out;
    std::optional<int> threads;
};

void add_common(CLI::App *cmd, Common &c) {
    cmd->add_option("--config", c.config_path, "YAML or JSON config (a run manifest also works)");
    cmd->add_option("--seed", c.seed, "64-bit seed");
    cmd->add_option("--trials", c.trials, "gated frames per scan point");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--threads", c.threads, "worker threads");
}

RunConfig resolve(const Common &c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : ghzsim::load_config(c.config_path);
    if (c.seed) {
        cfg.seed = *c.seed;
    }
    if (c.trials) {
        if (*c.trials < 1) {
            throw ConfigError("--trials must be at least 1");
        }
        cfg.trials = static_cast<std::uint64_t>(*c.trials);
    }
    if (c.out) {
        cfg.output = *c.out;
    }
    if (c.threads) {
        cfg.sim.threads = *c.threads;
    }
    cfg.validate();
    return cfg;
}

std::filesystem::path out_dir(const RunConfig &cfg) {
    std::filesystem::path dir(cfg.output);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path &p, const std::string &text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) {
        throw ghzsim::SimulationError("cannot write '" + p.string() + "'");
    }
    f << text;
}

void write_json(const std::filesystem::path &p, const json &j) {
    write_text(p, j.dump(2) + "\n");
}

void write_scan(const std::filesystem::path &p, const ghzsim::ScanResult &r) {
    std::ostringstream ss;
    ghzsim::write_scan_csv(ss, r);
    write_text(p, ss.str());
}

json check_json(const ghzsim::StateCheck &c, double tol) {
    json amps = json::object();
    for (const auto &[k, a] : c.amplitudes) {
        amps[k] = {a.real(), a.imag()};
    }
    return {{"amplitudes", amps},
            {"max_deviation", c.max_deviation},
            {"other_patterns", c.other_patterns},
            {"fidelity", c.fidelity},
            {"temporal_coherence", c.temporal_coherence},
            {"postselection_probability", c.postselection_probability},
            {"pass", c.pass(tol)}};
}

void print_check(const char *name, const ghzsim::StateCheck &c, double tol) {
    std::printf("%s: max amplitude deviation %.3e, other patterns %.3e, fidelity %.12f, temporal coherence %.6f -> %s\n",
                name, c.max_deviation, c.other_patterns, c.fidelity, c.temporal_coherence,
                c.pass(tol) ? "PASS" : "FAIL");
    for (const auto &[k, a] : c.amplitudes) {
        std::printf("  %s  %+.12f %+.12fi\n", k.c_str(), a.real(), a.imag());
    }
}

/// Explicit per-arm path lengths: {arms: {name: ps}, pairs: [[a, b], ...],
/// slip_delay_ps, max_slips}. Pairs default to the four-beam port pairs.
ghzsim::OplGeometry parse_arm_geometry(const json &g, double &slip, int &max_slips) {
    ghzsim::OplGeometry out;
    try {
        for (const auto &[name, t] : g.at("arms").items()) {
            out.arrival_ps[ghzsim::parse_path(name)] = t.get<double>();
        }
        if (g.contains("pairs")) {
            for (const auto &pr : g.at("pairs")) {
                out.interfering.emplace_back(ghzsim::parse_path(pr.at(0).get<std::string>()),
                                             ghzsim::parse_path(pr.at(1).get<std::string>()));
            }
        } else {
            out.interfering = ghzsim::ghz_interfering_arms();
        }
        if (g.contains("slip_delay_ps")) {
            slip = g.at("slip_delay_ps").get<double>();
        }
        if (g.contains("max_slips")) {
            max_slips = g.at("max_slips").get<int>();
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed arm geometry: ") + e.what());
    }
    for (const auto &[k, v] : g.items()) {
        if (k != "arms" && k != "pairs" && k != "slip_delay_ps" && k != "max_slips") {
            throw ConfigError("unknown key '" + k + "' in arm geometry");
        }
    }
    return out;
}

std::string power_tag(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", p);
    return buf;
}

int run(int argc, char **argv) {
    CLI::App app{"Four-beam entangled-photon source simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ghzsim::version_string());

    Common hom_c;
    std::string powers;
    std::string slips;
    auto *hom = app.add_subcommand("hom-scan", "HOM dip versus cover slips at several pump powers");
    add_common(hom, hom_c);
    hom->add_option("--powers", powers, "comma list of pump powers, mW");
    hom->add_option("--slips", slips, "slip counts, 'a..b' or comma list");

    Common g2_c;
    std::optional<double> span;
    std::optional<double> step;
    std::optional<double> g2_power;
    auto *g2 = app.add_subcommand("g2-scan", "heralded g2 histogram versus beta delay");
    add_common(g2, g2_c);
    g2->add_option("--span-ns", span, "scan span, ns");
    g2->add_option("--step-ns", step, "scan step, ns");
    g2->add_option("--power", g2_power, "pump power, mW");

    Common ff_c;
    bool events = false;
    auto *ff = app.add_subcommand("fourfold", "GHZ check and four-fold A.B.C.D rate");
    add_common(ff, ff_c);
    ff->add_flag("--events", events, "also run the pulse-by-pulse trigger-chain simulation and write events.csv");

    Common cal_c;
    auto *cal = app.add_subcommand("calibrate", "scan DG535 channels and D's delay on the four-beam rig");
    add_common(cal, cal_c);

    Common fit_c;
    auto *fit = app.add_subcommand("calibrate-hom", "fit plate error and pair rate to two HOM minima");
    add_common(fit, fit_c);
    std::vector<double> fit_low{25.0, 0.0505};
    std::vector<double> fit_high{100.0, 0.0701};
    double fit_predict = 50.0;
    fit->add_option("--low", fit_low, "power_mW minimum")->expected(2);
    fit->add_option("--high", fit_high, "power_mW minimum")->expected(2);
    fit->add_option("--predict", fit_predict, "power to predict, mW");

    Common comp_c;
    std::string geometry_path;
    auto *comp = app.add_subcommand("compensate", "cover slips that equalize interfering arms");
    add_common(comp, comp_c);
    comp->add_option("--geometry", geometry_path, "geometry file (YAML/JSON)");

    Common ghz_c;
    auto *ghz = app.add_subcommand("ghz-check", "symbolic four-photon post-selection");
    add_common(ghz, ghz_c);

    Common bell_c;
    auto *bell = app.add_subcommand("bell-check", "symbolic two-beam post-selection");
    add_common(bell, bell_c);

    double per_min = 8.0;
    double ex_power = 25.0;
    double eta = 0.1;
    auto *ex = app.add_subcommand("extrapolate", "generated four-photon rate from a detected rate");
    ex->add_option("--per-min", per_min, "detected four-folds per minute");
    ex->add_option("--power", ex_power, "pump power, mW");
    ex->add_option("--eta", eta, "per-port detection efficiency");

    auto *defaults = app.add_subcommand("default-config", "print the default configuration as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    constexpr double kTol = 1e-9;
    if (*hom) {
        RunConfig cfg = resolve(hom_c).for_layout(ghzsim::LayoutKind::kFig4Hom);
        std::vector<double> pw = powers.empty() ? cfg.scan.powers_mw : ghzsim::parse_double_list(powers);
        std::vector<int> sl;
        if (slips.empty()) {
            for (int k = cfg.scan.slips_from; k <= cfg.scan.slips_to; k++) {
                sl.push_back(k);
            }
        } else {
            sl = ghzsim::parse_int_range(slips);
        }
        auto dir = out_dir(cfg);
        std::vector<std::pair<double, double>> minima;
        json per_power = json::array();
        for (std::size_t i = 0; i < pw.size(); i++) {
            auto r = ghzsim::hom_scan(cfg.sim, pw[i], sl, cfg.trials, ghzsim::derive_seed(cfg.seed, i));
            std::string name = "hom_" + power_tag(pw[i]) + "mW.csv";
            write_scan(dir / name, r);
            const auto &m = r.minimum();
            minima.emplace_back(pw[i], m.normalized_rate);
            per_power.push_back(json{{"power_mw", pw[i]},
                                 {"file", name},
                                 {"minimum", m.normalized_rate},
                                 {"minimum_stderr", m.stderr_rate},
                                 {"minimum_slips", m.setting},
                                 {"normalization", r.normalization}});
            std::printf("%g mW: minimum %.4f +- %.4f at %g slips -> %s\n", pw[i], m.normalized_rate, m.stderr_rate,
                        m.setting, name.c_str());
        }
        json results = {{"scans", per_power}};
        if (minima.size() >= 2) {
            auto f = ghzsim::fit_dip_floor(minima);
            results["dip_fit"] = {{"visibility", f.visibility},
                                  {"floor_intercept", f.floor_intercept},
                                  {"floor_slope_per_mw", f.floor_slope_per_mw},
                                  {"r_squared", f.r_squared}};
            std::printf("floor fit: intercept %.5f, slope %.4e /mW, V %.4f\n", f.floor_intercept, f.floor_slope_per_mw,
                        f.visibility);
        }
        write_json(dir / "hom_manifest.json", ghzsim::run_manifest(cfg, "hom-scan", results));
        return 0;
    }
    if (*g2) {
        RunConfig cfg = resolve(g2_c).for_layout(ghzsim::LayoutKind::kFig6G2);
        double sp = span.value_or(cfg.scan.span_ns);
        double st = step.value_or(cfg.scan.step_ns);
        double pw = g2_power.value_or(cfg.pump.power_mw);
        auto r = ghzsim::g2_scan(cfg.sim, pw, sp, st, cfg.trials, cfg.seed);
        auto dir = out_dir(cfg);
        write_scan(dir / "g2.csv", r.histogram);
        json results = {{"zero_delay_ratio", r.zero_delay_ratio},
                        {"zero_delay_stderr", r.zero_delay_stderr},
                        {"peak_spacing_ns", r.peak_spacing_ns},
                        {"mismatched_peaks", r.peaks},
                        {"peak_heights", r.peak_heights},
                        {"power_mw", pw}};
        write_json(dir / "g2_manifest.json", ghzsim::run_manifest(cfg, "g2-scan", results));
        std::printf("zero-delay ratio %.4f +- %.4f, %d mismatched peaks, spacing %.4f ns -> g2.csv\n",
                    r.zero_delay_ratio, r.zero_delay_stderr, r.peaks, r.peak_spacing_ns);
        return 0;
    }
    if (*ff) {
        RunConfig cfg = resolve(ff_c).for_layout(ghzsim::LayoutKind::kFig2);
        auto r = ghzsim::fourfold_run(cfg.sim, cfg.pump_config(), cfg.trials, cfg.seed);
        json results = {{"ghz", check_json(r.ghz, kTol)},
                        {"frames", r.frames},
                        {"probability_per_frame", r.probability_per_frame},
                        {"rate_per_s", r.rate_per_s},
                        {"stderr_per_s", r.stderr_per_s},
                        {"per_minute", r.rate_per_s * 60.0}};
        auto dir = out_dir(cfg);
        if (events) {
            auto ev = ghzsim::fourfold_events(cfg.sim, cfg.pump_config(), cfg.trials, cfg.seed, true);
            std::ostringstream ss;
            ghzsim::write_events_csv(ss, ev.events);
            write_text(dir / "events.csv", ss.str());
            results["event_level"] = {{"fourfolds", ev.event_fourfolds},
                                      {"triggers", ev.event_triggers},
                                      {"rate_per_s", ev.rate_per_s}};
        }
        write_json(dir / "fourfold_manifest.json", ghzsim::run_manifest(cfg, "fourfold", results));
        print_check("GHZ", r.ghz, kTol);
        std::printf("four-fold rate %.4e +- %.1e /s (%.3f per minute)\n", r.rate_per_s, r.stderr_per_s,
                    r.rate_per_s * 60.0);
        return 0;
    }
    if (*cal) {
        RunConfig cfg = resolve(cal_c).for_layout(ghzsim::LayoutKind::kFig2);
        auto r = ghzsim::delay_calibration(cfg.sim, cfg.pump_config(), cfg.calibration, cfg.seed);
        RunConfig calibrated = cfg;
        calibrated.sim.chain = r.chain;
        calibrated.sim.detectors = r.detectors;
        json scans = json::array();
        for (const auto &s : r.scans) {
            scans.push_back(json{{"name", s.name}, {"peak", s.peak}, {"settings", s.counts.size()}});
        }
        json results = {{"dg535_ch1_ns", r.chain.dg535_ch1_ns},
                        {"dg535_ch2_ns", r.chain.dg535_ch2_ns},
                        {"d_internal_delay_ns", r.detectors.at(ghzsim::Path::kD).internal_delay_ns},
                        {"recovered_offset_ns", r.recovered_offset_ns},
                        {"scans", scans}};
        auto dir = out_dir(cfg);
        write_json(dir / "chain.json", ghzsim::run_manifest(calibrated, "calibrate", results));
        std::printf("ch1 %.3f ns, ch2 %.3f ns, D delay %.3f ns (latency offset %.3f ns) -> chain.json\n",
                    r.chain.dg535_ch1_ns, r.chain.dg535_ch2_ns, r.detectors.at(ghzsim::Path::kD).internal_delay_ns,
                    r.recovered_offset_ns);
        return 0;
    }
    if (*fit) {
        RunConfig cfg = resolve(fit_c).for_layout(ghzsim::LayoutKind::kFig4Hom);
        auto c = ghzsim::calibrate_hom(cfg.sim, {fit_low[0], fit_low[1]}, {fit_high[0], fit_high[1]}, fit_predict);
        RunConfig fitted = cfg;
        fitted.sim.hwp_error_deg = c.hwp_error_deg;
        fitted.sim.spdc.mu_per_mw = c.mu_per_mw;
        json results = {{"hwp_error_deg", c.hwp_error_deg},
                        {"mu_per_mw", c.mu_per_mw},
                        {"sigma_t_ps", c.sigma_t_ps},
                        {"fitted_low", c.fitted_low},
                        {"fitted_high", c.fitted_high},
                        {"predict_mw", fit_predict},
                        {"predicted_min", c.predicted_min}};
        auto dir = out_dir(cfg);
        write_json(dir / "hom_calibration.json", ghzsim::run_manifest(fitted, "calibrate-hom", results));
        std::printf("plate error %.4f deg, mu_per_mw %.4e, predicted minimum at %g mW: %.4f\n", c.hwp_error_deg,
                    c.mu_per_mw, fit_predict, c.predicted_min);
        return 0;
    }
    if (*comp) {
        RunConfig cfg = resolve(comp_c);
        ghzsim::OplGeometry geometry = ghzsim::ghz_opl_geometry(cfg.sim.geometry);
        double slip = cfg.sim.slip_delay_ps;
        int max_slips = cfg.scan.max_slips;
        if (!geometry_path.empty()) {
            std::ifstream in(geometry_path);
            if (!in) {
                throw ConfigError("cannot open geometry file '" + geometry_path + "'");
            }
            std::stringstream text;
            text << in.rdbuf();
            json g = ghzsim::yaml_text_to_json(text.str());
            if (g.is_object() && g.contains("arms")) {
                geometry = parse_arm_geometry(g, slip, max_slips);
            } else {
                RunConfig gc = ghzsim::parse_config_text(text.str());
                geometry = ghzsim::ghz_opl_geometry(gc.sim.geometry);
                slip = gc.sim.slip_delay_ps;
            }
        }
        auto plan = ghzsim::opl_compensation(geometry, slip, max_slips);
        json slips_json = json::object();
        for (const auto &[p, n] : plan.slips) {
            slips_json[std::string(ghzsim::path_name(p))] = n;
            std::printf("%-3s %d\n", std::string(ghzsim::path_name(p)).c_str(), n);
        }
        std::printf("total %d slips, residual %.4f ps\n", plan.total_slips, plan.residual_ps);
        auto dir = out_dir(cfg);
        write_json(dir / "compensation.json",
                   ghzsim::run_manifest(cfg, "compensate",
                                        {{"slips", slips_json},
                                         {"total_slips", plan.total_slips},
                                         {"residual_ps", plan.residual_ps}}));
        return 0;
    }
    if (*ghz) {
        RunConfig cfg = resolve(ghz_c).for_layout(ghzsim::LayoutKind::kFig2);
        auto c = ghzsim::ghz_check(cfg.sim.geometry, {}, cfg.sim.slip_delay_ps, cfg.sim.overlap);
        print_check("GHZ", c, kTol);
        return c.pass(kTol) ? 0 : 2;
    }
    if (*bell) {
        RunConfig cfg = resolve(bell_c).for_layout(ghzsim::LayoutKind::kFig1);
        auto c = ghzsim::bell_check(cfg.pump_config());
        print_check("Bell", c, kTol);
        return c.pass(kTol) ? 0 : 2;
    }
    if (*ex) {
        auto r = ghzsim::rate_extrapolation(per_min, ex_power, eta);
        std::printf("detected %.4g /s, generated %.4g /s\nlinear %.4g /s/mW, quadratic %.4g /s/mW^2, claimed %.0f /s/mW\n%s\n",
                    r.detected_per_s, r.generated_per_s, r.linear_per_mw, r.quadratic_per_mw2, r.claimed_per_mw,
                    r.notes.c_str());
        return 0;
    }
    if (*defaults) {
        std::printf("%s\n", ghzsim::to_json(RunConfig{}).dump(2).c_str());
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const ghzsim::ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
