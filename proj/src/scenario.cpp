#include "wptsim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wptsim/rng.hpp"
#include "wptsim/signals.hpp"

namespace wpt {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing with located diagnostics.

class Reader {
  public:
    Reader(const json& root, std::vector<std::string>& errors)
        : errors_(errors) {
        stack_.push_back({&root, "$"});
    }

    bool enter(const char* key) {
        const json* node = current();
        if (!node) return false;
        if (!node->contains(key)) return false;
        stack_.push_back({&node->at(key), path() + "." + key});
        return true;
    }
    void leave() { stack_.pop_back(); }

    bool has(const char* key) const {
        const json* node = current();
        return node && node->contains(key);
    }

    void check_keys(std::initializer_list<const char*> known) {
        const json* node = current();
        if (!node) return;
        if (!node->is_object()) {
            error("expected an object");
            return;
        }
        for (const auto& item : node->items()) {
            bool found = false;
            for (const char* key : known)
                if (item.key() == key) {
                    found = true;
                    break;
                }
            if (!found) error("unknown key '" + item.key() + "'");
        }
    }

    double number(const char* key, double fallback) {
        return fetch<double>(key, fallback, &json::is_number,
                             "expected a number");
    }
    double require_number(const char* key) {
        return require<double>(key, &json::is_number, "expected a number");
    }
    int integer(const char* key, int fallback) {
        return fetch<int>(key, fallback, &json::is_number_integer,
                          "expected an integer");
    }
    std::uint64_t require_u64(const char* key) {
        return require<std::uint64_t>(key, &json::is_number_unsigned,
                                      "expected a non-negative integer");
    }
    std::string text(const char* key, const std::string& fallback) {
        return fetch<std::string>(key, fallback, &json::is_string,
                                  "expected a string");
    }
    std::string require_text(const char* key) {
        return require<std::string>(key, &json::is_string, "expected a string");
    }
    bool boolean(const char* key, bool fallback) {
        return fetch<bool>(key, fallback, &json::is_boolean,
                           "expected a boolean");
    }

    void error(const std::string& message) {
        errors_.push_back(path() + ": " + message);
    }
    void error_at(const char* key, const std::string& message) {
        errors_.push_back(path() + "." + key + ": " + message);
    }

    const json* current() const {
        return stack_.empty() ? nullptr : stack_.back().node;
    }
    std::string path() const {
        return stack_.empty() ? "$" : stack_.back().path;
    }

  private:
    template <typename T, typename Pred>
    T fetch(const char* key, T fallback, Pred pred, const char* message) {
        const json* node = current();
        if (!node || !node->contains(key)) return fallback;
        const json& value = node->at(key);
        if (!(value.*pred)()) {
            error_at(key, message);
            return fallback;
        }
        return value.get<T>();
    }
    template <typename T, typename Pred>
    T require(const char* key, Pred pred, const char* message) {
        const json* node = current();
        if (!node || !node->contains(key)) {
            error_at(key, "missing required key");
            return T{};
        }
        const json& value = node->at(key);
        if (!(value.*pred)()) {
            error_at(key, message);
            return T{};
        }
        return value.get<T>();
    }

    struct Level {
        const json* node;
        std::string path;
    };
    std::vector<Level> stack_;
    std::vector<std::string>& errors_;
};

Strategy::Kind parse_strategy_kind(Reader& r, const std::string& text) {
    if (text == "mrt-cw") return Strategy::Kind::MrtCw;
    if (text == "ass") return Strategy::Kind::Ass;
    if (text == "uniform") return Strategy::Kind::Uniform;
    if (text == "smf") return Strategy::Kind::Smf;
    r.error_at("kind", "unknown strategy '" + text +
                           "' (mrt-cw | ass | uniform | smf)");
    return Strategy::Kind::Smf;
}

ReceiverArch::Kind parse_arch_kind(Reader& r, const std::string& text) {
    if (text == "ideal") return ReceiverArch::Kind::Ideal;
    if (text == "ts") return ReceiverArch::Kind::TimeSwitch;
    if (text == "ps") return ReceiverArch::Kind::PowerSplit;
    if (text == "integrated") return ReceiverArch::Kind::Integrated;
    r.error_at("kind",
               "unknown receiver arch '" + text + "' (ideal | ts | ps | integrated)");
    return ReceiverArch::Kind::Ideal;
}

ExperimentSpec::Kind parse_experiment_kind(Reader& r, const std::string& text) {
    if (text == "pdc") return ExperimentSpec::Kind::Pdc;
    if (text == "smf-allocation") return ExperimentSpec::Kind::SmfAllocation;
    if (text == "feedback") return ExperimentSpec::Kind::Feedback;
    if (text == "re-region") return ExperimentSpec::Kind::ReRegion;
    if (text == "ppm") return ExperimentSpec::Kind::Ppm;
    r.error_at("kind", "unknown experiment '" + text +
                           "' (pdc | smf-allocation | feedback | re-region | ppm)");
    return ExperimentSpec::Kind::Pdc;
}

void parse_grid(Reader& r, Scenario& s) {
    if (!r.enter("grid")) return;
    r.check_keys({"f0_hz", "delta_f_hz", "n_tones"});
    const double f0 = r.number("f0_hz", s.grid.f0_hz);
    const double df = r.number("delta_f_hz", s.grid.delta_f_hz);
    const int n = r.integer("n_tones", s.grid.n_tones);
    try {
        s.grid = FrequencyGrid(f0, df, n);
    } catch (const std::exception& e) {
        r.error(e.what());
    }
    r.leave();
}

void parse_channel(Reader& r, Scenario& s) {
    if (!r.enter("channel")) return;
    r.check_keys({"file", "model", "taps", "delay_spread_s"});
    if (r.has("file")) {
        const std::string file = r.require_text("file");
        if (!std::filesystem::exists(file))
            r.error_at("file", "referenced file does not exist: " + file);
        s.channel.file = file;
    } else {
        const std::string model = r.text("model", "rayleigh-taps");
        if (model == "flat-los") {
            s.channel.model = ChannelModel::FlatLos;
        } else if (model == "rayleigh-taps") {
            s.channel.model = ChannelModel::RayleighTaps;
        } else {
            r.error_at("model", "unknown channel model '" + model +
                                    "' (flat-los | rayleigh-taps)");
        }
        s.channel.rayleigh.n_taps = r.integer("taps", s.channel.rayleigh.n_taps);
        s.channel.rayleigh.delay_spread_s =
            r.number("delay_spread_s", s.channel.rayleigh.delay_spread_s);
        if (s.channel.rayleigh.n_taps < 1)
            r.error_at("taps", "must be >= 1");
        if (!(s.channel.rayleigh.delay_spread_s >= 0.0))
            r.error_at("delay_spread_s", "must be >= 0");
    }
    r.leave();
}

void parse_transmitter(Reader& r, Scenario& s) {
    if (!r.enter("transmitter")) return;
    r.check_keys({"antennas", "power_w", "strategy"});
    s.transmitter.antennas = r.integer("antennas", s.transmitter.antennas);
    if (s.transmitter.antennas < 1) r.error_at("antennas", "must be >= 1");
    s.transmitter.power_w = r.number("power_w", s.transmitter.power_w);
    if (!(s.transmitter.power_w > 0.0)) r.error_at("power_w", "must be > 0");
    if (r.enter("strategy")) {
        r.check_keys({"kind", "beta"});
        s.transmitter.strategy.kind =
            parse_strategy_kind(r, r.text("kind", "smf"));
        s.transmitter.strategy.beta =
            r.number("beta", s.transmitter.strategy.beta);
        if (s.transmitter.strategy.beta < 1.0) r.error_at("beta", "must be >= 1");
        r.leave();
    }
    s.transmitter.strategy.total_power_w = s.transmitter.power_w;
    r.leave();
}

void parse_receiver(Reader& r, Scenario& s) {
    if (!r.enter("receiver")) return;
    r.check_keys({"antennas", "combining", "rectenna", "arch", "noise_power_w"});
    s.receiver.antennas = r.integer("antennas", s.receiver.antennas);
    if (s.receiver.antennas < 1) r.error_at("antennas", "must be >= 1");
    const std::string combining = r.text("combining", "dc");
    if (combining == "dc") {
        s.receiver.combining = ReceiverConfig::Combining::Dc;
    } else if (combining == "rf") {
        s.receiver.combining = ReceiverConfig::Combining::Rf;
    } else {
        r.error_at("combining", "must be 'dc' or 'rf'");
    }
    s.receiver.noise_power_w =
        r.number("noise_power_w", s.receiver.noise_power_w);
    if (!(s.receiver.noise_power_w > 0.0))
        r.error_at("noise_power_w", "must be > 0");

    if (r.enter("rectenna")) {
        r.check_keys({"r_ant_ohm", "v_t_volt", "ideality", "r_load_ohm",
                      "breakdown_power_w"});
        RectennaParams& p = s.receiver.rectenna;
        p.r_ant_ohm = r.number("r_ant_ohm", p.r_ant_ohm);
        p.v_t_volt = r.number("v_t_volt", p.v_t_volt);
        p.ideality = r.number("ideality", p.ideality);
        p.r_load_ohm = r.number("r_load_ohm", p.r_load_ohm);
        if (r.has("breakdown_power_w"))
            p.breakdown_power_w = r.require_number("breakdown_power_w");
        try {
            p.validate();
        } catch (const std::exception& e) {
            r.error(e.what());
        }
        r.leave();
    }
    if (r.enter("arch")) {
        r.check_keys({"kind", "tau", "rho", "harvest_during_wit"});
        s.receiver.arch.kind = parse_arch_kind(r, r.text("kind", "ideal"));
        s.receiver.arch.tau = r.number("tau", s.receiver.arch.tau);
        s.receiver.arch.rho = r.number("rho", s.receiver.arch.rho);
        s.receiver.arch.harvest_during_wit =
            r.boolean("harvest_during_wit", false);
        try {
            s.receiver.arch.validate();
        } catch (const std::exception& e) {
            r.error(e.what());
        }
        r.leave();
    }
    r.leave();
}

void parse_protocol(Reader& r, Scenario& s) {
    if (!r.enter("protocol")) return;
    r.check_keys({"codebook", "frame", "probe"});
    if (r.enter("codebook")) {
        r.check_keys({"kind", "bits"});
        const std::string kind = r.text("kind", "nested-random");
        if (kind == "nested-random") {
            s.protocol.codebook_kind = CodebookKind::NestedRandom;
        } else if (kind == "dft-power-alloc") {
            s.protocol.codebook_kind = CodebookKind::DftPowerAlloc;
        } else {
            r.error_at("kind",
                       "unknown codebook '" + kind +
                           "' (nested-random | dft-power-alloc)");
        }
        s.protocol.bits = r.integer("bits", s.protocol.bits);
        if (s.protocol.bits < 1 || s.protocol.bits > 16)
            r.error_at("bits", "must be in 1..16");
        r.leave();
    }
    if (r.enter("frame")) {
        r.check_keys({"slot_s", "wpt_s", "period_s"});
        s.protocol.frame.slot_s = r.number("slot_s", s.protocol.frame.slot_s);
        s.protocol.frame.wpt_s = r.number("wpt_s", s.protocol.frame.wpt_s);
        s.protocol.frame.period_s =
            r.number("period_s", s.protocol.frame.period_s);
        if (!(s.protocol.frame.slot_s > 0.0)) r.error_at("slot_s", "must be > 0");
        if (!(s.protocol.frame.wpt_s > 0.0)) r.error_at("wpt_s", "must be > 0");
        if (s.protocol.frame.period_s < 0.0)
            r.error_at("period_s", "must be >= 0 (0 = training + wpt)");
        r.leave();
    }
    if (r.enter("probe")) {
        r.check_keys({"noise_std"});
        s.protocol.probe.noise_std =
            r.number("noise_std", s.protocol.probe.noise_std);
        if (s.protocol.probe.noise_std < 0.0)
            r.error_at("noise_std", "must be >= 0");
        r.leave();
    }
    r.leave();
}

void parse_experiment(Reader& r, Scenario& s) {
    if (!r.enter("experiment")) return;
    r.check_keys({"kind", "trials", "grid_points", "archs",
                  "superposed_mc_symbols", "ppm_order", "ppm_symbols",
                  "ppm_noise_std_v", "ppm_slot_rate_hz"});
    s.experiment.kind = parse_experiment_kind(r, r.text("kind", "pdc"));
    s.experiment.trials = r.integer("trials", s.experiment.trials);
    if (s.experiment.trials < 1) r.error_at("trials", "must be >= 1");
    s.experiment.grid_points = r.integer("grid_points", s.experiment.grid_points);
    if (s.experiment.grid_points < 2) r.error_at("grid_points", "must be >= 2");
    if (r.has("archs")) {
        const json* node = r.current();
        const json& archs = node->at("archs");
        if (!archs.is_array() || archs.empty()) {
            r.error_at("archs", "expected a non-empty array");
        } else {
            s.experiment.re_archs.clear();
            for (const json& a : archs) {
                if (!a.is_string()) {
                    r.error_at("archs", "entries must be strings");
                    continue;
                }
                if (a.get<std::string>() == "superposed") {
                    s.experiment.re_superposed = true;
                    continue;
                }
                s.experiment.re_archs.push_back(
                    parse_arch_kind(r, a.get<std::string>()));
            }
        }
    }
    s.experiment.superposed_mc_symbols =
        r.integer("superposed_mc_symbols", s.experiment.superposed_mc_symbols);
    if (s.experiment.superposed_mc_symbols < 1)
        r.error_at("superposed_mc_symbols", "must be >= 1");
    s.experiment.ppm_order = r.integer("ppm_order", s.experiment.ppm_order);
    if (s.experiment.ppm_order < 2 ||
        (s.experiment.ppm_order & (s.experiment.ppm_order - 1)) != 0)
        r.error_at("ppm_order", "must be a power of two >= 2");
    s.experiment.ppm_symbols = r.integer("ppm_symbols", s.experiment.ppm_symbols);
    if (s.experiment.ppm_symbols < 1) r.error_at("ppm_symbols", "must be >= 1");
    s.experiment.ppm_noise_std_v =
        r.number("ppm_noise_std_v", s.experiment.ppm_noise_std_v);
    if (s.experiment.ppm_noise_std_v < 0.0)
        r.error_at("ppm_noise_std_v", "must be >= 0");
    s.experiment.ppm_slot_rate_hz =
        r.number("ppm_slot_rate_hz", s.experiment.ppm_slot_rate_hz);
    if (!(s.experiment.ppm_slot_rate_hz > 0.0))
        r.error_at("ppm_slot_rate_hz", "must be > 0");
    r.leave();
}

void parse_sweep(Reader& r, Scenario& s) {
    if (!r.enter("sweep")) return;
    r.check_keys({"variable", "values"});
    SweepSpec sweep;
    sweep.variable = r.require_text("variable");
    const json* node = r.current();
    if (node->contains("values")) {
        const json& values = node->at("values");
        if (!values.is_array() || values.empty()) {
            r.error_at("values", "expected a non-empty array of numbers");
        } else {
            for (const json& v : values) {
                if (!v.is_number()) {
                    r.error_at("values", "entries must be numbers");
                    break;
                }
                sweep.values.push_back(v.get<double>());
            }
        }
    } else {
        r.error_at("values", "missing required key");
    }
    s.sweep = sweep;
    r.leave();
}

void parse_output(Reader& r, Scenario& s) {
    if (!r.enter("output")) return;
    r.check_keys({"dir", "prefix"});
    s.output.dir = r.text("dir", s.output.dir);
    s.output.prefix = r.text("prefix", s.output.prefix);
    r.leave();
}

// ---------------------------------------------------------------------------
// Resolved config dump (normative for tests).

const char* strategy_name(Strategy::Kind kind) {
    switch (kind) {
        case Strategy::Kind::MrtCw: return "mrt-cw";
        case Strategy::Kind::Ass: return "ass";
        case Strategy::Kind::Uniform: return "uniform";
        case Strategy::Kind::Smf: return "smf";
    }
    return "?";
}

const char* arch_name(ReceiverArch::Kind kind) {
    switch (kind) {
        case ReceiverArch::Kind::Ideal: return "ideal";
        case ReceiverArch::Kind::TimeSwitch: return "ts";
        case ReceiverArch::Kind::PowerSplit: return "ps";
        case ReceiverArch::Kind::Integrated: return "integrated";
    }
    return "?";
}

const char* experiment_name(ExperimentSpec::Kind kind) {
    switch (kind) {
        case ExperimentSpec::Kind::Pdc: return "pdc";
        case ExperimentSpec::Kind::SmfAllocation: return "smf-allocation";
        case ExperimentSpec::Kind::Feedback: return "feedback";
        case ExperimentSpec::Kind::ReRegion: return "re-region";
        case ExperimentSpec::Kind::Ppm: return "ppm";
    }
    return "?";
}

}  // namespace

std::string Scenario::resolved_json() const {
    json j;
    j["name"] = name;
    j["seed"] = seed;
    j["grid"] = {{"f0_hz", grid.f0_hz},
                 {"delta_f_hz", grid.delta_f_hz},
                 {"n_tones", grid.n_tones}};
    if (channel.file) {
        j["channel"] = {{"file", *channel.file}};
    } else {
        j["channel"] = {
            {"model", channel.model == ChannelModel::FlatLos ? "flat-los"
                                                             : "rayleigh-taps"},
            {"taps", channel.rayleigh.n_taps},
            {"delay_spread_s", channel.rayleigh.delay_spread_s}};
    }
    j["transmitter"] = {{"antennas", transmitter.antennas},
                        {"power_w", transmitter.power_w},
                        {"strategy",
                         {{"kind", strategy_name(transmitter.strategy.kind)},
                          {"beta", transmitter.strategy.beta}}}};
    json rectenna = {{"r_ant_ohm", receiver.rectenna.r_ant_ohm},
                     {"v_t_volt", receiver.rectenna.v_t_volt},
                     {"ideality", receiver.rectenna.ideality},
                     {"r_load_ohm", receiver.rectenna.r_load_ohm}};
    if (receiver.rectenna.breakdown_power_w)
        rectenna["breakdown_power_w"] = *receiver.rectenna.breakdown_power_w;
    j["receiver"] = {
        {"antennas", receiver.antennas},
        {"combining",
         receiver.combining == ReceiverConfig::Combining::Dc ? "dc" : "rf"},
        {"rectenna", rectenna},
        {"arch",
         {{"kind", arch_name(receiver.arch.kind)},
          {"tau", receiver.arch.tau},
          {"rho", receiver.arch.rho},
          {"harvest_during_wit", receiver.arch.harvest_during_wit}}},
        {"noise_power_w", receiver.noise_power_w}};
    j["protocol"] = {
        {"codebook",
         {{"kind", protocol.codebook_kind == CodebookKind::NestedRandom
                       ? "nested-random"
                       : "dft-power-alloc"},
          {"bits", protocol.bits}}},
        {"frame",
         {{"slot_s", protocol.frame.slot_s},
          {"wpt_s", protocol.frame.wpt_s},
          {"period_s", protocol.frame.period_s}}},
        {"probe", {{"noise_std", protocol.probe.noise_std}}}};
    json experiment_node = {{"kind", experiment_name(experiment.kind)},
                            {"trials", experiment.trials}};
    if (experiment.kind == ExperimentSpec::Kind::ReRegion) {
        experiment_node["grid_points"] = experiment.grid_points;
        json archs = json::array();
        for (ReceiverArch::Kind kind : experiment.re_archs)
            archs.push_back(arch_name(kind));
        if (experiment.re_superposed) {
            archs.push_back("superposed");
            experiment_node["superposed_mc_symbols"] =
                experiment.superposed_mc_symbols;
        }
        experiment_node["archs"] = archs;
    }
    if (experiment.kind == ExperimentSpec::Kind::Ppm) {
        experiment_node["ppm_order"] = experiment.ppm_order;
        experiment_node["ppm_symbols"] = experiment.ppm_symbols;
        experiment_node["ppm_noise_std_v"] = experiment.ppm_noise_std_v;
        experiment_node["ppm_slot_rate_hz"] = experiment.ppm_slot_rate_hz;
    }
    j["experiment"] = experiment_node;
    if (sweep) {
        j["sweep"] = {{"variable", sweep->variable}, {"values", sweep->values}};
    }
    j["output"] = {{"dir", output.dir}, {"prefix", output.prefix}};
    return j.dump(2);
}

ValidationResult validate_config(const std::string& config_text) {
    ValidationResult result;
    json root;
    try {
        root = json::parse(config_text);
    } catch (const json::parse_error& e) {
        result.errors.push_back(std::string("$: ") + e.what());
        return result;
    }
    if (!root.is_object()) {
        result.errors.push_back("$: top level must be an object");
        return result;
    }

    Scenario s;
    Reader r(root, result.errors);
    r.check_keys({"name", "seed", "grid", "channel", "transmitter", "receiver",
                  "protocol", "experiment", "sweep", "output"});
    s.name = r.require_text("name");
    s.seed = r.require_u64("seed");
    parse_grid(r, s);
    parse_channel(r, s);
    parse_transmitter(r, s);
    parse_receiver(r, s);
    parse_protocol(r, s);
    parse_experiment(r, s);
    parse_sweep(r, s);
    parse_output(r, s);
    if (s.output.prefix.empty()) s.output.prefix = s.name;

    if (!result.errors.empty()) return result;
    result.scenario = std::move(s);
    return result;
}

// ---------------------------------------------------------------------------
// Built-in scenarios.

namespace {

const std::map<std::string, const char*>& builtin_registry() {
    static const std::map<std::string, const char*> registry = {
        {"fig7-smf", R"({
  "name": "fig7-smf",
  "seed": 7,
  "grid": {"f0_hz": 2.4e9, "delta_f_hz": 625e3, "n_tones": 16},
  "channel": {"model": "rayleigh-taps", "taps": 8, "delay_spread_s": 2e-7},
  "transmitter": {"antennas": 1, "power_w": 1e-5,
                  "strategy": {"kind": "smf", "beta": 3.0}},
  "experiment": {"kind": "smf-allocation"}
})"},
        {"fig19-feedback", R"({
  "name": "fig19-feedback",
  "seed": 19,
  "grid": {"f0_hz": 2.4e9, "delta_f_hz": 5e6, "n_tones": 2},
  "channel": {"model": "rayleigh-taps", "taps": 4, "delay_spread_s": 3e-8},
  "transmitter": {"antennas": 2, "power_w": 2e-6,
                  "strategy": {"kind": "smf", "beta": 3.0}},
  "protocol": {"codebook": {"kind": "nested-random", "bits": 6},
               "probe": {"noise_std": 0.0}},
  "experiment": {"kind": "feedback", "trials": 50}
})"},
        {"re-region-cw", R"({
  "name": "re-region-cw",
  "seed": 23,
  "grid": {"f0_hz": 2.4e9, "delta_f_hz": 1.25e6, "n_tones": 1},
  "channel": {"model": "flat-los"},
  "transmitter": {"antennas": 1, "power_w": 1e-5,
                  "strategy": {"kind": "mrt-cw"}},
  "receiver": {"noise_power_w": 1e-8},
  "experiment": {"kind": "re-region", "grid_points": 21,
                 "archs": ["ts", "ps"]}
})"},
        {"re-superposed", R"({
  "name": "re-superposed",
  "seed": 29,
  "grid": {"f0_hz": 2.4e9, "delta_f_hz": 1.25e6, "n_tones": 8},
  "channel": {"model": "rayleigh-taps", "taps": 8, "delay_spread_s": 2e-7},
  "transmitter": {"antennas": 1, "power_w": 1e-5,
                  "strategy": {"kind": "smf", "beta": 3.0}},
  "receiver": {"noise_power_w": 1e-8,
               "arch": {"kind": "ps", "rho": 0.9}},
  "experiment": {"kind": "re-region", "grid_points": 21,
                 "archs": ["ps", "superposed"],
                 "superposed_mc_symbols": 2000}
})"},
        {"ppm-link", R"({
  "name": "ppm-link",
  "seed": 24,
  "grid": {"f0_hz": 2.4e9, "delta_f_hz": 1.25e6, "n_tones": 1},
  "channel": {"model": "flat-los"},
  "transmitter": {"antennas": 1, "power_w": 1e-5,
                  "strategy": {"kind": "mrt-cw"}},
  "experiment": {"kind": "ppm", "ppm_order": 4, "ppm_symbols": 20000,
                 "ppm_noise_std_v": 0.01, "ppm_slot_rate_hz": 1e7}
})"},
    };
    return registry;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : builtin_registry()) names.push_back(name);
    return names;
}

std::optional<std::string> builtin_scenario_config(const std::string& name) {
    const auto& registry = builtin_registry();
    auto it = registry.find(name);
    if (it == registry.end()) return std::nullopt;
    return std::string(it->second);
}

std::string read_config_source(const std::string& path_or_name) {
    if (std::filesystem::exists(path_or_name)) {
        std::ifstream in(path_or_name);
        if (!in)
            throw std::runtime_error("cannot read config: " + path_or_name);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    }
    if (auto builtin = builtin_scenario_config(path_or_name)) return *builtin;
    throw std::runtime_error("config is neither a file nor a built-in name: " +
                             path_or_name);
}

// ---------------------------------------------------------------------------
// Experiment execution.

namespace {

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

struct CsvTable {
    std::string header;
    std::vector<std::string> rows;

    std::string render() const {
        std::string out = header + "\n";
        for (const std::string& row : rows) out += row + "\n";
        return out;
    }
};

ChannelState make_channel(const Scenario& s, std::uint64_t channel_seed,
                          const FrequencyGrid& grid, int tx_antennas,
                          double distance_scale) {
    ChannelState state =
        s.channel.file
            ? load_channel(*s.channel.file)
            : generate(channel_seed, s.channel.model, s.channel.rayleigh,
                       s.receiver.antennas, tx_antennas, grid,
                       s.receiver.noise_power_w);
    if (distance_scale == 1.0) return state;
    std::vector<cmat> scaled;
    scaled.reserve(state.n_tones());
    for (int n = 0; n < state.n_tones(); ++n)
        scaled.push_back(state.tone(n) * distance_scale);
    return ChannelState(std::move(scaled), state.grid(), state.noise_power_w());
}

double combined_p_dc(const Scenario& s, const ChannelState& channel,
                     const Precoder& precoder) {
    if (s.receiver.combining == ReceiverConfig::Combining::Rf) {
        const cvec w =
            optimize_rf_combiner(channel, precoder, s.receiver.rectenna);
        return rf_combine(propagate(channel, precoder), w, channel.grid(),
                          s.receiver.rectenna);
    }
    return delivered_p_dc(channel, precoder, s.receiver.rectenna);
}

/// Scalar metrics of one link evaluation -- the row source for `pdc` runs
/// and for sweeps.
std::vector<std::pair<std::string, double>> pdc_metrics(
    const Scenario& s, const FrequencyGrid& grid, int tx_antennas,
    std::uint64_t channel_seed, double distance_scale) {
    const ChannelState channel =
        make_channel(s, channel_seed, grid, tx_antennas, distance_scale);
    Strategy strategy = s.transmitter.strategy;
    strategy.total_power_w = s.transmitter.power_w;
    const Precoder precoder = apply_strategy(strategy, channel, 0);

    const cmat received = propagate(channel, precoder);
    const double p_rf_t = precoder.power();
    const double p_rf_r = received.squaredNorm();
    const double power_dc = combined_p_dc(s, channel, precoder);

    std::vector<std::pair<std::string, double>> metrics;
    metrics.emplace_back("p_rf_t_w", p_rf_t);
    metrics.emplace_back("p_rf_r_w", p_rf_r);
    metrics.emplace_back("p_dc_w", power_dc);
    metrics.emplace_back("e2", p_rf_r / p_rf_t);
    metrics.emplace_back("e3", p_rf_r > 0.0 ? power_dc / p_rf_r : 0.0);
    metrics.emplace_back(
        "rate_bps_hz", rate_subbands(channel, precoder, s.receiver.arch,
                                     s.receiver.noise_power_w, 0));
    metrics.emplace_back(
        "energy_w", energy_arch(channel, precoder, precoder, s.receiver.arch,
                                s.receiver.rectenna, 0));
    return metrics;
}

CsvTable experiment_pdc(const Scenario& s) {
    CsvTable table;
    table.header = "trial,sub_seed,metric,value";
    for (int trial = 0; trial < s.experiment.trials; ++trial) {
        const std::uint64_t trial_seed = derive_seed(s.seed, 100 + trial);
        for (const auto& [metric, value] :
             pdc_metrics(s, s.grid, s.transmitter.antennas, trial_seed, 1.0))
            table.rows.push_back(std::to_string(trial) + "," +
                                 std::to_string(trial_seed) + "," + metric +
                                 "," + format_number(value));
    }
    return table;
}

CsvTable experiment_smf_allocation(const Scenario& s) {
    const ChannelState channel = make_channel(
        s, derive_seed(s.seed, 1), s.grid, s.transmitter.antennas, 1.0);
    const double power = s.transmitter.power_w;
    const Precoder uniform = uniform_mrt(channel, 0, power);
    const Precoder shaped =
        smf(channel, 0, s.transmitter.strategy.beta, power);

    CsvTable table;
    table.header = "tone,f_hz,channel_gain,p_uniform_w,p_smf_w";
    for (int n = 0; n < channel.n_tones(); ++n) {
        const double gain = channel.rx_vector(0, n).squaredNorm();
        table.rows.push_back(
            std::to_string(n) + "," + format_number(channel.grid().tone_hz(n)) +
            "," + format_number(gain) + "," +
            format_number(uniform.weights.col(n).squaredNorm()) + "," +
            format_number(shaped.weights.col(n).squaredNorm()));
    }
    return table;
}

CsvTable experiment_feedback(const Scenario& s) {
    const int max_bits = s.protocol.bits;
    const int trials = s.experiment.trials;
    std::vector<double> mean_wpt(max_bits, 0.0);
    std::vector<double> mean_frame(max_bits, 0.0);
    double mean_csit = 0.0;

    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed = derive_seed(s.seed, 100 + trial);
        const ChannelState channel = make_channel(
            s, derive_seed(trial_seed, 1), s.grid, s.transmitter.antennas, 1.0);
        const Codebook full_book = build_codebook(
            s.protocol.codebook_kind, s.transmitter.antennas, s.grid,
            s.transmitter.power_w, max_bits, derive_seed(trial_seed, 2));

        for (int b = 1; b <= max_bits; ++b) {
            Codebook book;
            book.bits = b;
            book.entries.assign(full_book.entries.begin(),
                                full_book.entries.begin() + (1LL << b));
            ProbeModel probe = s.protocol.probe;
            probe.seed = derive_seed(trial_seed, 3);
            const ClosedLoopReport report = run_closed_loop(
                channel, book, s.protocol.frame, probe, s.receiver.rectenna);
            mean_wpt[b - 1] += report.wpt_p_dc_w / trials;
            mean_frame[b - 1] += report.frame_avg_p_dc_w / trials;
        }

        double best_csit = 0.0;
        for (double beta : {1.0, 2.0, 3.0, 4.0, 6.0})
            best_csit = std::max(
                best_csit,
                delivered_p_dc(channel,
                               smf(channel, 0, beta, s.transmitter.power_w),
                               s.receiver.rectenna));
        mean_csit += best_csit / trials;
    }

    CsvTable table;
    table.header =
        "bits,mean_wpt_p_dc_w,mean_frame_avg_p_dc_w,perfect_csit_p_dc_w";
    for (int b = 1; b <= max_bits; ++b)
        table.rows.push_back(std::to_string(b) + "," +
                             format_number(mean_wpt[b - 1]) + "," +
                             format_number(mean_frame[b - 1]) + "," +
                             format_number(mean_csit));
    return table;
}

CsvTable experiment_re_region(const Scenario& s) {
    const ChannelState channel = make_channel(
        s, derive_seed(s.seed, 1), s.grid, s.transmitter.antennas, 1.0);
    Strategy strategy = s.transmitter.strategy;
    strategy.total_power_w = s.transmitter.power_w;
    const Precoder wpt_signal = apply_strategy(strategy, channel, 0);
    const Precoder wit_signal = uniform_mrt(channel, 0, s.transmitter.power_w);

    CsvTable table;
    table.header = "arch,param,rate_bps_hz,energy_w";
    auto emit = [&table](const std::string& arch,
                         const std::vector<REPoint>& points) {
        for (const REPoint& point : points)
            table.rows.push_back(arch + "," + format_number(point.param) +
                                 "," + format_number(point.rate_bps_hz) + "," +
                                 format_number(point.energy_w));
    };
    for (ReceiverArch::Kind kind : s.experiment.re_archs)
        emit(arch_name(kind),
             re_region(channel, wpt_signal, wit_signal, kind,
                       s.experiment.grid_points, s.receiver.noise_power_w,
                       s.receiver.rectenna,
                       s.receiver.arch.harvest_during_wit, 0));
    if (s.experiment.re_superposed) {
        ReceiverArch arch = s.receiver.arch;
        if (arch.kind == ReceiverArch::Kind::TimeSwitch)
            arch.kind = ReceiverArch::Kind::Ideal;
        emit("superposed",
             re_region_superposed(channel, wpt_signal, wit_signal,
                                  {ModKind::Cscg, 1.0, 1.0, 4},
                                  s.transmitter.power_w,
                                  s.experiment.grid_points,
                                  s.receiver.noise_power_w, s.receiver.rectenna,
                                  arch, s.experiment.superposed_mc_symbols,
                                  derive_seed(s.seed, 5), 0));
    }
    return table;
}

CsvTable experiment_ppm(const Scenario& s) {
    const PpmLinkResult result = ppm_link(
        s.experiment.ppm_order, s.experiment.ppm_symbols, s.transmitter.power_w,
        s.experiment.ppm_noise_std_v, derive_seed(s.seed, 4),
        s.receiver.rectenna);
    CsvTable table;
    table.header = "order,ber,throughput_bits_per_slot,throughput_bps,p_dc_w";
    table.rows.push_back(
        std::to_string(s.experiment.ppm_order) + "," +
        format_number(result.ber) + "," +
        format_number(result.throughput_bits_per_slot) + "," +
        format_number(result.throughput_bits_per_slot *
                      s.experiment.ppm_slot_rate_hz) +
        "," + format_number(result.p_dc_w));
    return table;
}

CsvTable run_experiment(const Scenario& s) {
    switch (s.experiment.kind) {
        case ExperimentSpec::Kind::Pdc: return experiment_pdc(s);
        case ExperimentSpec::Kind::SmfAllocation:
            return experiment_smf_allocation(s);
        case ExperimentSpec::Kind::Feedback: return experiment_feedback(s);
        case ExperimentSpec::Kind::ReRegion: return experiment_re_region(s);
        case ExperimentSpec::Kind::Ppm: return experiment_ppm(s);
    }
    throw std::logic_error("run_experiment: unknown kind");
}

std::filesystem::path resolve_out_dir(const Scenario& s,
                                      const std::optional<std::string>& out_dir) {
    if (out_dir) return *out_dir;
    if (const char* env = std::getenv("WPTSIM_OUT_DIR"); env && *env)
        return env;
    return s.output.dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

RunResult write_outputs(const Scenario& s, const CsvTable& table,
                        const std::string& csv_suffix,
                        const std::optional<std::string>& out_dir,
                        const json& extra_manifest) {
    const std::filesystem::path dir = resolve_out_dir(s, out_dir);
    std::filesystem::create_directories(dir);

    RunResult result;
    result.csv_path = dir / (s.output.prefix + csv_suffix);
    result.resolved_path = dir / (s.output.prefix + "_resolved.json");
    result.manifest_path = dir / (s.output.prefix + "_manifest.json");

    write_file(result.csv_path, table.render());
    write_file(result.resolved_path, s.resolved_json() + "\n");

    json manifest = extra_manifest;
    manifest["library"] = "wptsim";
    manifest["version"] = "0.1.0";
    manifest["scenario"] = s.name;
    manifest["seed"] = s.seed;
    write_file(result.manifest_path, manifest.dump(2) + "\n");
    return result;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario,
                       const std::optional<std::string>& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const CsvTable table = run_experiment(scenario);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    json manifest;
    manifest["wall_time_ms"] = wall_ms;
    manifest["sub_seeds"] = {{"channel", derive_seed(scenario.seed, 1)},
                             {"codebook", derive_seed(scenario.seed, 2)},
                             {"probe", derive_seed(scenario.seed, 3)},
                             {"ppm", derive_seed(scenario.seed, 4)}};
    return write_outputs(scenario, table, "_result.csv", out_dir, manifest);
}

RunResult sweep_scenario(const Scenario& scenario, const std::string& variable,
                         const std::vector<double>& values,
                         const std::optional<std::string>& out_dir) {
    if (values.empty())
        throw std::invalid_argument("sweep: empty value list");

    enum class Var { M, N, Bits, Rho, Tau, Beta, Distance };
    Var var;
    if (variable == "M") var = Var::M;
    else if (variable == "N") var = Var::N;
    else if (variable == "bits") var = Var::Bits;
    else if (variable == "rho") var = Var::Rho;
    else if (variable == "tau") var = Var::Tau;
    else if (variable == "beta") var = Var::Beta;
    else if (variable == "distance" || variable == "distance-pathloss")
        var = Var::Distance;
    else
        throw std::invalid_argument(
            "sweep: unknown variable '" + variable +
            "' (M | N | bits | rho | tau | beta | distance)");

    struct PointRows {
        std::vector<std::string> rows;
    };

    auto evaluate_point = [&](int index) {
        const double value = values[index];
        Scenario point = scenario;
        double distance_scale = 1.0;

        switch (var) {
            case Var::M: {
                const int m = static_cast<int>(std::lround(value));
                if (m < 1) throw std::invalid_argument("sweep: M must be >= 1");
                point.transmitter.antennas = m;
                break;
            }
            case Var::N: {
                const int n = static_cast<int>(std::lround(value));
                if (n < 1) throw std::invalid_argument("sweep: N must be >= 1");
                point.grid =
                    FrequencyGrid(point.grid.f0_hz, point.grid.delta_f_hz, n);
                break;
            }
            case Var::Bits: {
                const int bits = static_cast<int>(std::lround(value));
                if (bits < 1 || bits > 16)
                    throw std::invalid_argument("sweep: bits must be in 1..16");
                point.protocol.bits = bits;
                break;
            }
            case Var::Rho:
                point.receiver.arch.kind = ReceiverArch::Kind::PowerSplit;
                point.receiver.arch.rho = value;
                break;
            case Var::Tau:
                point.receiver.arch.kind = ReceiverArch::Kind::TimeSwitch;
                point.receiver.arch.tau = value;
                break;
            case Var::Beta:
                point.transmitter.strategy.kind = Strategy::Kind::Smf;
                point.transmitter.strategy.beta = value;
                break;
            case Var::Distance: {
                if (!(value > 0.0))
                    throw std::invalid_argument("sweep: distance must be > 0");
                // Free-space amplitude factor lambda / (4 pi d).
                const double lambda = 299792458.0 / point.grid.f0_hz;
                distance_scale = lambda / (4.0 * M_PI * value);
                break;
            }
        }
        point.receiver.arch.validate();

        // Trial seeds are shared across sweep values, so rows with the same
        // sub_seed see the same channel realization and stay comparable.
        PointRows result;
        for (int trial = 0; trial < point.experiment.trials; ++trial) {
            const std::uint64_t trial_seed =
                derive_seed(scenario.seed, 100 + trial);
            std::vector<std::pair<std::string, double>> metrics;
            if (var == Var::Bits) {
                const ChannelState channel =
                    make_channel(point, derive_seed(trial_seed, 1), point.grid,
                                 point.transmitter.antennas, 1.0);
                const Codebook book = build_codebook(
                    point.protocol.codebook_kind, point.transmitter.antennas,
                    point.grid, point.transmitter.power_w, point.protocol.bits,
                    derive_seed(trial_seed, 2));
                ProbeModel probe = point.protocol.probe;
                probe.seed = derive_seed(trial_seed, 3);
                const ClosedLoopReport report =
                    run_closed_loop(channel, book, point.protocol.frame, probe,
                                    point.receiver.rectenna);
                metrics.emplace_back("wpt_p_dc_w", report.wpt_p_dc_w);
                metrics.emplace_back("frame_avg_p_dc_w",
                                     report.frame_avg_p_dc_w);
            } else {
                metrics = pdc_metrics(point, point.grid,
                                      point.transmitter.antennas, trial_seed,
                                      distance_scale);
            }
            for (const auto& [metric, metric_value] : metrics)
                result.rows.push_back(
                    std::to_string(trial_seed) + "," + variable + "," +
                    format_number(value) + "," + metric + "," +
                    format_number(metric_value));
        }
        return result;
    };

    // Points evaluate concurrently; row order is fixed by the value index, so
    // the output is independent of scheduling.
    std::vector<std::future<PointRows>> futures;
    futures.reserve(values.size());
    for (int i = 0; i < static_cast<int>(values.size()); ++i)
        futures.push_back(
            std::async(std::launch::async, evaluate_point, i));

    CsvTable table;
    table.header = "sub_seed,variable,value,metric,metric_value";
    for (auto& future : futures) {
        PointRows point_rows = future.get();
        for (std::string& row : point_rows.rows)
            table.rows.push_back(std::move(row));
    }

    json manifest;
    manifest["sweep_variable"] = variable;
    manifest["sweep_values"] = values;
    json sub_seeds = json::array();
    for (int trial = 0; trial < scenario.experiment.trials; ++trial)
        sub_seeds.push_back(derive_seed(scenario.seed, 100 + trial));
    manifest["trial_seeds"] = sub_seeds;
    return write_outputs(scenario, table, "_sweep.csv", out_dir, manifest);
}

}  // namespace wpt
