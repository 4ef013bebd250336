#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wptsim/channel.hpp"
#include "wptsim/harvester.hpp"
#include "wptsim/optimizer.hpp"
#include "wptsim/protocol.hpp"
#include "wptsim/swipt.hpp"

namespace wpt {

struct ChannelSpec {
    std::optional<std::string> file;  // load instead of generating
    ChannelModel model = ChannelModel::RayleighTaps;
    RayleighSpec rayleigh{};
};

struct TransmitterSpec {
    int antennas = 1;
    double power_w = 1e-5;
    Strategy strategy{};
};

struct ReceiverSpec {
    int antennas = 1;
    ReceiverConfig::Combining combining = ReceiverConfig::Combining::Dc;
    RectennaParams rectenna{};
    ReceiverArch arch{};
    double noise_power_w = 1e-9;
};

struct ProtocolSpec {
    CodebookKind codebook_kind = CodebookKind::NestedRandom;
    int bits = 4;
    Frame frame{};
    ProbeModel probe{};
};

struct ExperimentSpec {
    enum class Kind { Pdc, SmfAllocation, Feedback, ReRegion, Ppm };
    Kind kind = Kind::Pdc;
    int trials = 1;
    // re-region
    int grid_points = 21;
    std::vector<ReceiverArch::Kind> re_archs{ReceiverArch::Kind::TimeSwitch,
                                             ReceiverArch::Kind::PowerSplit};
    bool re_superposed = false;  // add the power_ratio sweep ("superposed")
    int superposed_mc_symbols = 4000;
    // ppm
    int ppm_order = 4;
    int ppm_symbols = 20000;
    double ppm_noise_std_v = 0.01;
    double ppm_slot_rate_hz = 1e7;
};

struct SweepSpec {
    std::string variable;
    std::vector<double> values;
};

struct OutputSpec {
    std::string dir = ".";
    std::string prefix;  // defaults to the scenario name
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    FrequencyGrid grid{2.4e9, 1.25e6, 8};
    ChannelSpec channel{};
    TransmitterSpec transmitter{};
    ReceiverSpec receiver{};
    ProtocolSpec protocol{};
    ExperimentSpec experiment{};
    std::optional<SweepSpec> sweep;
    OutputSpec output{};

    /// Normative resolved form with every default filled in.
    std::string resolved_json() const;
};

struct ValidationResult {
    std::optional<Scenario> scenario;
    std::vector<std::string> errors;  // "key.path: message"
    bool ok() const { return scenario.has_value() && errors.empty(); }
};

/// Parses and fully validates a configuration; either a resolved Scenario or
/// the list of located errors, never a partially usable object.
ValidationResult validate_config(const std::string& config_text);

/// Built-in scenario registry (fig7-smf, fig19-feedback, fig23-re, fig24-ppm).
std::vector<std::string> builtin_scenario_names();
std::optional<std::string> builtin_scenario_config(const std::string& name);

/// Reads a config by path, or by built-in name when the path does not exist.
std::string read_config_source(const std::string& path_or_name);

struct RunResult {
    std::filesystem::path csv_path;
    std::filesystem::path resolved_path;
    std::filesystem::path manifest_path;
};

/// Runs the scenario's experiment and writes the result CSV, the resolved
/// config, and a run manifest. Output dir comes from the scenario unless
/// overridden by `out_dir` or the WPTSIM_OUT_DIR environment variable.
RunResult run_scenario(const Scenario& scenario,
                       const std::optional<std::string>& out_dir = {});

/// Long-form sweep: one CSV row per (sub_seed, value, metric); points are
/// evaluated concurrently and rows sorted deterministically before writing.
RunResult sweep_scenario(const Scenario& scenario, const std::string& variable,
                         const std::vector<double>& values,
                         const std::optional<std::string>& out_dir = {});

}  // namespace wpt
