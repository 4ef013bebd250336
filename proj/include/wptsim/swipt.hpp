#pragma once

#include <cstdint>
#include <vector>

#include "wptsim/channel.hpp"
#include "wptsim/harvester.hpp"
#include "wptsim/signals.hpp"
#include "wptsim/types.hpp"

namespace wpt {

/// Single-antenna SWIPT receiver front end. tau is the WPT time fraction of
/// a time-switching receiver; rho the power fraction routed to the harvester
/// of a power-splitting receiver. A TS receiver's switch routes the WIT slot
/// entirely to the decoder, so it harvests nothing then unless
/// harvest_during_wit is set.
struct ReceiverArch {
    enum class Kind { Ideal, TimeSwitch, PowerSplit, Integrated };
    Kind kind = Kind::Ideal;
    double tau = 0.0;
    double rho = 0.0;
    bool harvest_during_wit = false;

    void validate() const;
};

/// Gaussian-input subband rate sum_n log2(1 + kappa p_n ||h_n||_eff^2 / s2)
/// with kappa = 1-rho for PS, 1 otherwise, and the TS total scaled by 1-tau.
/// The integrated receiver decodes after rectification and reports zero here
/// (see ppm_link).
double rate_subbands(const ChannelState& channel, const Precoder& info,
                     const ReceiverArch& arch, double noise_power_w,
                     int rx_antenna = 0);

/// Delivered DC power of the architecture. A TS receiver alternates between
/// wpt_signal (fraction tau) and wit_signal; the other architectures
/// transmit the single waveform wit_signal and route it per the front end
/// (PS scales amplitudes by sqrt(rho); ideal and integrated rectify the full
/// signal).
double energy_arch(const ChannelState& channel, const Precoder& wpt_signal,
                   const Precoder& wit_signal, const ReceiverArch& arch,
                   const RectennaParams& params, int rx_antenna = 0);

struct REPoint {
    double param = 0.0;  // tau, rho, or power ratio
    double rate_bps_hz = 0.0;
    double energy_w = 0.0;
};

/// Sweeps tau (TS) or rho (PS) over a uniform grid including both endpoints
/// and returns the (rate, energy) trace sorted by energy.
std::vector<REPoint> re_region(const ChannelState& channel,
                               const Precoder& wpt_signal,
                               const Precoder& wit_signal,
                               ReceiverArch::Kind kind, int grid_points,
                               double noise_power_w,
                               const RectennaParams& params,
                               bool harvest_during_wit = false,
                               int rx_antenna = 0);

/// Pareto-undominated subset, sorted by energy.
std::vector<REPoint> pareto_frontier(std::vector<REPoint> points);

/// R-E trace of the superposed multisine + modulated waveform: power_ratio
/// sweeps a uniform grid including both endpoints, the deterministic part is
/// power_shape rescaled to ratio*P and the modulated part info_shape at
/// (1-ratio)*P with i.i.d. unit-power symbols. The receiver arch must be
/// ideal, PS, or integrated (the split applies to both branches); delivered
/// power uses symbol-averaged moments over mc_symbols draws per grid point.
std::vector<REPoint> re_region_superposed(
    const ChannelState& channel, const Precoder& power_shape,
    const Precoder& info_shape, const ModulationScheme& scheme,
    double total_power_w, int grid_points, double noise_power_w,
    const RectennaParams& params, const ReceiverArch& arch, int mc_symbols,
    std::uint64_t seed, int rx_antenna = 0);

/// Deterministic multisine for power superposed with a zero-mean modulated
/// multicarrier part; power_ratio is the fraction of the total power on the
/// deterministic part.
struct SuperposedWaveform {
    Precoder power_part;
    Precoder info_template;
    ModulationScheme info_scheme;
    double power_ratio = 1.0;
};

struct SuperposeResult {
    SuperposedWaveform waveform;
    double expected_p_dc_w = 0.0;
};

/// Builds the superposed waveform (power part = power_shape rescaled to
/// ratio*P, info part = uniform multicarrier template at (1-ratio)*P with
/// i.i.d. unit-power symbols per tone) and estimates its delivered DC power
/// by symbol-averaged moments over mc_symbols Monte Carlo draws.
SuperposeResult superpose(const Precoder& power_shape,
                          const ModulationScheme& info_scheme, double ratio,
                          double total_power_w, const RectennaParams& params,
                          int mc_symbols, std::uint64_t seed);

struct PpmLinkResult {
    double ber = 0.0;
    double throughput_bits_per_slot = 0.0;
    double p_dc_w = 0.0;
};

double ppm_max_rate_bits_per_slot(int order);

/// Integrated-receiver PPM link: per symbol one of `order` slots carries a
/// CW burst of power order*P; the receiver rectifies slot by slot, adds
/// Gaussian noise of std noise_std_v to the rectified voltage, and decodes
/// the argmax slot (Gray-coded bits). Harvested power comes from the full
/// signal. throughput = (1 - ber) * log2(order)/order bits per slot time.
PpmLinkResult ppm_link(int order, int symbol_count, double symbol_power_w,
                       double noise_std_v, std::uint64_t seed,
                       const RectennaParams& params);

}  // namespace wpt
