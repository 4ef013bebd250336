#pragma once

#include <functional>
#include <vector>

#include "wptsim/channel.hpp"
#include "wptsim/harvester.hpp"
#include "wptsim/types.hpp"

namespace wpt {

/// Scaled matched filter: MRT direction per tone, power allocation
/// proportional to ||h_n||^(2*beta), total power exactly P.
Precoder smf(const ChannelState& channel, int rx_antenna, double beta,
             double total_power_w);

/// Adaptive single sinewave: all power on the strongest tone (beta -> inf
/// limit of smf); ties break to the lowest tone index.
Precoder ass(const ChannelState& channel, int rx_antenna, double total_power_w);

/// CW beamforming baseline: the channel is treated as single-tone at f0 and
/// all power goes to tone 0 with MRT across antennas.
Precoder mrt_cw(const ChannelState& channel, int rx_antenna,
                double total_power_w);

/// MRT direction per tone with uniform P/N power split.
Precoder uniform_mrt(const ChannelState& channel, int rx_antenna,
                     double total_power_w);

struct Strategy {
    enum class Kind { MrtCw, Ass, Uniform, Smf };
    Kind kind = Kind::Smf;
    double beta = 3.0;
    double total_power_w = 1.0;
};

Precoder apply_strategy(const Strategy& strategy, const ChannelState& channel,
                        int rx_antenna);

/// Receive combiner for the RF-combining architecture. Exact matched filter
/// for single-tone signals; for multitone signals a coordinate ascent over
/// per-antenna phases (16-point grid) and magnitudes, started from the
/// matched filter to the dominant tone, so the result is never worse than
/// that baseline. Returned weights satisfy ||w||^2 <= 1.
cvec optimize_rf_combiner(const ChannelState& channel, const Precoder& precoder,
                          const RectennaParams& params);

/// Index of the best codebook entry under a metric (exhaustive baseline).
int argmax_entry(const std::vector<Precoder>& entries,
                 const std::function<double(const Precoder&)>& metric);

/// One-bit tile scanning driven by a power probe. Elements are grouped into
/// consecutive tiles of tile_rows*tile_cols entries; tiles are visited in
/// raster order for `sweeps` passes, each tile keeping the bit value with
/// the larger probed power (ties keep OFF = +1). The accepted probe sequence
/// is non-decreasing when the probe is noiseless. `probe_trace`, when given,
/// records the probed power after each tile decision.
RisState ris_tile_scan(const RisLinks& links, int tile_rows, int tile_cols,
                       const std::function<double(const RisState&)>& probe,
                       int sweeps, std::vector<double>* probe_trace = nullptr);

}  // namespace wpt
