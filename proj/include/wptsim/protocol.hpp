#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wptsim/channel.hpp"
#include "wptsim/harvester.hpp"
#include "wptsim/types.hpp"

namespace wpt {

/// Ordered precoder list indexed by the b-bit feedback word.
struct Codebook {
    std::vector<Precoder> entries;
    int bits = 1;

    void validate(double total_power_w) const;
};

enum class CodebookKind {
    /// Spatial DFT beams crossed with a fixed power-allocation family
    /// (uniform + every single-tone allocation), truncated to 2^bits entries.
    DftPowerAlloc,
    /// Seeded stream of random per-tone unit beams at uniform tone power;
    /// the 2^b-entry book is a prefix of the 2^(b+1)-entry book.
    NestedRandom,
};

Codebook build_codebook(CodebookKind kind, int antennas,
                        const FrequencyGrid& grid, double total_power_w,
                        int bits, std::uint64_t seed);

/// Training/WPT frame timing; the period must cover all training slots plus
/// the WPT phase.
struct Frame {
    double slot_s = 1e-3;
    double wpt_s = 0.1;
    double period_s = 0.0;  // 0 -> slots + wpt exactly

    double resolved_period(int n_entries) const;
};

/// Multiplicative lognormal measurement noise on the probed DC power, with
/// the given relative standard deviation and a mean of one.
struct ProbeModel {
    double noise_std = 0.0;
    std::uint64_t seed = 0;
};

struct ClosedLoopReport {
    int selected_index = -1;
    std::vector<double> probed_powers_w;
    double wpt_p_dc_w = 0.0;
    double frame_avg_p_dc_w = 0.0;

    std::string to_json() const;
};

/// One acquisition frame: probe every codeword once, feed back the argmax
/// index (ties to the lowest index), transmit the selected codeword during
/// the WPT phase. The energy ledger time-averages the delivered DC power
/// over the whole frame, counting the energy harvested during training.
/// The receiver DC-combines across its antennas.
ClosedLoopReport run_closed_loop(const ChannelState& channel,
                                 const Codebook& codebook, const Frame& frame,
                                 const ProbeModel& probe,
                                 const RectennaParams& params);

/// True (noiseless) DC power delivered by a precoder, DC-combined over the
/// receive antennas; the probe and selection metric of the closed loop.
double delivered_p_dc(const ChannelState& channel, const Precoder& precoder,
                      const RectennaParams& params);

}  // namespace wpt
