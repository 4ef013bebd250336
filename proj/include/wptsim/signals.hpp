#pragma once

#include <cstdint>

#include "wptsim/types.hpp"

namespace wpt {

enum class ModKind { Cw, Ook, Ppm, Qam, Cscg };

/// Symbol source for the energy-aware modulations. `ook_level` is the l of
/// on-off keying: amplitude l*sqrt(P) with probability 1/l^2, zero otherwise,
/// so the mean symbol power is P for every l while the fourth moment grows
/// as l^2 * P^2. `order` is the PPM slot count or the QAM constellation size.
struct ModulationScheme {
    ModKind kind = ModKind::Cw;
    double symbol_power_w = 1.0;
    double ook_level = 1.0;
    int order = 4;
};

/// Real passband realization of a single-antenna precoder over exactly one
/// grid period, sampled at oversample_factor*4*f_max. The sample rate is an
/// integer number of samples per period, so the sample mean of s^2 (and s^4)
/// equals the waveform's exact DC value.
TimeSeries synthesize(const Precoder& precoder, int oversample_factor);

/// Peak-to-average power ratio in dB: 10*log10(max s^2 / mean s^2).
double papr_db(const TimeSeries& ts);

/// Equal-magnitude zero-phase weights: |x_{m,n}|^2 = total_power / (M*N).
Precoder uniform_multisine(const FrequencyGrid& grid, double total_power_w,
                           int antennas);

/// Draws `count` i.i.d. symbols. For PPM the returned sequence is the slot
/// expansion (count*order entries, one nonzero slot of amplitude
/// sqrt(order*P) per symbol); all other kinds return one entry per symbol.
cvec draw_symbols(const ModulationScheme& scheme, int count,
                  std::uint64_t seed);

}  // namespace wpt
