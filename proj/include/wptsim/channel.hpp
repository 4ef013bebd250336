#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wptsim/types.hpp"

namespace wpt {

/// One multipath component: h contribution alpha * e^(j(-2pi f tau + zeta)).
/// The tap phase zeta is tone-independent; frequency selectivity enters only
/// through the -2pi f tau term.
struct PathTap {
    double delay_s = 0.0;
    double gain = 1.0;
    double phase_rad = 0.0;
};

/// Frequency-domain channel: per-tone Q x M response matrices plus the
/// receive antenna noise power used by rate computations.
class ChannelState {
  public:
    ChannelState() = default;
    ChannelState(std::vector<cmat> per_tone, FrequencyGrid grid,
                 double noise_power_w = 1e-12);

    int rx_antennas() const { return rx_; }
    int tx_antennas() const { return tx_; }
    int n_tones() const { return grid_.n_tones; }
    const FrequencyGrid& grid() const { return grid_; }
    double noise_power_w() const { return noise_power_w_; }

    const cmat& tone(int n) const { return per_tone_[n]; }
    cplx h(int q, int m, int n) const { return per_tone_[n](q, m); }
    /// Channel vector h_{q,.,n} across transmit antennas (length M).
    cvec rx_vector(int q, int n) const {
        return per_tone_[n].row(q).transpose();
    }
    /// ||h_{q,.,n}||^2 per tone for one receive antenna.
    rvec tone_gains(int q) const;

    const std::vector<cmat>& tones() const { return per_tone_; }

  private:
    std::vector<cmat> per_tone_;  // N entries of Q x M
    FrequencyGrid grid_{};
    double noise_power_w_ = 1e-12;
    int rx_ = 0;
    int tx_ = 0;
};

enum class RisMode { FullMatrix, DiagonalPhase, OneBit };

/// Scattering matrix of the R-port reconfigurable surface. Theta must be
/// symmetric and unitary; the diagonal modes specialize it to unit-modulus
/// phases, with the one-bit mode restricted to +1/-1 (PIN diode OFF/ON).
struct RisState {
    cmat theta;
    RisMode mode = RisMode::DiagonalPhase;

    int elements() const { return static_cast<int>(theta.rows()); }
    void validate() const;

    static RisState one_bit(const Eigen::Ref<const Eigen::VectorXi>& bits);
    static RisState diagonal(const Eigen::Ref<const rvec>& phases_rad);
};

/// Direct, surface-to-receiver, and transmitter-to-surface channels.
struct RisLinks {
    std::vector<cmat> direct;   // N entries of Q x M (may be zero matrices)
    std::vector<cmat> to_rx;    // N entries of Q x R
    std::vector<cmat> from_tx;  // N entries of R x M
    FrequencyGrid grid{};
    double noise_power_w = 1e-12;

    int rx_antennas() const { return static_cast<int>(to_rx.at(0).rows()); }
    int tx_antennas() const { return static_cast<int>(from_tx.at(0).cols()); }
    int ris_elements() const { return static_cast<int>(to_rx.at(0).cols()); }
};

/// h_{q,m,n} = sum_l alpha_l e^(j(-2pi f_n tau_l + zeta_{q,m,l})).
/// taps_per_pair is row-major over (q, m): index q*tx + m.
ChannelState freq_response(const std::vector<std::vector<PathTap>>& taps_per_pair,
                           int rx, int tx, const FrequencyGrid& grid,
                           double noise_power_w = 1e-12);

/// Composite channel h_n = Gd_n + Gr_n * Theta * Gi_n with Theta applied
/// identically on every tone.
ChannelState compose_ris(const RisLinks& links, const RisState& ris);

enum class ChannelModel { FlatLos, RayleighTaps };

/// Parameters of the random tap generator: n_taps exponentially decaying
/// taps spaced delay_spread/2 apart, normalized to unit average power gain.
struct RayleighSpec {
    int n_taps = 8;
    double delay_spread_s = 1e-7;
};

ChannelState generate(std::uint64_t seed, ChannelModel model,
                      const RayleighSpec& spec, int rx, int tx,
                      const FrequencyGrid& grid, double noise_power_w = 1e-12);

/// Random tap profile for one antenna pair (used by generate; exposed for
/// tests and RIS link construction).
std::vector<PathTap> draw_taps(class Rng& rng, const RayleighSpec& spec);

void save_channel(const ChannelState& state, const std::filesystem::path& path);
ChannelState load_channel(const std::filesystem::path& path);

/// Received tone amplitudes Y_{q,n} = h_{q,.,n} x_n for all antennas (Q x N).
cmat propagate(const ChannelState& channel, const Precoder& precoder);

/// Received tones at one antenna as a harvester input.
ReceivedTones received_at(const ChannelState& channel, const Precoder& precoder,
                          int rx_antenna);

}  // namespace wpt
