#include "wptsim/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace wpt {

namespace {

void check_power(double total_power_w) {
    if (!(total_power_w > 0.0))
        throw std::invalid_argument("strategy: total power must be > 0");
}

}  // namespace

Precoder smf(const ChannelState& channel, int rx_antenna, double beta,
             double total_power_w) {
    check_power(total_power_w);
    if (beta < 1.0) throw std::invalid_argument("smf: beta must be >= 1");
    const int n_tones = channel.n_tones();
    const int m_tx = channel.tx_antennas();

    rvec norms(n_tones);
    for (int n = 0; n < n_tones; ++n)
        norms(n) = channel.rx_vector(rx_antenna, n).norm();
    const double max_norm = norms.maxCoeff();
    if (max_norm == 0.0) throw std::invalid_argument("smf: all-zero channel");

    // Weights (||h_n|| / max)^"2beta" stay in [0, 1] for any beta.
    rvec weights(n_tones);
    for (int n = 0; n < n_tones; ++n)
        weights(n) = norms(n) > 0.0
                         ? std::pow(norms(n) / max_norm, 2.0 * beta)
                         : 0.0;
    const double weight_sum = weights.sum();

    Precoder pc;
    pc.grid = channel.grid();
    pc.weights = cmat::Zero(m_tx, n_tones);
    for (int n = 0; n < n_tones; ++n) {
        if (weights(n) == 0.0) continue;
        const cvec h = channel.rx_vector(rx_antenna, n);
        const double tone_power = total_power_w * weights(n) / weight_sum;
        pc.weights.col(n) = h.conjugate() / h.norm() * std::sqrt(tone_power);
    }
    return pc;
}

Precoder ass(const ChannelState& channel, int rx_antenna, double total_power_w) {
    check_power(total_power_w);
    const int n_tones = channel.n_tones();
    int best = 0;
    double best_norm = -1.0;
    for (int n = 0; n < n_tones; ++n) {
        const double norm = channel.rx_vector(rx_antenna, n).norm();
        if (norm > best_norm) {
            best_norm = norm;
            best = n;
        }
    }
    if (best_norm == 0.0) throw std::invalid_argument("ass: all-zero channel");

    Precoder pc;
    pc.grid = channel.grid();
    pc.weights = cmat::Zero(channel.tx_antennas(), n_tones);
    const cvec h = channel.rx_vector(rx_antenna, best);
    pc.weights.col(best) = h.conjugate() / h.norm() * std::sqrt(total_power_w);
    return pc;
}

Precoder mrt_cw(const ChannelState& channel, int rx_antenna,
                double total_power_w) {
    check_power(total_power_w);
    const cvec h = channel.rx_vector(rx_antenna, 0);
    if (h.norm() == 0.0)
        throw std::invalid_argument("mrt_cw: zero channel at f0");
    Precoder pc;
    pc.grid = channel.grid();
    pc.weights = cmat::Zero(channel.tx_antennas(), channel.n_tones());
    pc.weights.col(0) = h.conjugate() / h.norm() * std::sqrt(total_power_w);
    return pc;
}

Precoder uniform_mrt(const ChannelState& channel, int rx_antenna,
                     double total_power_w) {
    check_power(total_power_w);
    const int n_tones = channel.n_tones();
    Precoder pc;
    pc.grid = channel.grid();
    pc.weights = cmat::Zero(channel.tx_antennas(), n_tones);
    const double tone_power = total_power_w / n_tones;
    for (int n = 0; n < n_tones; ++n) {
        const cvec h = channel.rx_vector(rx_antenna, n);
        if (h.norm() > 0.0) {
            pc.weights.col(n) = h.conjugate() / h.norm() * std::sqrt(tone_power);
        } else {
            pc.weights(0, n) = std::sqrt(tone_power);
        }
    }
    return pc;
}

Precoder apply_strategy(const Strategy& strategy, const ChannelState& channel,
                        int rx_antenna) {
    switch (strategy.kind) {
        case Strategy::Kind::MrtCw:
            return mrt_cw(channel, rx_antenna, strategy.total_power_w);
        case Strategy::Kind::Ass:
            return ass(channel, rx_antenna, strategy.total_power_w);
        case Strategy::Kind::Uniform:
            return uniform_mrt(channel, rx_antenna, strategy.total_power_w);
        case Strategy::Kind::Smf:
            return smf(channel, rx_antenna, strategy.beta,
                       strategy.total_power_w);
    }
    throw std::logic_error("apply_strategy: unknown kind");
}

cvec optimize_rf_combiner(const ChannelState& channel, const Precoder& precoder,
                          const RectennaParams& params) {
    const cmat received = propagate(channel, precoder);
    const int q_rx = static_cast<int>(received.rows());
    if (q_rx == 1) return cvec::Ones(1);

    const double total = received.squaredNorm();
    if (total == 0.0) return cvec::Constant(q_rx, 1.0 / std::sqrt(q_rx));

    if (channel.n_tones() == 1) {
        // Matched filter, optimal for a single tone: the combined amplitude
        // |w^H y| is maximized at w = y / ||y|| and p_dc is monotone in it.
        return received.col(0) / received.col(0).norm();
    }

    auto p_dc_of = [&](const cvec& w) {
        ReceivedTones combined;
        combined.grid = channel.grid();
        combined.amplitudes = (w / w.norm()).adjoint() * received;
        return p_dc(combined, params);
    };

    // Start at the matched filter to the dominant tone; ascent only accepts
    // strict improvements, so the baseline is a floor on the result.
    int dominant = 0;
    double dominant_power = -1.0;
    for (int n = 0; n < channel.n_tones(); ++n) {
        const double tone_power = received.col(n).squaredNorm();
        if (tone_power > dominant_power) {
            dominant_power = tone_power;
            dominant = n;
        }
    }
    cvec w = received.col(dominant);
    if (w.norm() == 0.0) w = cvec::Ones(q_rx);
    w /= w.norm();
    double best = p_dc_of(w);

    constexpr int kPhases = 16;
    constexpr int kPasses = 3;
    const double mag_steps[] = {0.0, 0.5, 1.0, 2.0};
    for (int pass = 0; pass < kPasses; ++pass) {
        for (int q = 0; q < q_rx; ++q) {
            const double base_mag = std::abs(w(q)) > 0.0
                                        ? std::abs(w(q))
                                        : w.norm() / std::sqrt(q_rx);
            cvec candidate = w;
            for (double step : mag_steps) {
                const double mag = base_mag * step;
                if (mag == 0.0 && step != 0.0) continue;
                for (int k = 0; k < kPhases; ++k) {
                    const double phi = 2.0 * M_PI * k / kPhases;
                    candidate(q) = std::polar(mag, phi);
                    if (candidate.norm() == 0.0) continue;
                    const double value = p_dc_of(candidate);
                    if (value > best) {
                        best = value;
                        w = candidate;
                        w /= w.norm();
                        candidate = w;
                    }
                }
                candidate(q) = w(q);
            }
        }
    }
    return w / w.norm();
}

int argmax_entry(const std::vector<Precoder>& entries,
                 const std::function<double(const Precoder&)>& metric) {
    if (entries.empty()) throw std::invalid_argument("argmax_entry: no entries");
    int best = 0;
    double best_value = metric(entries[0]);
    for (int i = 1; i < static_cast<int>(entries.size()); ++i) {
        const double value = metric(entries[i]);
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }
    return best;
}

RisState ris_tile_scan(const RisLinks& links, int tile_rows, int tile_cols,
                       const std::function<double(const RisState&)>& probe,
                       int sweeps, std::vector<double>* probe_trace) {
    const int r = links.ris_elements();
    const int tile_size = tile_rows * tile_cols;
    if (tile_size < 1)
        throw std::invalid_argument("ris_tile_scan: empty tiles");
    if (r % tile_size != 0)
        throw std::invalid_argument(
            "ris_tile_scan: element count must divide into tiles");
    if (sweeps < 1) throw std::invalid_argument("ris_tile_scan: sweeps >= 1");
    const int n_tiles = r / tile_size;

    Eigen::VectorXi bits = Eigen::VectorXi::Ones(r);  // all OFF (+1)
    auto set_tile = [&](Eigen::VectorXi& target, int tile, int value) {
        for (int i = 0; i < tile_size; ++i)
            target(tile * tile_size + i) = value;
    };

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int tile = 0; tile < n_tiles; ++tile) {
            Eigen::VectorXi off_bits = bits;
            set_tile(off_bits, tile, +1);
            Eigen::VectorXi on_bits = bits;
            set_tile(on_bits, tile, -1);
            const double p_off = probe(RisState::one_bit(off_bits));
            const double p_on = probe(RisState::one_bit(on_bits));
            // Ties keep the OFF state.
            bits = p_on > p_off ? on_bits : off_bits;
            if (probe_trace)
                probe_trace->push_back(p_on > p_off ? p_on : p_off);
        }
    }
    return RisState::one_bit(bits);
}

}  // namespace wpt
