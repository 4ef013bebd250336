#include "wptsim/swipt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "wptsim/rng.hpp"

namespace wpt {

void ReceiverArch::validate() const {
    if (tau < 0.0 || tau > 1.0)
        throw std::invalid_argument("ReceiverArch: tau must be in [0, 1]");
    if (rho < 0.0 || rho > 1.0)
        throw std::invalid_argument("ReceiverArch: rho must be in [0, 1]");
}

double rate_subbands(const ChannelState& channel, const Precoder& info,
                     const ReceiverArch& arch, double noise_power_w,
                     int rx_antenna) {
    arch.validate();
    if (!(noise_power_w > 0.0))
        throw std::invalid_argument("rate_subbands: noise power must be > 0");
    if (arch.kind == ReceiverArch::Kind::Integrated) return 0.0;

    const ReceivedTones tones = received_at(channel, info, rx_antenna);
    double kappa = 1.0;
    if (arch.kind == ReceiverArch::Kind::PowerSplit) kappa = 1.0 - arch.rho;

    double rate = 0.0;
    for (Eigen::Index n = 0; n < tones.amplitudes.size(); ++n) {
        const double snr = kappa * std::norm(tones.amplitudes(n)) / noise_power_w;
        rate += std::log2(1.0 + snr);
    }
    if (arch.kind == ReceiverArch::Kind::TimeSwitch) rate *= 1.0 - arch.tau;
    return rate;
}

double energy_arch(const ChannelState& channel, const Precoder& wpt_signal,
                   const Precoder& wit_signal, const ReceiverArch& arch,
                   const RectennaParams& params, int rx_antenna) {
    arch.validate();
    switch (arch.kind) {
        case ReceiverArch::Kind::Ideal:
        case ReceiverArch::Kind::Integrated:
            return p_dc(received_at(channel, wit_signal, rx_antenna), params);
        case ReceiverArch::Kind::PowerSplit: {
            ReceivedTones tones = received_at(channel, wit_signal, rx_antenna);
            tones.amplitudes *= std::sqrt(arch.rho);
            return p_dc(tones, params);
        }
        case ReceiverArch::Kind::TimeSwitch: {
            double energy =
                arch.tau *
                p_dc(received_at(channel, wpt_signal, rx_antenna), params);
            if (arch.harvest_during_wit)
                energy += (1.0 - arch.tau) *
                          p_dc(received_at(channel, wit_signal, rx_antenna),
                               params);
            return energy;
        }
    }
    throw std::logic_error("energy_arch: unknown architecture");
}

std::vector<REPoint> re_region(const ChannelState& channel,
                               const Precoder& wpt_signal,
                               const Precoder& wit_signal,
                               ReceiverArch::Kind kind, int grid_points,
                               double noise_power_w,
                               const RectennaParams& params,
                               bool harvest_during_wit, int rx_antenna) {
    if (grid_points < 2)
        throw std::invalid_argument("re_region: need at least the endpoints");

    std::vector<REPoint> points;
    points.reserve(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        const double x = static_cast<double>(i) / (grid_points - 1);
        ReceiverArch arch;
        arch.kind = kind;
        arch.harvest_during_wit = harvest_during_wit;
        if (kind == ReceiverArch::Kind::TimeSwitch) arch.tau = x;
        if (kind == ReceiverArch::Kind::PowerSplit) arch.rho = x;
        REPoint point;
        point.param = x;
        point.rate_bps_hz =
            rate_subbands(channel, wit_signal, arch, noise_power_w, rx_antenna);
        point.energy_w = energy_arch(channel, wpt_signal, wit_signal, arch,
                                     params, rx_antenna);
        points.push_back(point);
        if (kind == ReceiverArch::Kind::Ideal ||
            kind == ReceiverArch::Kind::Integrated)
            break;  // no trade-off parameter
    }
    std::sort(points.begin(), points.end(),
              [](const REPoint& a, const REPoint& b) {
                  return a.energy_w < b.energy_w;
              });
    return points;
}

std::vector<REPoint> pareto_frontier(std::vector<REPoint> points) {
    std::sort(points.begin(), points.end(),
              [](const REPoint& a, const REPoint& b) {
                  if (a.energy_w != b.energy_w) return a.energy_w < b.energy_w;
                  return a.rate_bps_hz > b.rate_bps_hz;
              });
    // Scanning from the highest energy down, keep points whose rate exceeds
    // everything to their right.
    std::vector<REPoint> frontier;
    double best_rate = -1.0;
    for (auto it = points.rbegin(); it != points.rend(); ++it) {
        if (it->rate_bps_hz > best_rate) {
            frontier.push_back(*it);
            best_rate = it->rate_bps_hz;
        }
    }
    std::reverse(frontier.begin(), frontier.end());
    return frontier;
}

std::vector<REPoint> re_region_superposed(
    const ChannelState& channel, const Precoder& power_shape,
    const Precoder& info_shape, const ModulationScheme& scheme,
    double total_power_w, int grid_points, double noise_power_w,
    const RectennaParams& params, const ReceiverArch& arch, int mc_symbols,
    std::uint64_t seed, int rx_antenna) {
    arch.validate();
    if (arch.kind == ReceiverArch::Kind::TimeSwitch)
        throw std::invalid_argument(
            "re_region_superposed: the superposed waveform is a PS/ideal/"
            "integrated design, not a time-switched one");
    if (grid_points < 2)
        throw std::invalid_argument("re_region_superposed: need >= 2 points");
    if (!(noise_power_w > 0.0))
        throw std::invalid_argument("re_region_superposed: noise must be > 0");
    if (scheme.kind == ModKind::Ppm)
        throw std::invalid_argument(
            "re_region_superposed: PPM is not a per-tone modulation");
    if (!(power_shape.power() > 0.0) || !(info_shape.power() > 0.0))
        throw std::invalid_argument("re_region_superposed: zero shape power");
    params.validate();

    const double harvest_scale =
        arch.kind == ReceiverArch::Kind::PowerSplit ? std::sqrt(arch.rho) : 1.0;
    const double decode_kappa =
        arch.kind == ReceiverArch::Kind::PowerSplit ? 1.0 - arch.rho
        : arch.kind == ReceiverArch::Kind::Integrated ? 0.0
                                                      : 1.0;
    ModulationScheme unit = scheme;
    unit.symbol_power_w = 1.0;

    std::vector<REPoint> points;
    points.reserve(grid_points);
    for (int i = 0; i < grid_points; ++i) {
        const double ratio = static_cast<double>(i) / (grid_points - 1);
        Precoder power_part = power_shape;
        power_part.weights *=
            std::sqrt(ratio * total_power_w / power_shape.power());
        Precoder info_part = info_shape;
        info_part.weights *=
            std::sqrt((1.0 - ratio) * total_power_w / info_shape.power());

        const cvec a = received_at(channel, power_part, rx_antenna).amplitudes;
        const cvec b = received_at(channel, info_part, rx_antenna).amplitudes;

        REPoint point;
        point.param = ratio;
        for (Eigen::Index n = 0; n < b.size(); ++n)
            point.rate_bps_hz +=
                std::log2(1.0 + decode_kappa * std::norm(b(n)) / noise_power_w);

        double mean_m2 = 0.0;
        double mean_m4 = 0.0;
        if (ratio == 1.0) {
            const cvec tones = harvest_scale * a;
            mean_m2 = second_moment(tones);
            mean_m4 = fourth_moment(tones);
        } else {
            Rng symbol_seed(derive_seed(seed, static_cast<std::uint64_t>(i)));
            for (int draw = 0; draw < mc_symbols; ++draw) {
                const cvec symbols = draw_symbols(
                    unit, static_cast<int>(b.size()), symbol_seed.next_u64());
                const cvec tones =
                    harvest_scale * (a + b.cwiseProduct(symbols));
                mean_m2 += second_moment(tones) / mc_symbols;
                mean_m4 += fourth_moment(tones) / mc_symbols;
            }
        }
        double scale_sq = 1.0;
        if (params.breakdown_power_w && mean_m2 > *params.breakdown_power_w)
            scale_sq = *params.breakdown_power_w / mean_m2;
        const double v = params.beta2() * mean_m2 * scale_sq +
                         params.beta4() * mean_m4 * scale_sq * scale_sq;
        point.energy_w = v * v / params.r_load_ohm;
        points.push_back(point);
    }
    std::sort(points.begin(), points.end(),
              [](const REPoint& a_pt, const REPoint& b_pt) {
                  return a_pt.energy_w < b_pt.energy_w;
              });
    return points;
}

SuperposeResult superpose(const Precoder& power_shape,
                          const ModulationScheme& info_scheme, double ratio,
                          double total_power_w, const RectennaParams& params,
                          int mc_symbols, std::uint64_t seed) {
    if (ratio < 0.0 || ratio > 1.0)
        throw std::invalid_argument("superpose: ratio must be in [0, 1]");
    if (!(total_power_w > 0.0))
        throw std::invalid_argument("superpose: total power must be > 0");
    if (power_shape.antennas() != 1)
        throw std::invalid_argument("superpose: expects rectifier-input tones "
                                    "(single-antenna precoder)");
    if (info_scheme.kind == ModKind::Ppm)
        throw std::invalid_argument(
            "superpose: PPM is a slot modulation, not a per-tone one");
    const double shape_power = power_shape.power();
    if (!(shape_power > 0.0))
        throw std::invalid_argument("superpose: zero power shape");
    if (mc_symbols < 1)
        throw std::invalid_argument("superpose: mc_symbols must be >= 1");

    const int n_tones = power_shape.tones();
    SuperposedWaveform waveform;
    waveform.power_ratio = ratio;
    waveform.info_scheme = info_scheme;
    waveform.power_part = power_shape;
    waveform.power_part.weights *= std::sqrt(ratio * total_power_w / shape_power);
    waveform.info_template =
        uniform_multisine(power_shape.grid, std::max(1e-300, (1.0 - ratio)),
                          1);
    waveform.info_template.weights *= std::sqrt(total_power_w);
    if (ratio == 1.0) waveform.info_template.weights.setZero();

    const cvec power_tones = waveform.power_part.weights.row(0).transpose();
    const cvec info_tones = waveform.info_template.weights.row(0).transpose();

    double mean_m2 = 0.0;
    double mean_m4 = 0.0;
    if (ratio == 1.0) {
        mean_m2 = second_moment(power_tones);
        mean_m4 = fourth_moment(power_tones);
    } else {
        ModulationScheme unit = info_scheme;
        unit.symbol_power_w = 1.0;
        Rng symbol_seed(seed);
        for (int draw = 0; draw < mc_symbols; ++draw) {
            const cvec symbols =
                draw_symbols(unit, n_tones, symbol_seed.next_u64());
            const cvec tones = power_tones + info_tones.cwiseProduct(symbols);
            mean_m2 += second_moment(tones);
            mean_m4 += fourth_moment(tones);
        }
        mean_m2 /= mc_symbols;
        mean_m4 /= mc_symbols;
    }

    // Same truncated model as v_out, on the symbol-averaged moments.
    params.validate();
    double scale_sq = 1.0;
    if (params.breakdown_power_w && mean_m2 > *params.breakdown_power_w)
        scale_sq = *params.breakdown_power_w / mean_m2;
    const double v = params.beta2() * mean_m2 * scale_sq +
                     params.beta4() * mean_m4 * scale_sq * scale_sq;

    SuperposeResult result;
    result.waveform = std::move(waveform);
    result.expected_p_dc_w = v * v / params.r_load_ohm;
    return result;
}

double ppm_max_rate_bits_per_slot(int order) {
    if (order < 2 || (order & (order - 1)) != 0)
        throw std::invalid_argument("ppm: order must be a power of two >= 2");
    return std::log2(static_cast<double>(order)) / order;
}

PpmLinkResult ppm_link(int order, int symbol_count, double symbol_power_w,
                       double noise_std_v, std::uint64_t seed,
                       const RectennaParams& params) {
    const double max_rate = ppm_max_rate_bits_per_slot(order);
    if (symbol_count < 1)
        throw std::invalid_argument("ppm_link: symbol_count must be >= 1");
    if (!(symbol_power_w > 0.0))
        throw std::invalid_argument("ppm_link: symbol power must be > 0");
    if (noise_std_v < 0.0)
        throw std::invalid_argument("ppm_link: negative noise std");
    params.validate();

    // Rectified voltage of the active slot: CW burst at power order*P, whose
    // slot-local DC moments are order*P and 1.5*(order*P)^2.
    const double burst_power = order * symbol_power_w;
    double burst_scale_sq = 1.0;
    if (params.breakdown_power_w && burst_power > *params.breakdown_power_w)
        burst_scale_sq = *params.breakdown_power_w / burst_power;
    const double v_on =
        params.beta2() * burst_power * burst_scale_sq +
        params.beta4() * 1.5 * burst_power * burst_power * burst_scale_sq *
            burst_scale_sq;

    const int bits_per_symbol = static_cast<int>(std::lround(std::log2(order)));
    Rng rng(seed);
    std::int64_t bit_errors = 0;
    for (int s = 0; s < symbol_count; ++s) {
        const int sent = static_cast<int>(rng.below(order));
        int decoded = 0;
        double best = -1e300;
        for (int slot = 0; slot < order; ++slot) {
            double v = (slot == sent) ? v_on : 0.0;
            if (noise_std_v > 0.0) v += noise_std_v * rng.normal();
            if (v > best) {
                best = v;
                decoded = slot;
            }
        }
        const unsigned diff =
            (static_cast<unsigned>(sent) ^ (static_cast<unsigned>(sent) >> 1)) ^
            (static_cast<unsigned>(decoded) ^
             (static_cast<unsigned>(decoded) >> 1));
        bit_errors += __builtin_popcount(diff);
    }

    PpmLinkResult result;
    result.ber = static_cast<double>(bit_errors) /
                 (static_cast<double>(symbol_count) * bits_per_symbol);
    result.throughput_bits_per_slot = (1.0 - result.ber) * max_rate;

    // Full-signal harvest: duty-cycle 1/order time-average of the burst's
    // slot moments.
    const double mean_m2 = symbol_power_w;
    const double mean_m4 = 1.5 * order * symbol_power_w * symbol_power_w;
    double scale_sq = 1.0;
    if (params.breakdown_power_w && mean_m2 > *params.breakdown_power_w)
        scale_sq = *params.breakdown_power_w / mean_m2;
    const double v_avg = params.beta2() * mean_m2 * scale_sq +
                         params.beta4() * mean_m4 * scale_sq * scale_sq;
    result.p_dc_w = v_avg * v_avg / params.r_load_ohm;
    return result;
}

}  // namespace wpt
