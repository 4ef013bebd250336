#include "wptsim/harvester.hpp"

#include <cmath>
#include <stdexcept>

#include "wptsim/channel.hpp"

namespace wpt {

void RectennaParams::validate() const {
    if (!(r_ant_ohm > 0.0) || !(v_t_volt > 0.0) || !(ideality > 0.0) ||
        !(r_load_ohm > 0.0))
        throw std::invalid_argument("RectennaParams: constants must be positive");
    if (breakdown_power_w && !(*breakdown_power_w > 0.0))
        throw std::invalid_argument("RectennaParams: breakdown power must be > 0");
}

double RectennaParams::beta2() const {
    return r_ant_ohm / (2.0 * ideality * v_t_volt);
}

double RectennaParams::beta4() const {
    const double nvt = ideality * v_t_volt;
    return r_ant_ohm * r_ant_ohm / (24.0 * nvt * nvt * nvt);
}

double second_moment(const Eigen::Ref<const cvec>& tones) {
    return tones.squaredNorm();
}

double second_moment(const ReceivedTones& tones) {
    return second_moment(tones.amplitudes);
}

double fourth_moment(const Eigen::Ref<const cvec>& tones) {
    const Eigen::Index n = tones.size();
    if (n == 0) return 0.0;
    // Self-convolution C_s = sum_{i+j=s} Y_i Y_j, s = 0..2N-2.
    cvec conv = cvec::Zero(2 * n - 1);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) conv(i + j) += tones(i) * tones(j);
    return 1.5 * conv.squaredNorm();
}

double fourth_moment(const ReceivedTones& tones) {
    return fourth_moment(tones.amplitudes);
}

double v_out(const ReceivedTones& tones, const RectennaParams& params) {
    params.validate();
    const double m2 = second_moment(tones);
    if (m2 == 0.0) return 0.0;
    double scale_sq = 1.0;
    if (params.breakdown_power_w && m2 > *params.breakdown_power_w)
        scale_sq = *params.breakdown_power_w / m2;
    const double m4 = fourth_moment(tones);
    return params.beta2() * m2 * scale_sq +
           params.beta4() * m4 * scale_sq * scale_sq;
}

double p_dc(const ReceivedTones& tones, const RectennaParams& params) {
    const double v = v_out(tones, params);
    return v * v / params.r_load_ohm;
}

double e3(const ReceivedTones& tones, const RectennaParams& params) {
    const double m2 = second_moment(tones);
    if (m2 == 0.0)
        throw std::invalid_argument("e3: undefined at zero input power");
    return p_dc(tones, params) / m2;
}

double dc_combine(const std::vector<ReceivedTones>& per_antenna,
                  const RectennaParams& params) {
    if (per_antenna.empty())
        throw std::invalid_argument("dc_combine: no antennas");
    double total = 0.0;
    for (const ReceivedTones& tones : per_antenna) {
        const double v = v_out(tones, params);
        total += v * v / params.r_load_ohm;
    }
    return total;
}

double rf_combine(const cmat& per_antenna_tones, const cvec& combiner,
                  const FrequencyGrid& grid, const RectennaParams& params) {
    if (per_antenna_tones.rows() != combiner.size())
        throw std::invalid_argument("rf_combine: combiner/antenna mismatch");
    if (combiner.squaredNorm() > 1.0 + 1e-9)
        throw std::invalid_argument(
            "rf_combine: passive combiner requires ||w||^2 <= 1");
    ReceivedTones combined;
    combined.grid = grid;
    combined.amplitudes = combiner.adjoint() * per_antenna_tones;
    return p_dc(combined, params);
}

EfficiencyChain efficiency_chain(double p_dc_t_w, const Precoder& precoder,
                                 const ChannelState& channel,
                                 const ReceiverConfig& config) {
    if (!(p_dc_t_w > 0.0))
        throw std::invalid_argument("efficiency_chain: p_dc_t must be > 0");
    const double p_rf_t = precoder.power();
    if (std::abs(p_rf_t - config.e1 * p_dc_t_w) >
        1e-6 * std::max(p_rf_t, config.e1 * p_dc_t_w))
        throw std::invalid_argument(
            "efficiency_chain: precoder power must equal e1 * p_dc_t");

    const cmat received = propagate(channel, precoder);
    const double p_rf_r = received.squaredNorm();
    if (p_rf_r == 0.0)
        throw std::invalid_argument("efficiency_chain: zero received power");

    double p_dc_r = 0.0;
    if (config.combining == ReceiverConfig::Combining::Rf) {
        cvec w = config.rf_weights;
        if (w.size() == 0) {
            w = cvec::Zero(channel.rx_antennas());
            w(0) = 1.0;
        }
        p_dc_r = rf_combine(received, w, channel.grid(), config.rectenna);
    } else {
        std::vector<ReceivedTones> per_antenna;
        per_antenna.reserve(channel.rx_antennas());
        for (int q = 0; q < channel.rx_antennas(); ++q)
            per_antenna.push_back(
                {received.row(q).transpose(), channel.grid()});
        p_dc_r = dc_combine(per_antenna, config.rectenna);
    }

    EfficiencyChain chain;
    chain.e1 = config.e1;
    chain.e2 = p_rf_r / p_rf_t;
    chain.e3 = p_dc_r / p_rf_r;
    chain.e4 = config.e4;
    return chain;
}

}  // namespace wpt
