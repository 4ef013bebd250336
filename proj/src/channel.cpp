#include "wptsim/channel.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "wptsim/rng.hpp"

namespace wpt {

ChannelState::ChannelState(std::vector<cmat> per_tone, FrequencyGrid grid,
                           double noise_power_w)
    : per_tone_(std::move(per_tone)),
      grid_(grid),
      noise_power_w_(noise_power_w) {
    grid_.validate();
    if (per_tone_.size() != static_cast<size_t>(grid_.n_tones))
        throw std::invalid_argument("ChannelState: tone count mismatch");
    rx_ = static_cast<int>(per_tone_.at(0).rows());
    tx_ = static_cast<int>(per_tone_.at(0).cols());
    for (const cmat& h : per_tone_) {
        if (h.rows() != rx_ || h.cols() != tx_)
            throw std::invalid_argument("ChannelState: ragged tone matrices");
        if (!h.allFinite())
            throw std::invalid_argument("ChannelState: non-finite entry");
    }
    if (!(noise_power_w_ >= 0.0))
        throw std::invalid_argument("ChannelState: negative noise power");
}

rvec ChannelState::tone_gains(int q) const {
    rvec gains(n_tones());
    for (int n = 0; n < n_tones(); ++n)
        gains(n) = per_tone_[n].row(q).squaredNorm();
    return gains;
}

void RisState::validate() const {
    const int r = elements();
    if (r < 1 || theta.cols() != r)
        throw std::invalid_argument("RisState: theta must be square");
    if ((theta - theta.transpose()).norm() > 1e-9 * std::max(1.0, theta.norm()))
        throw std::invalid_argument("RisState: theta must be symmetric");
    if ((theta.adjoint() * theta - cmat::Identity(r, r)).norm() > 1e-9 * r)
        throw std::invalid_argument("RisState: theta must be unitary");
    if (mode == RisMode::DiagonalPhase || mode == RisMode::OneBit) {
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                if (i == j) continue;
                if (std::abs(theta(i, j)) > 1e-12)
                    throw std::invalid_argument(
                        "RisState: diagonal mode forbids off-diagonal entries");
            }
        for (int i = 0; i < r; ++i)
            if (std::abs(std::abs(theta(i, i)) - 1.0) > 1e-9)
                throw std::invalid_argument(
                    "RisState: diagonal entries must have unit modulus");
    }
    if (mode == RisMode::OneBit) {
        for (int i = 0; i < r; ++i) {
            const cplx d = theta(i, i);
            if (std::abs(d.imag()) > 1e-12 ||
                std::abs(std::abs(d.real()) - 1.0) > 1e-12)
                throw std::invalid_argument(
                    "RisState: one-bit entries must be +1 or -1");
        }
    }
}

RisState RisState::one_bit(const Eigen::Ref<const Eigen::VectorXi>& bits) {
    RisState state;
    state.mode = RisMode::OneBit;
    const int r = static_cast<int>(bits.size());
    state.theta = cmat::Zero(r, r);
    for (int i = 0; i < r; ++i) {
        if (bits(i) != 1 && bits(i) != -1)
            throw std::invalid_argument("RisState::one_bit: bits must be +-1");
        state.theta(i, i) = cplx(static_cast<double>(bits(i)), 0.0);
    }
    return state;
}

RisState RisState::diagonal(const Eigen::Ref<const rvec>& phases_rad) {
    RisState state;
    state.mode = RisMode::DiagonalPhase;
    const int r = static_cast<int>(phases_rad.size());
    state.theta = cmat::Zero(r, r);
    for (int i = 0; i < r; ++i)
        state.theta(i, i) = std::polar(1.0, phases_rad(i));
    return state;
}

ChannelState freq_response(const std::vector<std::vector<PathTap>>& taps_per_pair,
                           int rx, int tx, const FrequencyGrid& grid,
                           double noise_power_w) {
    grid.validate();
    if (rx < 1 || tx < 1)
        throw std::invalid_argument("freq_response: antenna counts must be >= 1");
    if (taps_per_pair.size() != static_cast<size_t>(rx) * tx)
        throw std::invalid_argument("freq_response: need taps for every (q, m)");
    for (const auto& taps : taps_per_pair) {
        if (taps.empty())
            throw std::invalid_argument(
                "freq_response: at least one tap per antenna pair");
        for (const PathTap& tap : taps)
            if (tap.delay_s < 0.0 || tap.gain < 0.0)
                throw std::invalid_argument(
                    "freq_response: delays and gains must be non-negative");
    }

    std::vector<cmat> per_tone(grid.n_tones, cmat::Zero(rx, tx));
    for (int n = 0; n < grid.n_tones; ++n) {
        const double f = grid.tone_hz(n);
        for (int q = 0; q < rx; ++q)
            for (int m = 0; m < tx; ++m) {
                cplx sum(0.0, 0.0);
                for (const PathTap& tap : taps_per_pair[q * tx + m])
                    sum += tap.gain * std::polar(1.0, -2.0 * M_PI * f * tap.delay_s +
                                                          tap.phase_rad);
                per_tone[n](q, m) = sum;
            }
    }
    return ChannelState(std::move(per_tone), grid, noise_power_w);
}

ChannelState compose_ris(const RisLinks& links, const RisState& ris) {
    ris.validate();
    links.grid.validate();
    const int n_tones = links.grid.n_tones;
    if (links.direct.size() != static_cast<size_t>(n_tones) ||
        links.to_rx.size() != static_cast<size_t>(n_tones) ||
        links.from_tx.size() != static_cast<size_t>(n_tones))
        throw std::invalid_argument("compose_ris: link tone count mismatch");
    const int r = links.ris_elements();
    if (ris.elements() != r)
        throw std::invalid_argument("compose_ris: theta/link element mismatch");

    std::vector<cmat> per_tone(n_tones);
    for (int n = 0; n < n_tones; ++n) {
        if (links.from_tx[n].rows() != r ||
            links.direct[n].rows() != links.to_rx[n].rows() ||
            links.direct[n].cols() != links.from_tx[n].cols())
            throw std::invalid_argument("compose_ris: inconsistent link shapes");
        per_tone[n] =
            links.direct[n] + links.to_rx[n] * ris.theta * links.from_tx[n];
    }
    return ChannelState(std::move(per_tone), links.grid, links.noise_power_w);
}

std::vector<PathTap> draw_taps(Rng& rng, const RayleighSpec& spec) {
    if (spec.n_taps < 1)
        throw std::invalid_argument("draw_taps: need at least one tap");
    const int l_taps = spec.n_taps;
    const double spacing = spec.delay_spread_s / 2.0;

    // Exponential power profile normalized to unit total average power.
    rvec profile(l_taps);
    for (int l = 0; l < l_taps; ++l)
        profile(l) = std::exp(-static_cast<double>(l) * spacing /
                              std::max(spec.delay_spread_s, 1e-300));
    profile /= profile.sum();

    std::vector<PathTap> taps(l_taps);
    for (int l = 0; l < l_taps; ++l) {
        const cplx g = std::sqrt(profile(l)) * rng.cnormal();
        taps[l].delay_s = l * spacing;
        taps[l].gain = std::abs(g);
        taps[l].phase_rad = std::arg(g);
    }
    return taps;
}

ChannelState generate(std::uint64_t seed, ChannelModel model,
                      const RayleighSpec& spec, int rx, int tx,
                      const FrequencyGrid& grid, double noise_power_w) {
    grid.validate();
    if (rx < 1 || tx < 1)
        throw std::invalid_argument("generate: antenna counts must be >= 1");
    if (model == ChannelModel::FlatLos) {
        std::vector<cmat> per_tone(grid.n_tones, cmat::Ones(rx, tx));
        return ChannelState(std::move(per_tone), grid, noise_power_w);
    }
    Rng rng(seed);
    std::vector<std::vector<PathTap>> taps(static_cast<size_t>(rx) * tx);
    for (auto& pair_taps : taps) pair_taps = draw_taps(rng, spec);
    return freq_response(taps, rx, tx, grid, noise_power_w);
}

namespace {

nlohmann::json complex_to_json(const cplx& z) {
    return nlohmann::json::array({z.real(), z.imag()});
}

}  // namespace

void save_channel(const ChannelState& state, const std::filesystem::path& path) {
    nlohmann::json j;
    j["grid"] = {{"f0_hz", state.grid().f0_hz},
                 {"delta_f_hz", state.grid().delta_f_hz},
                 {"n_tones", state.grid().n_tones}};
    j["shape"] = {state.rx_antennas(), state.tx_antennas(), state.n_tones()};
    j["noise_power_w"] = state.noise_power_w();
    nlohmann::json data = nlohmann::json::array();
    for (int q = 0; q < state.rx_antennas(); ++q)
        for (int m = 0; m < state.tx_antennas(); ++m)
            for (int n = 0; n < state.n_tones(); ++n)
                data.push_back(complex_to_json(state.h(q, m, n)));
    j["data"] = std::move(data);

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("save_channel: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

ChannelState load_channel(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_channel: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("load_channel: " + path.string() + ": " +
                                 e.what());
    }

    auto require = [&](const nlohmann::json& node, const char* key,
                       const char* where) -> const nlohmann::json& {
        if (!node.contains(key))
            throw std::runtime_error(std::string("load_channel: missing field '") +
                                     where + "." + key + "'");
        return node.at(key);
    };

    const nlohmann::json& grid_node = require(j, "grid", "$");
    const double f0 = require(grid_node, "f0_hz", "grid").get<double>();
    const double delta_f = require(grid_node, "delta_f_hz", "grid").get<double>();
    const int tones = require(grid_node, "n_tones", "grid").get<int>();
    const FrequencyGrid grid(f0, delta_f, tones);

    const nlohmann::json& shape = require(j, "shape", "$");
    if (!shape.is_array() || shape.size() != 3)
        throw std::runtime_error("load_channel: field 'shape' must be [Q, M, N]");
    const int rx = shape[0].get<int>();
    const int tx = shape[1].get<int>();
    const int n_tones = shape[2].get<int>();
    if (n_tones != grid.n_tones)
        throw std::runtime_error("load_channel: shape[2] disagrees with grid");

    const nlohmann::json& data = require(j, "data", "$");
    const size_t expected = static_cast<size_t>(rx) * tx * n_tones;
    if (!data.is_array() || data.size() != expected)
        throw std::runtime_error("load_channel: field 'data' must hold " +
                                 std::to_string(expected) + " [re, im] pairs");

    std::vector<cmat> per_tone(n_tones, cmat::Zero(rx, tx));
    size_t idx = 0;
    for (int q = 0; q < rx; ++q)
        for (int m = 0; m < tx; ++m)
            for (int n = 0; n < n_tones; ++n, ++idx) {
                const nlohmann::json& entry = data[idx];
                if (!entry.is_array() || entry.size() != 2)
                    throw std::runtime_error(
                        "load_channel: data[" + std::to_string(idx) +
                        "] must be an [re, im] pair");
                per_tone[n](q, m) =
                    cplx(entry[0].get<double>(), entry[1].get<double>());
            }
    return ChannelState(std::move(per_tone), grid,
                        require(j, "noise_power_w", "$").get<double>());
}

cmat propagate(const ChannelState& channel, const Precoder& precoder) {
    if (precoder.antennas() != channel.tx_antennas())
        throw std::invalid_argument("propagate: antenna count mismatch");
    if (precoder.tones() != channel.n_tones())
        throw std::invalid_argument("propagate: tone count mismatch");
    cmat received(channel.rx_antennas(), channel.n_tones());
    for (int n = 0; n < channel.n_tones(); ++n)
        received.col(n) = channel.tone(n) * precoder.weights.col(n);
    return received;
}

ReceivedTones received_at(const ChannelState& channel, const Precoder& precoder,
                          int rx_antenna) {
    if (rx_antenna < 0 || rx_antenna >= channel.rx_antennas())
        throw std::invalid_argument("received_at: bad antenna index");
    ReceivedTones tones;
    tones.grid = channel.grid();
    tones.amplitudes.resize(channel.n_tones());
    for (int n = 0; n < channel.n_tones(); ++n)
        tones.amplitudes(n) =
            (channel.tone(n).row(rx_antenna) * precoder.weights.col(n))(0);
    return tones;
}

}  // namespace wpt
