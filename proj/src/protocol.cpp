#include "wptsim/protocol.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "wptsim/rng.hpp"

namespace wpt {

void Codebook::validate(double total_power_w) const {
    if (entries.empty()) throw std::invalid_argument("Codebook: empty");
    if (bits < 1) throw std::invalid_argument("Codebook: bits must be >= 1");
    if (entries.size() > (1ULL << bits))
        throw std::invalid_argument("Codebook: more than 2^bits entries");
    for (size_t i = 0; i < entries.size(); ++i) {
        const double power = entries[i].power();
        if (std::abs(power - total_power_w) > 1e-9 * total_power_w)
            throw std::invalid_argument("Codebook: entry " + std::to_string(i) +
                                        " violates the power constraint");
        for (size_t j = i + 1; j < entries.size(); ++j)
            if (entries[i].weights.rows() == entries[j].weights.rows() &&
                entries[i].weights.cols() == entries[j].weights.cols() &&
                (entries[i].weights - entries[j].weights).norm() == 0.0)
                throw std::invalid_argument("Codebook: duplicate entries");
    }
}

Codebook build_codebook(CodebookKind kind, int antennas,
                        const FrequencyGrid& grid, double total_power_w,
                        int bits, std::uint64_t seed) {
    if (bits < 1) throw std::invalid_argument("build_codebook: bits must be >= 1");
    if (antennas < 1)
        throw std::invalid_argument("build_codebook: antennas must be >= 1");
    grid.validate();
    if (!(total_power_w > 0.0))
        throw std::invalid_argument("build_codebook: power must be > 0");

    Codebook book;
    book.bits = bits;
    const size_t capacity = 1ULL << bits;
    const int n_tones = grid.n_tones;

    if (kind == CodebookKind::NestedRandom) {
        Rng rng(seed);
        book.entries.reserve(capacity);
        for (size_t i = 0; i < capacity; ++i) {
            Precoder pc;
            pc.grid = grid;
            pc.weights = cmat::Zero(antennas, n_tones);
            for (int n = 0; n < n_tones; ++n) {
                cvec dir(antennas);
                for (int m = 0; m < antennas; ++m) dir(m) = rng.cnormal();
                pc.weights.col(n) =
                    dir / dir.norm() * std::sqrt(total_power_w / n_tones);
            }
            book.entries.push_back(std::move(pc));
        }
    } else {
        // DFT beam b, allocation a: a == 0 is uniform, a == 1..N puts all
        // power on tone a-1. For N = 1 the two coincide, so only the
        // single-tone allocation is emitted.
        const int first_alloc = n_tones == 1 ? 1 : 0;
        for (int beam = 0;
             beam < antennas && book.entries.size() < capacity; ++beam) {
            cvec dir(antennas);
            for (int m = 0; m < antennas; ++m)
                dir(m) = std::polar(1.0 / std::sqrt(antennas),
                                    2.0 * M_PI * beam * m / antennas);
            for (int alloc = first_alloc;
                 alloc <= n_tones && book.entries.size() < capacity; ++alloc) {
                Precoder pc;
                pc.grid = grid;
                pc.weights = cmat::Zero(antennas, n_tones);
                if (alloc == 0) {
                    for (int n = 0; n < n_tones; ++n)
                        pc.weights.col(n) =
                            dir * std::sqrt(total_power_w / n_tones);
                } else {
                    pc.weights.col(alloc - 1) = dir * std::sqrt(total_power_w);
                }
                book.entries.push_back(std::move(pc));
            }
        }
    }
    book.validate(total_power_w);
    return book;
}

double Frame::resolved_period(int n_entries) const {
    const double training = n_entries * slot_s;
    const double minimum = training + wpt_s;
    if (period_s == 0.0) return minimum;
    if (period_s < minimum - 1e-12)
        throw std::invalid_argument(
            "Frame: period shorter than training + WPT phases");
    return period_s;
}

double delivered_p_dc(const ChannelState& channel, const Precoder& precoder,
                      const RectennaParams& params) {
    const cmat received = propagate(channel, precoder);
    std::vector<ReceivedTones> per_antenna;
    per_antenna.reserve(channel.rx_antennas());
    for (int q = 0; q < channel.rx_antennas(); ++q)
        per_antenna.push_back({received.row(q).transpose(), channel.grid()});
    return dc_combine(per_antenna, params);
}

ClosedLoopReport run_closed_loop(const ChannelState& channel,
                                 const Codebook& codebook, const Frame& frame,
                                 const ProbeModel& probe,
                                 const RectennaParams& params) {
    if (codebook.entries.empty())
        throw std::invalid_argument("run_closed_loop: empty codebook");
    if (probe.noise_std < 0.0)
        throw std::invalid_argument("run_closed_loop: negative probe noise");
    const int n_entries = static_cast<int>(codebook.entries.size());

    Rng rng(probe.seed);
    // sigma of the underlying normal for a mean-one lognormal with relative
    // std noise_std.
    const double sigma =
        probe.noise_std > 0.0
            ? std::sqrt(std::log1p(probe.noise_std * probe.noise_std))
            : 0.0;

    ClosedLoopReport report;
    report.probed_powers_w.resize(n_entries);
    std::vector<double> true_powers(n_entries);
    for (int i = 0; i < n_entries; ++i) {
        true_powers[i] = delivered_p_dc(channel, codebook.entries[i], params);
        double measured = true_powers[i];
        if (sigma > 0.0)
            measured *= std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
        report.probed_powers_w[i] = measured;
        if (report.selected_index < 0 ||
            measured > report.probed_powers_w[report.selected_index])
            report.selected_index = i;
    }

    report.wpt_p_dc_w = true_powers[report.selected_index];

    const double period = frame.resolved_period(n_entries);
    double energy = 0.0;  // in W * s over one frame
    for (int i = 0; i < n_entries; ++i) energy += true_powers[i] * frame.slot_s;
    energy += report.wpt_p_dc_w * frame.wpt_s;
    report.frame_avg_p_dc_w = energy / period;
    return report;
}

std::string ClosedLoopReport::to_json() const {
    nlohmann::json j;
    j["selected_index"] = selected_index;
    j["probed_powers_w"] = probed_powers_w;
    j["wpt_p_dc_w"] = wpt_p_dc_w;
    j["frame_avg_p_dc_w"] = frame_avg_p_dc_w;
    return j.dump();
}

}  // namespace wpt
