#include "wptsim/signals.hpp"

#include <cmath>
#include <stdexcept>

#include "wptsim/rng.hpp"

namespace wpt {

TimeSeries synthesize(const Precoder& precoder, int oversample_factor) {
    if (precoder.weights.size() == 0)
        throw std::invalid_argument("synthesize: empty precoder");
    if (precoder.antennas() != 1)
        throw std::invalid_argument(
            "synthesize: per-antenna synthesis expects a single-antenna "
            "precoder; synthesize each row separately");
    if (oversample_factor < 8)
        throw std::invalid_argument("synthesize: oversample_factor must be >= 8");

    const FrequencyGrid& grid = precoder.grid;
    grid.validate();
    if (precoder.tones() != grid.n_tones)
        throw std::invalid_argument("synthesize: precoder/grid tone mismatch");

    const std::int64_t a = grid.harmonic_index();
    const std::int64_t n_tones = grid.n_tones;
    // Samples per period: K = Fs / delta_f = oversample * 4 * (a + N - 1),
    // an exact integer. Tone n advances (a + n) cycles per period, so its
    // phase at sample k is 2*pi*((a+n)*k mod K)/K; the integer modulus keeps
    // the phase exact over the whole period.
    const std::int64_t k_samples = 4LL * oversample_factor * (a + n_tones - 1);

    TimeSeries ts;
    ts.sample_rate_hz = static_cast<double>(k_samples) * grid.delta_f_hz;
    ts.duration_s = grid.period_s();
    ts.samples.resize(k_samples);

    const double two_pi_over_k = 2.0 * M_PI / static_cast<double>(k_samples);
    const double sqrt2 = std::sqrt(2.0);
    for (std::int64_t k = 0; k < k_samples; ++k) {
        double acc = 0.0;
        for (std::int64_t n = 0; n < n_tones; ++n) {
            const std::int64_t cycles = ((a + n) * k) % k_samples;
            const double phase = two_pi_over_k * static_cast<double>(cycles);
            const cplx w = precoder.weights(0, n);
            acc += w.real() * std::cos(phase) - w.imag() * std::sin(phase);
        }
        ts.samples(k) = sqrt2 * acc;
    }
    return ts;
}

double papr_db(const TimeSeries& ts) {
    if (ts.samples.size() == 0)
        throw std::invalid_argument("papr: empty series");
    const double mean_sq = ts.samples.squaredNorm() / ts.samples.size();
    if (mean_sq == 0.0) throw std::invalid_argument("papr: zero power");
    const double peak_sq = ts.samples.array().square().maxCoeff();
    return 10.0 * std::log10(peak_sq / mean_sq);
}

Precoder uniform_multisine(const FrequencyGrid& grid, double total_power_w,
                           int antennas) {
    grid.validate();
    if (!(total_power_w > 0.0))
        throw std::invalid_argument("uniform_multisine: total_power must be > 0");
    if (antennas < 1)
        throw std::invalid_argument("uniform_multisine: antennas must be >= 1");
    Precoder pc;
    pc.grid = grid;
    const double amp =
        std::sqrt(total_power_w / (antennas * grid.n_tones));
    pc.weights = cmat::Constant(antennas, grid.n_tones, cplx(amp, 0.0));
    return pc;
}

namespace {

// Gray-mapped square QAM amplitude along one axis, unit average power once
// both axes are combined.
double qam_axis_level(std::uint64_t gray_index, int levels) {
    // Undo Gray code to recover the PAM position.
    std::uint64_t b = gray_index;
    for (std::uint64_t shift = 1; shift < 64; shift <<= 1) {
        const std::uint64_t s = b >> shift;
        if (!s) break;
        b ^= s;
    }
    return 2.0 * static_cast<double>(b) - (levels - 1);
}

}  // namespace

cvec draw_symbols(const ModulationScheme& scheme, int count,
                  std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("draw_symbols: count must be >= 1");
    const double p = scheme.symbol_power_w;
    if (!(p > 0.0))
        throw std::invalid_argument("draw_symbols: symbol power must be > 0");
    Rng rng(seed);

    switch (scheme.kind) {
        case ModKind::Cw: {
            return cvec::Constant(count, cplx(std::sqrt(p), 0.0));
        }
        case ModKind::Ook: {
            const double l = scheme.ook_level;
            if (l < 1.0)
                throw std::invalid_argument("draw_symbols: OOK level must be >= 1");
            const double on_prob = 1.0 / (l * l);
            const double on_amp = l * std::sqrt(p);
            cvec out(count);
            for (int i = 0; i < count; ++i)
                out(i) = rng.uniform() < on_prob ? cplx(on_amp, 0.0) : cplx(0.0, 0.0);
            return out;
        }
        case ModKind::Ppm: {
            const int order = scheme.order;
            if (order < 2 || (order & (order - 1)) != 0)
                throw std::invalid_argument(
                    "draw_symbols: PPM order must be a power of two >= 2");
            const double amp = std::sqrt(order * p);
            cvec out = cvec::Zero(static_cast<std::int64_t>(count) * order);
            for (int i = 0; i < count; ++i) {
                const int slot = static_cast<int>(rng.below(order));
                out(static_cast<std::int64_t>(i) * order + slot) = cplx(amp, 0.0);
            }
            return out;
        }
        case ModKind::Qam: {
            const int order = scheme.order;
            const int levels = static_cast<int>(std::lround(std::sqrt(order)));
            if (levels * levels != order || order < 4 ||
                (order & (order - 1)) != 0)
                throw std::invalid_argument(
                    "draw_symbols: QAM order must be a square power of two");
            // Unit average power: E[i^2 + q^2] = 2*(levels^2 - 1)/3.
            const double norm =
                std::sqrt(3.0 * p / (2.0 * (levels * levels - 1)));
            cvec out(count);
            for (int i = 0; i < count; ++i) {
                const double re = qam_axis_level(rng.below(levels), levels);
                const double im = qam_axis_level(rng.below(levels), levels);
                out(i) = norm * cplx(re, im);
            }
            return out;
        }
        case ModKind::Cscg: {
            cvec out(count);
            const double scale = std::sqrt(p);
            for (int i = 0; i < count; ++i) out(i) = scale * rng.cnormal();
            return out;
        }
    }
    throw std::logic_error("draw_symbols: unknown modulation kind");
}

}  // namespace wpt
