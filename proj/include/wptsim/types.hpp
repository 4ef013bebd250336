#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace wpt {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

/// Evenly spaced tone grid: tone n sits at f0 + n*delta_f, n = 0..n_tones-1.
/// f0 must be an integer multiple of delta_f so every waveform on the grid
/// is periodic with period 1/delta_f and time averages over one period are
/// exact DC values.
struct FrequencyGrid {
    double f0_hz = 0.0;
    double delta_f_hz = 0.0;
    int n_tones = 0;

    FrequencyGrid() = default;
    FrequencyGrid(double f0, double delta_f, int tones)
        : f0_hz(f0), delta_f_hz(delta_f), n_tones(tones) {
        validate();
    }

    void validate() const {
        if (!(delta_f_hz > 0.0))
            throw std::invalid_argument("FrequencyGrid: delta_f must be > 0");
        if (!(f0_hz > 0.0))
            throw std::invalid_argument("FrequencyGrid: f0 must be > 0");
        if (n_tones < 1)
            throw std::invalid_argument("FrequencyGrid: n_tones must be >= 1");
        const double ratio = f0_hz / delta_f_hz;
        const double nearest = std::round(ratio);
        if (std::abs(ratio - nearest) > 1e-6 * std::max(1.0, ratio))
            throw std::invalid_argument(
                "FrequencyGrid: f0 must be an integer multiple of delta_f");
    }

    /// f0 / delta_f as an exact integer (valid after validate()).
    std::int64_t harmonic_index() const {
        return static_cast<std::int64_t>(std::llround(f0_hz / delta_f_hz));
    }
    double tone_hz(int n) const { return f0_hz + n * delta_f_hz; }
    double max_hz() const { return tone_hz(n_tones - 1); }
    double period_s() const { return 1.0 / delta_f_hz; }

    bool operator==(const FrequencyGrid&) const = default;
};

/// Complex transmit weights across M antennas (rows) and N tones (columns).
struct Precoder {
    cmat weights;  // M x N
    FrequencyGrid grid;

    int antennas() const { return static_cast<int>(weights.rows()); }
    int tones() const { return static_cast<int>(weights.cols()); }
    /// Total transmit power sum |x_{m,n}|^2.
    double power() const { return weights.squaredNorm(); }
};

/// Real passband sample sequence (unit-impedance amplitude, volts-equivalent).
struct TimeSeries {
    rvec samples;
    double sample_rate_hz = 0.0;
    double duration_s = 0.0;
};

/// Per-tone complex amplitudes at one rectifier input.
struct ReceivedTones {
    cvec amplitudes;  // length N
    FrequencyGrid grid;
};

}  // namespace wpt
