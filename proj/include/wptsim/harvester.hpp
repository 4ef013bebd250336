#pragma once

#include <optional>
#include <vector>

#include "wptsim/types.hpp"

namespace wpt {

/// Diode/antenna constants of the truncated rectifier model. The Taylor
/// coefficients follow beta_i = r_ant^(i/2) / (i! * (ideality*v_t)^(i-1)).
struct RectennaParams {
    double r_ant_ohm = 50.0;
    double v_t_volt = 0.02586;
    double ideality = 1.05;
    double r_load_ohm = 10e3;
    /// Input power above which the diode is reverse biased; when set, v_out
    /// is clamped at its value for a signal of the same shape scaled to this
    /// input power.
    std::optional<double> breakdown_power_w{};

    double beta2() const;
    double beta4() const;
    void validate() const;
};

/// Average RF input power E[y^2] = sum |Y_n|^2.
double second_moment(const Eigen::Ref<const cvec>& tones);
double second_moment(const ReceivedTones& tones);

/// Exact DC component of y(t)^4 for y = sqrt(2)*Re{sum Y_n e^(j2pi f_n t)}.
/// On an equispaced grid the only zero-net-frequency quadruples satisfy
/// n0 + n1 = n2 + n3, giving (3/2) * sum_s |C_s|^2 with C the
/// self-convolution of the tone vector.
double fourth_moment(const Eigen::Ref<const cvec>& tones);
double fourth_moment(const ReceivedTones& tones);

/// Rectifier output DC voltage beta2*E[y^2] + beta4*E[y^4], with the
/// optional breakdown clamp applied.
double v_out(const ReceivedTones& tones, const RectennaParams& params);

/// Harvested DC power v_out^2 / r_load.
double p_dc(const ReceivedTones& tones, const RectennaParams& params);

/// RF-to-DC conversion efficiency p_dc / E[y^2]; rejects zero input.
double e3(const ReceivedTones& tones, const RectennaParams& params);

/// One rectifier per antenna, outputs added in DC: sum_q v_out_q^2 / r_load.
double dc_combine(const std::vector<ReceivedTones>& per_antenna,
                  const RectennaParams& params);

/// Single rectifier fed by the analogue-combined signal
/// Z_n = sum_q conj(w_q) Y_{q,n}; the passive combiner must satisfy
/// ||w||^2 <= 1.
double rf_combine(const cmat& per_antenna_tones, const cvec& combiner,
                  const FrequencyGrid& grid, const RectennaParams& params);

/// Link efficiency ledger e = e1*e2*e3*e4 (DC-to-RF, RF-to-RF, RF-to-DC,
/// DC-to-DC).
struct EfficiencyChain {
    double e1 = 1.0;
    double e2 = 1.0;
    double e3 = 1.0;
    double e4 = 1.0;
    double end_to_end() const { return e1 * e2 * e3 * e4; }
};

struct ReceiverConfig {
    enum class Combining { Dc, Rf };
    Combining combining = Combining::Dc;
    RectennaParams rectenna{};
    /// RF combiner weights; identity-like default (all power to antenna 0)
    /// when empty and combining == Rf.
    cvec rf_weights{};
    double e1 = 1.0;
    double e4 = 1.0;
};

class ChannelState;  // defined in channel.hpp

/// Builds the ledger for a transmit DC power p_dc_t, a precoder whose power
/// must equal e1*p_dc_t, and a receive chain. e2 is computed from the channel
/// as P_rf^r / P_rf^t; e3 from the harvester model.
EfficiencyChain efficiency_chain(double p_dc_t_w, const Precoder& precoder,
                                 const ChannelState& channel,
                                 const ReceiverConfig& config);

}  // namespace wpt
