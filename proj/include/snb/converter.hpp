#pragma once

// Buck converter parameters, control schemes and the loop transfer functions
// built from them.

#include "snb/rational_tf.hpp"

#include <numbers>
#include <optional>
#include <variant>

namespace snb {

/// Voltage-mode control: y = G_c(s) (v_r - v_o).
struct Vmc {
    TransferFunction gc;
};

/// Peak current-mode control: y = i_c - i_L, with i_c carried in v_r.
struct Cmc {};

/// Multi-loop state feedback: y = v_r - k_i i_L - k_v v_o.
struct StateFeedback {
    double k_i = 0.0;
    double k_v = 0.0;
};

/// Arbitrary loop: y = dc_offset_gain * v_r - F(s) v_d.
struct Custom {
    TransferFunction f;
    double dc_offset_gain = 1.0;
};

using ControlScheme = std::variant<Vmc, Cmc, StateFeedback, Custom>;

struct ConverterSpec {
    double v_s = 0.0;  ///< source voltage [V]
    double R = 0.0;    ///< load [ohm]
    double L = 0.0;    ///< inductance [H]
    double C = 0.0;    ///< capacitance [F]
    double R_c = 0.0;  ///< capacitor ESR [ohm]
    double T = 0.0;    ///< switching period [s]
    double V_m = 0.0;  ///< ramp amplitude [V]
    double v_r = 0.0;  ///< reference [V] (i_c [A] under CMC)
    ControlScheme scheme = StateFeedback{};

    [[nodiscard]] double omega_s() const noexcept { return 2.0 * std::numbers::pi / T; }
    /// Ramp slope m_a = V_m / T.
    [[nodiscard]] double ramp_slope() const noexcept { return V_m / T; }
    /// Dimensionless load parameter K = 2L / (R T).
    [[nodiscard]] double K() const noexcept { return 2.0 * L / (R * T); }
    [[nodiscard]] double rho() const noexcept { return R / (R + R_c); }
    /// Ramp h(t) = V_m * frac(t / T).
    [[nodiscard]] double ramp(double t) const noexcept;

    /// Throws ErrorCategory::config on violated physical invariants.
    void validate() const;
};

enum class PowerStageOutput { vo, iL };

/// v_d-to-v_o or v_d-to-i_L transfer function of the (ESR-including) buck
/// power stage.
[[nodiscard]] TransferFunction make_power_stage(const ConverterSpec& spec, PowerStageOutput output);

/// G(s) from v_d to the modulator input (y = offset_gain * v_r - G v_d),
/// and the loop gain T(s) = v_s G(s) / V_m when V_m > 0.
struct LoopGain {
    TransferFunction G;
    /// Empty when V_m = 0: the loop gain is infinite and only the
    /// slope-form criterion applies.
    std::optional<TransferFunction> loop;
    /// Coefficient of v_r in the steady-state modulator input (G_c(0) for VMC).
    double offset_gain = 1.0;

    [[nodiscard]] bool infinite_gain() const noexcept { return !loop.has_value(); }
};

[[nodiscard]] LoopGain build_loop_gain(const ConverterSpec& spec);

} // namespace snb
