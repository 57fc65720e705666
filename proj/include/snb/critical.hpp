#pragma once

// Steady-state balance and saddle-node (fold) conditions for the PWM loop.
//
// With the switching instant d = D T, a T-periodic solution satisfies
//
//   offset_gain v_r - v_s S(d) - h(d) = 0,
//   S(d) = D G(0) + 2 sum_{n>=1} Re[(e^{j 2 pi n D} - 1) / (j 2 pi n) G(j n w_s)],
//
// which gives v_s as a function of d. The fold (tangency of the compensator
// output with the ramp) is where the slope-form criterion
//
//   -(2 v_s / T) Re sum_{n>=1} e^{j 2 pi n D} G(j n w_s) - v_s G(0) / T = m_a
//
// holds; its left side, read along v_s(d), is the S-plot.

#include "snb/converter.hpp"
#include "snb/spectral_series.hpp"

#include <optional>
#include <string>
#include <vector>

namespace snb {

inline constexpr long kDefaultSeriesTerms = 20000;
inline constexpr int kDefaultDutyGrid = 2000;

enum class StabilityHint { stable, unstable, boundary, hole };

[[nodiscard]] const char* to_string(StabilityHint h);

struct HBPoint {
    double d = 0.0;  ///< switching instant [s]
    double D = 0.0;  ///< d / T
    /// Empty where the balance denominator vanishes (branch asymptote).
    std::optional<double> v_s_implied;
    std::optional<double> s_value;  ///< [V/s]
    double steady_residual = 0.0;  ///< steady-state imbalance at (d, v_s_implied) [V]
    StabilityHint stable_hint = StabilityHint::hole;
};

enum class SnbMethod { exact_series, approx_slope, approx_duty, cmc_closed_form };

[[nodiscard]] const char* to_string(SnbMethod m);

struct SNBSolution {
    double d_star = 0.0;
    double D_star = 0.0;
    double v_s_star = 0.0;
    SnbMethod method = SnbMethod::exact_series;
    double m_a_used = 0.0;
    double steady_residual = 0.0;
    double fold_residual = 0.0;
};

struct SeriesOptions {
    long terms = kDefaultSeriesTerms;
};

/// Per-converter harmonic data shared by every steady-state evaluation. Holds the
/// loop gain and its sampled spectrum; cheap to query at many duty values.
class HarmonicBalanceModel {
public:
    explicit HarmonicBalanceModel(const ConverterSpec& spec, SeriesOptions opts = {});

    [[nodiscard]] const ConverterSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const LoopGain& loop_gain() const noexcept { return loop_; }
    [[nodiscard]] const SpectralSeries& series() const noexcept { return series_; }

    /// S(d): the v_s coefficient in the steady-state balance.
    [[nodiscard]] double balance_denominator(double d) const;
    /// Steady-state imbalance at (d, v_s) [V].
    [[nodiscard]] double steady_residual(double d, double v_s) const;
    /// v_s making d a steady-state switching instant. Throws DenominatorZero.
    [[nodiscard]] double vs_of_d(double d) const;
    /// Slope-form criterion left side [V/s]; uses the exact G.
    [[nodiscard]] double snb_lhs(double d, double v_s) const;
    /// Same, with the harmonic sum taken over `approx_G` in closed form while
    /// G(0) stays exact.
    [[nodiscard]] double snb_lhs(double d, double v_s, const TransferFunction& approx_G) const;
    /// F[T] along the branch, i.e. the L-plot ordinate; requires V_m > 0.
    [[nodiscard]] double l_value(double d, double v_s) const;

    [[nodiscard]] HBPoint point(double d) const;

private:
    void check_d(double d) const;

    ConverterSpec spec_;
    LoopGain loop_;
    SpectralSeries series_;
};

[[nodiscard]] double steady_residual(const ConverterSpec& spec, double d, double v_s);
[[nodiscard]] double vs_of_d(const ConverterSpec& spec, double d);
[[nodiscard]] double snb_lhs(const ConverterSpec& spec, double d, double v_s);

struct FindSnbOptions {
    int grid = kDefaultDutyGrid;
    long series_terms = kDefaultSeriesTerms;
    /// Grid doublings allowed while the root count keeps changing.
    int max_refinements = 4;
};

/// All folds with v_s* > 0 along the steady-state branch, in increasing d.
/// An empty result means no fold in (0, T).
[[nodiscard]] std::vector<SNBSolution> find_snb(const ConverterSpec& spec, const FindSnbOptions& opts = {});
[[nodiscard]] std::vector<SNBSolution> find_snb(const HarmonicBalanceModel& model, const FindSnbOptions& opts = {});

[[nodiscard]] std::vector<HBPoint> s_curve(const HarmonicBalanceModel& model, const std::vector<double>& d_grid);
[[nodiscard]] std::vector<HBPoint> s_curve(const ConverterSpec& spec, const std::vector<double>& d_grid);

/// n points strictly inside (0, T), centred in equal cells.
[[nodiscard]] std::vector<double> duty_grid(double T, int n, double D_lo = 0.0, double D_hi = 1.0);

struct RampRequirement {
    double m_a_min = 0.0;  ///< [V/s]
    double d_at_max = 0.0;
};

/// Maximum of the S-plot over the physical (v_s > 0) part of the branch.
[[nodiscard]] RampRequirement min_stabilizing_ramp(const HarmonicBalanceModel& model, int grid = kDefaultDutyGrid);
[[nodiscard]] RampRequirement min_stabilizing_ramp(const ConverterSpec& spec, int grid = kDefaultDutyGrid);

/// Closed-form results for multi-loop state feedback, with the loop gain
/// approximated by v_s/V_m (k_i/(L s) + k_v/(L C s^2)). CMC is the case
/// k_i = 1, k_v = 0.
class StateFeedbackClosedForm {
public:
    explicit StateFeedbackClosedForm(const ConverterSpec& spec);
    StateFeedbackClosedForm(const ConverterSpec& spec, double k_i, double k_v);

    /// Approximate S-plot including the T^2/(12 L C) ripple term [V/s].
    [[nodiscard]] double approx_lhs(double D) const;
    [[nodiscard]] double approx_lhs(double D, double v_s) const;
    /// Critical duty with the ripple term dropped. Throws when k_i = 0.
    [[nodiscard]] double critical_duty() const;
    /// T^2 / (12 L C); the ripple term is negligible when this is small.
    [[nodiscard]] double ripple_ratio() const noexcept;
    [[nodiscard]] bool critical_duty_valid() const noexcept { return ripple_ratio() <= 0.05; }
    /// High-frequency loop-gain approximation G_hf = k_i/(L s) + k_v/(L C s^2).
    [[nodiscard]] TransferFunction high_frequency_G() const;

    [[nodiscard]] double k_i() const noexcept { return k_i_; }
    [[nodiscard]] double k_v() const noexcept { return k_v_; }

private:
    ConverterSpec spec_;
    double k_i_;
    double k_v_;
};

struct CmcClosedForm {
    double duty = 0.0;
    /// False when the predicted duty is >= 1 (no fold in the valid range).
    bool in_range = false;
};

/// D* = (K + 1)/2 + L m_a / v_s.
[[nodiscard]] CmcClosedForm closed_form_cmc(const ConverterSpec& spec);

/// Names accepted by set_parameter: v_s R L C R_c T V_m v_r k_i k_v.
void set_parameter(ConverterSpec& spec, const std::string& name, double value);
[[nodiscard]] double get_parameter(const ConverterSpec& spec, const std::string& name);

struct SweepAxis {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    int points = 10;
};

struct BoundaryPoint {
    double x = 0.0;
    std::optional<double> y;  ///< empty for a column without a crossing
    std::string stable_side;  ///< "below" / "above" in y, empty for gaps
};

/// SNB boundary in the (x, y) parameter plane. With y = v_s the critical
/// value is the fold voltage itself; otherwise y is solved so that the fold
/// voltage equals the converter's v_s.
[[nodiscard]] std::vector<BoundaryPoint> trace_boundary(const ConverterSpec& spec, const SweepAxis& x,
                                                        const SweepAxis& y, const FindSnbOptions& opts = {});

} // namespace snb
