#pragma once

// Time-domain model of the switched converter. Each stage is linear
// (x' = A x + b_k), so stage segments are propagated exactly with matrix
// exponentials and the only numerical error left is the location of the
// switching instant.

#include "snb/converter.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace snb {

/// Piecewise-linear closed loop. Stage S1 (switch on, v_d = v_s) has
/// dynamics x' = A1 x + b1, stage S2 (v_d = 0) x' = A2 x + b2. The
/// modulator input is y = feedback_row x + feedback_offset.
struct PWLSystem {
    Eigen::MatrixXd A1;
    Eigen::MatrixXd A2;
    Eigen::VectorXd b1;
    Eigen::VectorXd b2;
    Eigen::RowVectorXd feedback_row;
    double feedback_offset = 0.0;
    /// v_o = vo_row x.
    Eigen::RowVectorXd vo_row;
    int il_index = 0;
    int vc_index = 1;

    [[nodiscard]] int state_dim() const noexcept { return static_cast<int>(A1.rows()); }
};

/// State (i_L, v_C[, compensator states]). Supports CMC, state feedback and
/// VMC with a proper compensator.
[[nodiscard]] PWLSystem build_pwl(const ConverterSpec& spec);

enum class Stage { S1, S2 };

struct SimOptions {
    /// Sign checks of y - h per cycle before refining the first crossing.
    int checkpoints = 64;
    /// Raise DCMViolation if i_L < 0 during S2.
    bool check_dcm = true;
};

struct CycleResult {
    Eigen::VectorXd x_end;
    double duty = 0.0;  ///< in [0, 1]
    double v_o_avg = 0.0;
};

struct Trajectory {
    std::vector<Eigen::VectorXd> cycle_starts;  ///< n + 1 states
    std::vector<double> duties;                 ///< n duties
    std::vector<double> v_o_avg;                ///< per-cycle mean output voltage
};

struct TimeSample {
    double t = 0.0;
    double i_L = 0.0;
    double v_C = 0.0;
    double y = 0.0;
    double h = 0.0;
    Stage stage = Stage::S1;
};

struct PeriodicOrbit {
    Eigen::VectorXd x0;
    double duty = 0.0;
    Eigen::VectorXcd multipliers;
    double residual = 0.0;
    bool saturated = false;
    int iterations = 0;

    [[nodiscard]] double spectral_radius() const;
    /// Largest real multiplier (ignoring complex pairs); -inf if none.
    [[nodiscard]] double max_real_multiplier() const;
    [[nodiscard]] bool stable() const { return spectral_radius() < 1.0; }
};

class Simulator {
public:
    Simulator(PWLSystem sys, const ConverterSpec& spec, SimOptions opts = {});
    explicit Simulator(const ConverterSpec& spec, SimOptions opts = {});

    [[nodiscard]] const PWLSystem& system() const noexcept { return sys_; }
    [[nodiscard]] const ConverterSpec& spec() const noexcept { return spec_; }

    /// One period from x0: S1 until the first downward crossing of y - h,
    /// then S2 to the end of the period.
    [[nodiscard]] CycleResult cycle(const Eigen::VectorXd& x0) const;
    [[nodiscard]] Trajectory simulate_cycles(const Eigen::VectorXd& x0, int n) const;
    /// State after exactly one period.
    [[nodiscard]] Eigen::VectorXd strobe_map(const Eigen::VectorXd& x) const;
    /// Central-difference Jacobian of the stroboscopic map.
    [[nodiscard]] Eigen::MatrixXd strobe_jacobian(const Eigen::VectorXd& x) const;
    /// Newton shooting on P(x) - x; reaches unstable orbits too.
    [[nodiscard]] PeriodicOrbit find_orbit(const Eigen::VectorXd& x_guess) const;
    /// Periodic state for a prescribed switching instant d (ignores the
    /// modulator). Coincides with a true orbit when d is a steady state.
    [[nodiscard]] Eigen::VectorXd orbit_at_duty(double d) const;
    /// Uniformly spaced samples over one period (plus the switching instant).
    [[nodiscard]] std::vector<TimeSample> sample_cycle(const Eigen::VectorXd& x0, int samples, double t0 = 0.0) const;

    [[nodiscard]] Eigen::VectorXd rest_state() const;

private:
    [[nodiscard]] Eigen::MatrixXd propagator(Stage stage, double tau) const;
    [[nodiscard]] Eigen::VectorXd advance(Stage stage, const Eigen::VectorXd& x, double tau) const;
    /// Integral of x over [0, tau] along one stage.
    [[nodiscard]] Eigen::VectorXd integral(Stage stage, const Eigen::VectorXd& x, double tau) const;
    [[nodiscard]] double modulator_gap(const Eigen::VectorXd& x, double t) const;
    [[nodiscard]] double switching_instant(const Eigen::VectorXd& x0) const;
    void check_dcm(const Eigen::VectorXd& x, double t) const;

    PWLSystem sys_;
    ConverterSpec spec_;
    SimOptions opts_;
    Eigen::MatrixXd M1_;  // augmented [A b; 0 0]
    Eigen::MatrixXd M2_;
    Eigen::MatrixXd checkpoint_step_;
};

enum class OrbitClass { periodic, saturated_on, saturated_off, nonperiodic };

[[nodiscard]] const char* to_string(OrbitClass c);

struct SweepRecord {
    double v_s = 0.0;
    double v_o_avg = 0.0;
    double duty = 0.0;
    OrbitClass classification = OrbitClass::nonperiodic;
};

struct JumpEdge {
    double v_s_from = 0.0;
    double v_s_to = 0.0;
    double v_o_from = 0.0;
    double v_o_to = 0.0;
};

enum class SweepDirection { up, down };

struct SweepOptions {
    int settle_cycles = 400;
    /// Relative v_o change between consecutive steps that counts as a jump.
    double jump_threshold = 0.25;
    SimOptions sim;
};

struct SweepResult {
    SweepDirection direction = SweepDirection::up;
    std::vector<SweepRecord> records;
    std::vector<JumpEdge> jumps;
};

/// Quasi-static v_s sweep: every step starts from the previous settled state
/// (the first from rest or from `x_start`).
[[nodiscard]] SweepResult sweep_hysteresis(const ConverterSpec& spec, double v_s_lo, double v_s_hi, int steps,
                                           SweepDirection direction, const SweepOptions& opts = {},
                                           std::optional<Eigen::VectorXd> x_start = std::nullopt);

struct BranchPoint {
    double d = 0.0;
    double D = 0.0;
    double v_s = 0.0;
    double v_o = 0.0;  ///< period-average output voltage
    double duty_sim = 0.0;
    double spectral_radius = 0.0;
    double max_real_multiplier = 0.0;
    bool duty_mismatch = false;
    bool converged = false;
};

/// Steady-state branch parameterized by the switching instant: v_s comes
/// from the harmonic balance, the orbit from Newton shooting seeded at the
/// prescribed-duty periodic state.
[[nodiscard]] std::vector<BranchPoint> branch_curve(const ConverterSpec& spec, const std::vector<double>& d_grid,
                                                    SimOptions opts = {});

} // namespace snb
