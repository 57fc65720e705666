#include "snb/switching_sim.hpp"

#include "snb/critical.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace snb {

// ---------------------------------------------------------------------------
// Realization
// ---------------------------------------------------------------------------

namespace {

struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;
};

// Controllable canonical form of a proper SISO transfer function.
StateSpace realize(const TransferFunction& tf) {
    const int m = tf.den_degree();
    const double lead = tf.den()[m];
    Eigen::VectorXd a = tf.den() / lead;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m + 1);
    beta.head(tf.num().size()) = tf.num() / lead;

    StateSpace ss;
    ss.D = beta[m];
    ss.A = Eigen::MatrixXd::Zero(m, m);
    ss.B = Eigen::VectorXd::Zero(m);
    ss.C = Eigen::RowVectorXd::Zero(m);
    if (m == 0) {
        return ss;
    }
    ss.A.topRightCorner(m - 1, m - 1).setIdentity();
    for (int i = 0; i < m; ++i) {
        ss.A(m - 1, i) = -a[i];
        ss.C[i] = beta[i] - ss.D * a[i];
    }
    ss.B[m - 1] = 1.0;
    return ss;
}

Eigen::MatrixXd augmented(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
    M.topLeftCorner(n, n) = A;
    M.topRightCorner(n, 1) = b;
    return M;
}

Eigen::VectorXd lift(const Eigen::VectorXd& x) {
    Eigen::VectorXd z(x.size() + 1);
    z.head(x.size()) = x;
    z[x.size()] = 1.0;
    return z;
}

} // namespace

PWLSystem build_pwl(const ConverterSpec& spec) {
    spec.validate();
    const double rho = spec.rho();
    const double L = spec.L;
    const double C = spec.C;
    const double R = spec.R;
    const double Rc = spec.R_c;

    // v_o = rho (v_C + R_c i_L)
    Eigen::RowVector2d vo_p(rho * Rc, rho);
    Eigen::Matrix2d Ap;
    Ap << -rho * Rc / L, -rho / L, (1.0 - rho * Rc / R) / C, -rho / (R * C);
    const Eigen::Vector2d b_on(spec.v_s / L, 0.0);

    PWLSystem sys;
    sys.il_index = 0;
    sys.vc_index = 1;

    if (const auto* vmc = std::get_if<Vmc>(&spec.scheme)) {
        if (dc_gain(vmc->gc).infinite) {
            detail::fail(ErrorCategory::switching_sim, "IntegratingCompensator",
                         "compensators with G_c(0) = infinity are not supported");
        }
        // u = v_r - v_o drives the compensator; y = C_c x_c + D_c u.
        const StateSpace cs = realize(vmc->gc);
        const int m = static_cast<int>(cs.A.rows());
        const int n = 2 + m;
        sys.A1 = Eigen::MatrixXd::Zero(n, n);
        sys.A1.topLeftCorner(2, 2) = Ap;
        if (m > 0) {
            sys.A1.bottomLeftCorner(m, 2) = -cs.B * vo_p;
            sys.A1.bottomRightCorner(m, m) = cs.A;
        }
        sys.A2 = sys.A1;
        sys.b1 = Eigen::VectorXd::Zero(n);
        sys.b1.head(2) = b_on;
        sys.b2 = Eigen::VectorXd::Zero(n);
        if (m > 0) {
            sys.b1.tail(m) = cs.B * spec.v_r;
            sys.b2.tail(m) = cs.B * spec.v_r;
        }
        sys.vo_row = Eigen::RowVectorXd::Zero(n);
        sys.vo_row.head(2) = vo_p;
        sys.feedback_row = Eigen::RowVectorXd::Zero(n);
        sys.feedback_row.head(2) = -cs.D * vo_p;
        if (m > 0) {
            sys.feedback_row.tail(m) = cs.C;
        }
        sys.feedback_offset = cs.D * spec.v_r;
        return sys;
    }

    sys.A1 = Ap;
    sys.A2 = Ap;
    sys.b1 = b_on;
    sys.b2 = Eigen::Vector2d::Zero();
    sys.vo_row = vo_p;
    sys.feedback_offset = spec.v_r;
    if (std::holds_alternative<Cmc>(spec.scheme)) {
        sys.feedback_row = Eigen::RowVector2d(-1.0, 0.0);
    } else if (const auto* sf = std::get_if<StateFeedback>(&spec.scheme)) {
        sys.feedback_row = -sf->k_i * Eigen::RowVector2d(1.0, 0.0) - sf->k_v * vo_p;
    } else {
        detail::fail(ErrorCategory::switching_sim, "UnsupportedScheme",
                     "the switching simulator needs a CMC, state-feedback or VMC scheme");
    }
    return sys;
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

double PeriodicOrbit::spectral_radius() const {
    double r = 0.0;
    for (Eigen::Index i = 0; i < multipliers.size(); ++i) {
        r = std::max(r, std::abs(multipliers[i]));
    }
    return r;
}

double PeriodicOrbit::max_real_multiplier() const {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < multipliers.size(); ++i) {
        const auto mu = multipliers[i];
        if (std::abs(mu.imag()) <= 1e-12 * std::max(1.0, std::abs(mu))) {
            best = std::max(best, mu.real());
        }
    }
    return best;
}

Simulator::Simulator(PWLSystem sys, const ConverterSpec& spec, SimOptions opts)
    : sys_(std::move(sys)), spec_(spec), opts_(opts) {
    if (opts_.checkpoints < 1) {
        detail::fail(ErrorCategory::switching_sim, "InvalidOption", "checkpoints must be positive");
    }
    M1_ = augmented(sys_.A1, sys_.b1);
    M2_ = augmented(sys_.A2, sys_.b2);
    checkpoint_step_ = (M1_ * (spec_.T / opts_.checkpoints)).exp();
}

Simulator::Simulator(const ConverterSpec& spec, SimOptions opts) : Simulator(build_pwl(spec), spec, opts) {}

Eigen::VectorXd Simulator::rest_state() const {
    return Eigen::VectorXd::Zero(sys_.state_dim());
}

Eigen::MatrixXd Simulator::propagator(Stage stage, double tau) const {
    return ((stage == Stage::S1 ? M1_ : M2_) * tau).exp();
}

Eigen::VectorXd Simulator::advance(Stage stage, const Eigen::VectorXd& x, double tau) const {
    if (tau <= 0.0) {
        return x;
    }
    return (propagator(stage, tau) * lift(x)).head(x.size());
}

Eigen::VectorXd Simulator::integral(Stage stage, const Eigen::VectorXd& x, double tau) const {
    if (tau <= 0.0) {
        return Eigen::VectorXd::Zero(x.size());
    }
    // exp([[M, 0], [I, 0]] tau) holds int_0^tau exp(M s) ds in its lower-left block.
    const Eigen::MatrixXd& M = stage == Stage::S1 ? M1_ : M2_;
    const Eigen::Index k = M.rows();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    W.topLeftCorner(k, k) = M;
    W.bottomLeftCorner(k, k).setIdentity();
    const Eigen::MatrixXd E = (W * tau).exp();
    return (E.bottomLeftCorner(k, k) * lift(x)).head(x.size());
}

double Simulator::modulator_gap(const Eigen::VectorXd& x, double t) const {
    return sys_.feedback_row.dot(x) + sys_.feedback_offset - spec_.V_m * t / spec_.T;
}

double Simulator::switching_instant(const Eigen::VectorXd& x0) const {
    const double T = spec_.T;
    if (modulator_gap(x0, 0.0) < 0.0) {
        return 0.0;
    }
    const int K = opts_.checkpoints;
    const double dt = T / K;
    Eigen::VectorXd z = lift(x0);
    double g_prev = modulator_gap(x0, 0.0);
    for (int k = 1; k <= K; ++k) {
        const Eigen::VectorXd z_next = checkpoint_step_ * z;
        const double t_k = k * dt;
        const double g = modulator_gap(z_next.head(x0.size()), t_k);
        if (g <= 0.0) {
            if (g == 0.0) {
                return t_k;
            }
            const double t_prev = (k - 1) * dt;
            const Eigen::VectorXd x_prev = z.head(x0.size());
            auto f = [&](double tau) { return modulator_gap(advance(Stage::S1, x_prev, tau), t_prev + tau); };
            std::uintmax_t max_iter = 200;
            auto tol = [T](double a, double b) { return std::abs(b - a) <= 1e-14 * T; };
            const auto r = boost::math::tools::toms748_solve(f, 0.0, dt, g_prev, g, tol, max_iter);
            return t_prev + 0.5 * (r.first + r.second);
        }
        z = z_next;
        g_prev = g;
    }
    return T;
}

void Simulator::check_dcm(const Eigen::VectorXd& x, double t) const {
    if (opts_.check_dcm && x[sys_.il_index] < 0.0) {
        detail::fail(ErrorCategory::switching_sim, "DCMViolation",
                     "inductor current " + std::to_string(x[sys_.il_index]) + " A < 0 during S2 at t = " +
                         std::to_string(t) + " s (discontinuous conduction is not modelled)");
    }
}

CycleResult Simulator::cycle(const Eigen::VectorXd& x0) const {
    const double T = spec_.T;
    const double d = switching_instant(x0);
    CycleResult out;
    out.duty = d / T;
    Eigen::VectorXd x_d = advance(Stage::S1, x0, d);
    Eigen::VectorXd area = integral(Stage::S1, x0, d);
    if (d < T) {
        out.x_end = advance(Stage::S2, x_d, T - d);
        area += integral(Stage::S2, x_d, T - d);
        check_dcm(out.x_end, T);
    } else {
        out.x_end = x_d;
    }
    out.v_o_avg = sys_.vo_row.dot(area) / T;
    return out;
}

Trajectory Simulator::simulate_cycles(const Eigen::VectorXd& x0, int n) const {
    if (n < 1) {
        detail::fail(ErrorCategory::switching_sim, "InvalidOption", "cycle count must be >= 1");
    }
    Trajectory tr;
    tr.cycle_starts.push_back(x0);
    Eigen::VectorXd x = x0;
    for (int k = 0; k < n; ++k) {
        const CycleResult c = cycle(x);
        tr.duties.push_back(c.duty);
        tr.v_o_avg.push_back(c.v_o_avg);
        x = c.x_end;
        tr.cycle_starts.push_back(x);
    }
    return tr;
}

Eigen::VectorXd Simulator::strobe_map(const Eigen::VectorXd& x) const {
    return cycle(x).x_end;
}

Eigen::MatrixXd Simulator::strobe_jacobian(const Eigen::VectorXd& x) const {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd J(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = std::max(1e-6 * std::abs(x[i]), 1e-9);
        Eigen::VectorXd xp = x;
        Eigen::VectorXd xm = x;
        xp[i] += h;
        xm[i] -= h;
        J.col(i) = (strobe_map(xp) - strobe_map(xm)) / (2.0 * h);
    }
    return J;
}

PeriodicOrbit Simulator::find_orbit(const Eigen::VectorXd& x_guess) const {
    if (!x_guess.allFinite()) {
        detail::fail(ErrorCategory::switching_sim, "InvalidGuess", "initial guess is not finite");
    }
    const Eigen::Index n = x_guess.size();
    Eigen::VectorXd x = x_guess;
    Eigen::VectorXd F = strobe_map(x) - x;
    auto converged = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& FF) {
        return FF.norm() < 1e-11 * (1.0 + xx.norm());
    };
    int it = 0;
    for (; it < 50 && !converged(x, F); ++it) {
        const Eigen::MatrixXd J = strobe_jacobian(x) - Eigen::MatrixXd::Identity(n, n);
        const Eigen::VectorXd step = J.fullPivLu().solve(-F);
        double lambda = 1.0;
        Eigen::VectorXd x_new = x + step;
        Eigen::VectorXd F_new = strobe_map(x_new) - x_new;
        for (int back = 0; back < 12 && F_new.norm() > F.norm(); ++back) {
            lambda *= 0.5;
            x_new = x + lambda * step;
            F_new = strobe_map(x_new) - x_new;
        }
        x = x_new;
        F = F_new;
    }
    if (!converged(x, F)) {
        detail::fail(ErrorCategory::switching_sim, "NoConvergence",
                     "Newton shooting did not converge in 50 iterations (|P(x) - x| = " +
                         std::to_string(F.norm()) + ")");
    }
    PeriodicOrbit orbit;
    orbit.x0 = x;
    orbit.residual = F.norm();
    orbit.iterations = it;
    orbit.duty = cycle(x).duty;
    orbit.saturated = orbit.duty <= 0.0 || orbit.duty >= 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(strobe_jacobian(x), false);
    orbit.multipliers = es.eigenvalues();
    return orbit;
}

Eigen::VectorXd Simulator::orbit_at_duty(double d) const {
    const double T = spec_.T;
    const Eigen::Index n = sys_.state_dim();
    const Eigen::MatrixXd P = propagator(Stage::S2, T - d) * propagator(Stage::S1, d);
    const Eigen::MatrixXd I_minus = Eigen::MatrixXd::Identity(n, n) - P.topLeftCorner(n, n);
    return I_minus.fullPivLu().solve(P.topRightCorner(n, 1));
}

std::vector<TimeSample> Simulator::sample_cycle(const Eigen::VectorXd& x0, int samples, double t0) const {
    const double T = spec_.T;
    const double d = switching_instant(x0);
    const Eigen::VectorXd x_d = advance(Stage::S1, x0, d);
    std::vector<double> times;
    for (int i = 0; i < samples; ++i) {
        times.push_back(T * i / samples);
    }
    if (d > 0.0 && d < T) {
        times.insert(std::upper_bound(times.begin(), times.end(), d), d);
    }
    std::vector<TimeSample> out;
    for (double t : times) {
        TimeSample s;
        const bool on = t < d;
        const Eigen::VectorXd x = on ? advance(Stage::S1, x0, t) : advance(Stage::S2, x_d, t - d);
        s.t = t0 + t;
        s.i_L = x[sys_.il_index];
        s.v_C = x[sys_.vc_index];
        s.y = sys_.feedback_row.dot(x) + sys_.feedback_offset;
        s.h = spec_.V_m * t / T;
        s.stage = on ? Stage::S1 : Stage::S2;
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

const char* to_string(OrbitClass c) {
    switch (c) {
    case OrbitClass::periodic: return "periodic";
    case OrbitClass::saturated_on: return "saturated_on";
    case OrbitClass::saturated_off: return "saturated_off";
    case OrbitClass::nonperiodic: return "nonperiodic";
    }
    return "";
}

SweepResult sweep_hysteresis(const ConverterSpec& spec, double v_s_lo, double v_s_hi, int steps,
                             SweepDirection direction, const SweepOptions& opts,
                             std::optional<Eigen::VectorXd> x_start) {
    if (!(v_s_lo > 0.0) || !(v_s_hi > v_s_lo) || steps < 2) {
        detail::fail(ErrorCategory::config, "InvalidRange",
                     "sweep needs 0 < v_s_lo < v_s_hi and at least two steps");
    }
    SweepResult result;
    result.direction = direction;
    std::vector<double> values;
    for (int i = 0; i < steps; ++i) {
        values.push_back(v_s_lo + (v_s_hi - v_s_lo) * i / (steps - 1));
    }
    if (direction == SweepDirection::down) {
        std::reverse(values.begin(), values.end());
    }

    Eigen::VectorXd state_carry;
    bool have_state = false;
    if (x_start) {
        state_carry = *x_start;
        have_state = true;
    }
    for (double v : values) {
        ConverterSpec sv = spec;
        sv.v_s = v;
        const Simulator sim(sv, opts.sim);
        Eigen::VectorXd state = have_state ? state_carry : sim.rest_state();
        for (int k = 0; k < opts.settle_cycles; ++k) {
            state = sim.cycle(state).x_end;
        }
        const CycleResult last = sim.cycle(state);
        SweepRecord rec;
        rec.v_s = v;
        rec.v_o_avg = last.v_o_avg;
        rec.duty = last.duty;
        if (last.duty >= 1.0) {
            rec.classification = OrbitClass::saturated_on;
        } else if (last.duty <= 0.0) {
            rec.classification = OrbitClass::saturated_off;
        } else if ((last.x_end - state).norm() <= 1e-6 * (1.0 + state.norm())) {
            rec.classification = OrbitClass::periodic;
        } else {
            rec.classification = OrbitClass::nonperiodic;
        }
        result.records.push_back(rec);
        state_carry = last.x_end;
        have_state = true;
    }

    for (std::size_t i = 1; i < result.records.size(); ++i) {
        const SweepRecord& a = result.records[i - 1];
        const SweepRecord& b = result.records[i];
        const double scale = std::max({std::abs(a.v_o_avg), std::abs(b.v_o_avg), 1e-12});
        const bool saturation_change =
            (a.classification == OrbitClass::saturated_on) != (b.classification == OrbitClass::saturated_on);
        if (std::abs(b.v_o_avg - a.v_o_avg) > opts.jump_threshold * scale || saturation_change) {
            result.jumps.push_back({a.v_s, b.v_s, a.v_o_avg, b.v_o_avg});
        }
    }
    return result;
}

std::vector<BranchPoint> branch_curve(const ConverterSpec& spec, const std::vector<double>& d_grid, SimOptions opts) {
    const HarmonicBalanceModel model(spec);
    std::vector<BranchPoint> out;
    for (double d : d_grid) {
        BranchPoint bp;
        bp.d = d;
        bp.D = d / spec.T;
        try {
            bp.v_s = model.vs_of_d(d);
            ConverterSpec sv = spec;
            sv.v_s = bp.v_s;
            const Simulator sim(sv, opts);
            const PeriodicOrbit orbit = sim.find_orbit(sim.orbit_at_duty(d));
            bp.v_o = sim.cycle(orbit.x0).v_o_avg;
            bp.duty_sim = orbit.duty;
            bp.spectral_radius = orbit.spectral_radius();
            bp.max_real_multiplier = orbit.max_real_multiplier();
            bp.duty_mismatch = std::abs(orbit.duty - bp.D) > 1e-3;
            bp.converged = true;
        } catch (const Error&) {
            bp.converged = false;
        }
        out.push_back(bp);
    }
    return out;
}

} // namespace snb
