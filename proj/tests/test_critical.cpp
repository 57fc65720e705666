#include "snb/critical.hpp"
#include "snb/error.hpp"
#include "snb/harmonic_balance.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace snb;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

bool throws_kind(auto&& fn, const std::string& kind) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind() == kind;
    }
    return false;
}

ConverterSpec example_spec() {
    ConverterSpec s;
    s.v_s = 20.0;
    s.R = 22.0;
    s.L = 20e-3;
    s.C = 47e-6;
    s.T = 400e-6;
    s.V_m = 1.0;
    s.v_r = 0.2152;
    s.scheme = StateFeedback{2.1435, -0.1383};
    return s;
}

ConverterSpec cmc_spec() {
    ConverterSpec s;
    s.v_s = 10.0;
    s.R = 40.0;
    s.L = 100e-6;
    s.C = 100e-6;
    s.T = 10e-6;
    s.V_m = 0.1;
    s.v_r = 0.36125;
    s.scheme = Cmc{};
    return s;
}

const HarmonicBalanceModel& example_model() {
    static const HarmonicBalanceModel model(example_spec());
    return model;
}

} // namespace

TEST_CASE("steady-state branch round trip", "[critical]") {
    const HarmonicBalanceModel& m = example_model();
    const double T = m.spec().T;
    for (double D : {0.2, 0.45, 0.7, 0.9}) {
        const double v = m.vs_of_d(D * T);
        CHECK(std::abs(m.steady_residual(D * T, v)) < 1e-12);
        const HBPoint p = m.point(D * T);
        REQUIRE(p.v_s_implied);
        CHECK_THAT(*p.v_s_implied, WithinRel(v, 1e-12));
        CHECK_THAT(*p.s_value, WithinRel(m.snb_lhs(D * T, v), 1e-12));
    }
    CHECK(throws_kind([&] { (void)m.point(0.0); }, "DomainError"));
    CHECK(throws_kind([&] { (void)m.point(T); }, "DomainError"));
}

TEST_CASE("reference design fold", "[critical]") {
    const auto folds = find_snb(example_model());
    REQUIRE(folds.size() == 1);
    const SNBSolution& f = folds.front();
    CHECK(f.method == SnbMethod::exact_series);
    CHECK_THAT(f.v_s_star, WithinRel(20.0, 0.01));
    CHECK_THAT(f.D_star, WithinAbs(0.70, 0.005));
    // Independent plain-summation prototype of the same balance.
    CHECK_THAT(f.D_star, WithinAbs(0.7035, 5e-4));
    CHECK_THAT(f.v_s_star, WithinAbs(19.971, 2e-3));
    CHECK(std::abs(f.steady_residual) < 1e-9);
    CHECK(std::abs(f.fold_residual) < 1e-6 * f.m_a_used);

    // The fold is the turning point of v_s(d).
    const double h = 1e-4 * example_spec().T;
    const double slope = (example_model().vs_of_d(f.d_star + h) - example_model().vs_of_d(f.d_star - h)) / (2.0 * h);
    const double scale = (example_model().vs_of_d(0.8 * example_spec().T) - example_model().vs_of_d(0.6 * example_spec().T)) /
                         (0.2 * example_spec().T);
    CHECK(std::abs(slope) < 1e-3 * std::abs(scale) + 1e-9);
}

TEST_CASE("S-plot crosses the ramp slope at the fold", "[critical]") {
    const ConverterSpec s = example_spec();
    const auto pts = s_curve(example_model(), duty_grid(s.T, 400));
    std::optional<double> crossing;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i].s_value && pts[i + 1].s_value && (*pts[i].s_value - 2500.0) * (*pts[i + 1].s_value - 2500.0) < 0.0) {
            crossing = 0.5 * (pts[i].D + pts[i + 1].D);
            CHECK(pts[i].stable_hint == StabilityHint::stable);
            CHECK(pts[i + 1].stable_hint == StabilityHint::unstable);
        }
    }
    REQUIRE(crossing);
    CHECK_THAT(*crossing, WithinAbs(0.70, 0.005));

    const RampRequirement ramp = min_stabilizing_ramp(example_model());
    CHECK_THAT(ramp.m_a_min, WithinRel(2898.0, 0.02));
}

TEST_CASE("closed forms for state feedback", "[critical]") {
    const ConverterSpec s = example_spec();
    const StateFeedbackClosedForm cf(s);
    CHECK_THAT(cf.critical_duty(), WithinAbs(0.713, 0.001));
    CHECK(cf.critical_duty_valid());
    CHECK_THAT(cf.ripple_ratio(), WithinRel(s.T * s.T / (12.0 * s.L * s.C), 1e-15));
    const auto folds = find_snb(example_model());
    REQUIRE_FALSE(folds.empty());
    CHECK(std::abs(cf.critical_duty() - folds.front().D_star) < 0.015);

    // The approximate S-plot tracks the exact one.
    CHECK_THAT(cf.approx_lhs(0.7, 20.0), WithinRel(2497.6, 1e-3));
    for (double D : {0.3, 0.5, 0.7, 0.9}) {
        const double exact = example_model().snb_lhs(D * s.T, 20.0);
        CHECK(std::abs(cf.approx_lhs(D, 20.0) - exact) < 0.01 * std::abs(exact) + 5.0);
        // Same thing through the transform of the high-frequency loop gain.
        const double via_transform = example_model().snb_lhs(D * s.T, 20.0, cf.high_frequency_G());
        CHECK_THAT(via_transform, WithinRel(cf.approx_lhs(D, 20.0), 1e-9));
    }

    ConverterSpec z = s;
    z.scheme = StateFeedback{0.0, 0.5};
    CHECK(throws_kind([&] { (void)StateFeedbackClosedForm(z).critical_duty(); }, "ZeroCurrentGain"));
    ConverterSpec v = s;
    v.scheme = Vmc{TransferFunction::constant(2.0)};
    CHECK(throws_kind([&] { (void)StateFeedbackClosedForm(v); }, "UnsupportedScheme"));
}

TEST_CASE("slope form equals the loop-gain form", "[critical][property]") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        ConverterSpec s = example_spec();
        s.L *= 0.5 + u(rng);
        s.C *= 0.5 + u(rng);
        s.R *= 0.5 + u(rng);
        s.V_m = 0.2 + 2.0 * u(rng);
        const double k_i = 0.5 + 3.0 * u(rng);
        const double k_v = -0.3 + 0.6 * u(rng);
        const double D = 0.05 + 0.9 * u(rng);
        const double v_s = 5.0 + 30.0 * u(rng);
        const double w = s.omega_s();
        const double m_a = s.ramp_slope();

        const double lhs_loop = (v_s / s.V_m) * (k_i * alpha_taylor(D, 0) / (s.L * w) +
                                                k_v * alpha_taylor(D, 1) / (s.L * s.C * w * w));
        const double rhs_loop = (v_s / s.V_m) * (k_i / s.R + k_v) + 1.0;
        const double slope = StateFeedbackClosedForm(s, k_i, k_v).approx_lhs(D, v_s);
        CHECK_THAT(m_a * (lhs_loop - rhs_loop + 1.0), WithinRel(slope, 1e-10));
    }
}

TEST_CASE("L-plot and S-plot describe the same criterion", "[critical]") {
    const HarmonicBalanceModel& m = example_model();
    const ConverterSpec s = example_spec();
    for (double D : {0.4, 0.7, 0.85}) {
        const double d = D * s.T;
        const double v = m.vs_of_d(d);
        const double t0 = (v / s.V_m) * (2.1435 / 22.0 - 0.1383);
        CHECK_THAT(m.snb_lhs(d, v), WithinRel(s.ramp_slope() * (m.l_value(d, v) - t0), 1e-10));
    }
    ConverterSpec z = s;
    z.V_m = 0.0;
    const HarmonicBalanceModel mz(z);
    CHECK(throws_kind([&] { (void)mz.l_value(0.5 * z.T, 10.0); }, "InfiniteLoopGain"));
}

TEST_CASE("current-mode fold", "[critical]") {
    const ConverterSpec s = cmc_spec();
    CHECK_THAT(s.K(), WithinRel(0.5, 1e-12));
    const CmcClosedForm cf = closed_form_cmc(s);
    CHECK_THAT(cf.duty, WithinAbs(0.85, 1e-12));
    CHECK(cf.in_range);
    const auto folds = find_snb(s);
    REQUIRE(folds.size() == 1);
    CHECK_THAT(folds.front().D_star, WithinAbs(0.85, 0.01));
    CHECK_THAT(folds.front().v_s_star, WithinRel(10.0, 0.01));

    ConverterSpec steep = s;
    steep.V_m = 1.0;
    CHECK_FALSE(closed_form_cmc(steep).in_range);
}

TEST_CASE("open loop has no fold", "[critical]") {
    ConverterSpec s = example_spec();
    s.scheme = Custom{TransferFunction::constant(0.0), 1.0};
    const HarmonicBalanceModel m(s);
    const HBPoint p = m.point(0.5 * s.T);
    REQUIRE(p.s_value);
    CHECK(*p.s_value == 0.0);
    CHECK(find_snb(m).empty());
}

TEST_CASE("custom loop reproduces the built-in scheme", "[critical]") {
    ConverterSpec s = example_spec();
    const LoopGain lg = build_loop_gain(s);
    ConverterSpec c = s;
    c.scheme = Custom{lg.G, 1.0};
    FindSnbOptions o;
    o.grid = 400;
    o.series_terms = 4000;
    const auto a = find_snb(s, o);
    const auto b = find_snb(c, o);
    REQUIRE(a.size() == b.size());
    REQUIRE_FALSE(a.empty());
    CHECK_THAT(b.front().D_star, WithinAbs(a.front().D_star, 1e-12));
}

TEST_CASE("voltage-mode loop is analysable", "[critical]") {
    ConverterSpec s = example_spec();
    s.v_r = 5.0;
    s.V_m = 2.0;
    s.scheme = Vmc{TransferFunction({0.8, 4e-4}, {1.0, 2e-5})};
    const HarmonicBalanceModel m(s, {4000});
    for (const HBPoint& p : s_curve(m, duty_grid(s.T, 50))) {
        if (p.v_s_implied) {
            CHECK(std::isfinite(*p.s_value));
            CHECK(std::abs(p.steady_residual) < 1e-9);
        }
    }
}

TEST_CASE("parameter access", "[critical]") {
    ConverterSpec s = example_spec();
    for (const char* name : {"v_s", "R", "L", "C", "R_c", "T", "V_m", "v_r", "k_i", "k_v"}) {
        set_parameter(s, name, 0.125);
        CHECK(get_parameter(s, name) == 0.125);
    }
    CHECK(throws_kind([&] { set_parameter(s, "Q", 1.0); }, "UnknownParameter"));
    ConverterSpec c = cmc_spec();
    CHECK(throws_kind([&] { set_parameter(c, "k_v", 1.0); }, "UnknownParameter"));
}

TEST_CASE("duty grid is cell-centred", "[critical]") {
    const auto g = duty_grid(1.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g.front() == 0.125);
    CHECK(g.back() == 0.875);
    const auto h = duty_grid(2.0, 2, 0.5, 1.0);
    CHECK(h.front() == 1.25);
}

TEST_CASE("boundary in the (V_m, v_s) plane", "[critical]") {
    const ConverterSpec s = example_spec();
    FindSnbOptions o;
    o.grid = 400;
    o.series_terms = 4000;
    const auto pts = trace_boundary(s, {"V_m", 0.8, 1.2, 3}, {"v_s", 5.0, 40.0, 2}, o);
    REQUIRE(pts.size() == 3);
    for (const BoundaryPoint& p : pts) {
        REQUIRE(p.y);
        CHECK(p.stable_side == "below");
    }
    CHECK_THAT(*pts[1].y, WithinRel(19.971, 1e-3));
    CHECK(*pts[0].y < *pts[1].y);
    CHECK(*pts[1].y < *pts[2].y);

    // Solving for the ramp amplitude that puts the fold at the operating v_s.
    const auto ramp = trace_boundary(s, {"R", 22.0, 23.0, 2}, {"V_m", 0.5, 1.5, 5}, o);
    REQUIRE(ramp.size() == 2);
    REQUIRE(ramp[0].y);
    const double vm = *ramp[0].y;
    ConverterSpec at = s;
    at.V_m = vm;
    const auto f = find_snb(at, o);
    REQUIRE_FALSE(f.empty());
    CHECK_THAT(f.front().v_s_star, WithinRel(s.v_s, 1e-6));
    // Raising the ramp moves the fold up, so operation at v_s is stable above it.
    CHECK(ramp[0].stable_side == "above");

    CHECK(throws_kind([&] { (void)trace_boundary(s, {"V_m", 1.0, 0.5, 3}, {"v_s", 5.0, 40.0, 2}, o); },
                      "InvalidRange"));
}
