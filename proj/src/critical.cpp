#include "snb/critical.hpp"

#include "snb/harmonic_balance.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace snb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double snb_tolerance(double m_a) {
    return 1e-6 * std::max(m_a, 1.0);
}

// Bracketed root of f on [a, b] (f(a) f(b) <= 0) by TOMS 748.
template <typename F>
double bracketed_root(F&& f, double a, double b, double fa, double fb) {
    if (fa == 0.0) {
        return a;
    }
    if (fb == 0.0) {
        return b;
    }
    std::uintmax_t max_iter = 200;
    const auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, max_iter);
    return 0.5 * (r.first + r.second);
}

} // namespace

const char* to_string(StabilityHint h) {
    switch (h) {
    case StabilityHint::stable: return "stable";
    case StabilityHint::unstable: return "unstable";
    case StabilityHint::boundary: return "boundary";
    case StabilityHint::hole: return "";
    }
    return "";
}

const char* to_string(SnbMethod m) {
    switch (m) {
    case SnbMethod::exact_series: return "exact_series";
    case SnbMethod::approx_slope: return "approx_slope";
    case SnbMethod::approx_duty: return "approx_duty";
    case SnbMethod::cmc_closed_form: return "cmc_closed_form";
    }
    return "";
}

// ---------------------------------------------------------------------------
// HarmonicBalanceModel
// ---------------------------------------------------------------------------

HarmonicBalanceModel::HarmonicBalanceModel(const ConverterSpec& spec, SeriesOptions opts)
    : spec_(spec), loop_(build_loop_gain(spec)), series_(loop_.G, spec.omega_s(), opts.terms) {}

void HarmonicBalanceModel::check_d(double d) const {
    if (!(d > 0.0 && d < spec_.T)) {
        detail::fail(ErrorCategory::critical, "DomainError",
                     "switching instant d = " + std::to_string(d) + " outside (0, T)");
    }
}

double HarmonicBalanceModel::balance_denominator(double d) const {
    check_d(d);
    const double D = d / spec_.T;
    return D * series_.dc_gain() + 2.0 * series_.state_sum(D);
}

double HarmonicBalanceModel::steady_residual(double d, double v_s) const {
    return loop_.offset_gain * spec_.v_r - v_s * balance_denominator(d) - spec_.ramp(d);
}

double HarmonicBalanceModel::vs_of_d(double d) const {
    const double S = balance_denominator(d);
    if (std::abs(S) < 1e-300) {
        detail::fail(ErrorCategory::critical, "DenominatorZero",
                     "steady-state denominator vanishes at d = " + std::to_string(d) +
                         " (value " + std::to_string(S) + ")");
    }
    return (loop_.offset_gain * spec_.v_r - spec_.ramp(d)) / S;
}

double HarmonicBalanceModel::snb_lhs(double d, double v_s) const {
    check_d(d);
    const double D = d / spec_.T;
    return -(2.0 * v_s / spec_.T) * series_.weighted_sum(D) - v_s * series_.dc_gain() / spec_.T;
}

double HarmonicBalanceModel::snb_lhs(double d, double v_s, const TransferFunction& approx_G) const {
    check_d(d);
    const double D = d / spec_.T;
    const double F = f_closed(approx_G, D, spec_.omega_s()).value;
    return (v_s / spec_.T) * (F - series_.dc_gain());
}

double HarmonicBalanceModel::l_value(double d, double v_s) const {
    check_d(d);
    if (loop_.infinite_gain()) {
        detail::fail(ErrorCategory::critical, "InfiniteLoopGain",
                     "V_m = 0: the loop gain is infinite, use the slope-form criterion");
    }
    const double D = d / spec_.T;
    return -2.0 * (v_s / spec_.V_m) * series_.weighted_sum(D);
}

HBPoint HarmonicBalanceModel::point(double d) const {
    check_d(d);
    HBPoint p;
    p.d = d;
    p.D = d / spec_.T;
    const double m_a = spec_.ramp_slope();
    const SpectralSeries::Pair sums = series_.sums(p.D);
    const double S = p.D * series_.dc_gain() + 2.0 * sums.state;
    if (series_.identically_zero()) {
        // Open loop: the criterion is identically zero whatever v_s is.
        p.s_value = 0.0;
    } else if (std::abs(S) >= 1e-300) {
        const double v = (loop_.offset_gain * spec_.v_r - spec_.ramp(d)) / S;
        p.v_s_implied = v;
        p.s_value = -(2.0 * v / spec_.T) * sums.weighted - v * series_.dc_gain() / spec_.T;
        p.steady_residual = loop_.offset_gain * spec_.v_r - v * S - spec_.ramp(d);
    }
    if (p.s_value) {
        if (std::abs(*p.s_value - m_a) < snb_tolerance(m_a)) {
            p.stable_hint = StabilityHint::boundary;
        } else {
            p.stable_hint = *p.s_value < m_a ? StabilityHint::stable : StabilityHint::unstable;
        }
    }
    return p;
}

double steady_residual(const ConverterSpec& spec, double d, double v_s) {
    return HarmonicBalanceModel(spec).steady_residual(d, v_s);
}

double vs_of_d(const ConverterSpec& spec, double d) {
    return HarmonicBalanceModel(spec).vs_of_d(d);
}

double snb_lhs(const ConverterSpec& spec, double d, double v_s) {
    return HarmonicBalanceModel(spec).snb_lhs(d, v_s);
}

// ---------------------------------------------------------------------------
// Fold location
// ---------------------------------------------------------------------------

std::vector<double> duty_grid(double T, int n, double D_lo, double D_hi) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
        grid.push_back(T * (D_lo + (D_hi - D_lo) * (i + 0.5) / n));
    }
    return grid;
}

namespace {

struct FoldSample {
    double d = 0.0;
    double S = 0.0;
    double r = kNaN;  // criterion minus m_a; NaN on a hole
};

std::vector<SNBSolution> folds_on_grid(const HarmonicBalanceModel& model, int n) {
    const ConverterSpec& spec = model.spec();
    const double m_a = spec.ramp_slope();
    auto sample = [&](double d) {
        const HBPoint p = model.point(d);
        FoldSample fs;
        fs.d = d;
        if (p.v_s_implied) {
            fs.S = model.balance_denominator(d);
            fs.r = *p.s_value - m_a;
        }
        return fs;
    };
    std::vector<FoldSample> samples;
    for (double d : duty_grid(spec.T, n)) {
        samples.push_back(sample(d));
    }

    std::vector<SNBSolution> out;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const FoldSample& a = samples[i];
        const FoldSample& b = samples[i + 1];
        if (std::isnan(a.r) || std::isnan(b.r) || (a.S > 0.0) != (b.S > 0.0)) {
            continue;
        }
        if (a.r * b.r > 0.0 || (b.r == 0.0 && i + 2 < samples.size())) {
            continue;
        }
        auto f = [&](double d) {
            const HBPoint p = model.point(d);
            return p.s_value ? *p.s_value - m_a : kNaN;
        };
        const double d_star = bracketed_root(f, a.d, b.d, a.r, b.r);
        SNBSolution sol;
        sol.d_star = d_star;
        sol.D_star = d_star / spec.T;
        sol.v_s_star = model.vs_of_d(d_star);
        sol.method = SnbMethod::exact_series;
        sol.m_a_used = m_a;
        sol.steady_residual = model.steady_residual(d_star, sol.v_s_star);
        sol.fold_residual = model.snb_lhs(d_star, sol.v_s_star) - m_a;
        if (sol.v_s_star > 0.0) {
            out.push_back(sol);
        }
    }
    return out;
}

} // namespace

std::vector<SNBSolution> find_snb(const HarmonicBalanceModel& model, const FindSnbOptions& opts) {
    int n = std::max(opts.grid, 8);
    std::vector<SNBSolution> roots = folds_on_grid(model, n);
    for (int refine = 0; refine < opts.max_refinements; ++refine) {
        n *= 2;
        std::vector<SNBSolution> finer = folds_on_grid(model, n);
        const bool stable = finer.size() == roots.size();
        roots = std::move(finer);
        if (stable) {
            break;
        }
    }
    return roots;
}

std::vector<SNBSolution> find_snb(const ConverterSpec& spec, const FindSnbOptions& opts) {
    return find_snb(HarmonicBalanceModel(spec, {opts.series_terms}), opts);
}

std::vector<HBPoint> s_curve(const HarmonicBalanceModel& model, const std::vector<double>& d_grid) {
    std::vector<HBPoint> out;
    out.reserve(d_grid.size());
    for (double d : d_grid) {
        out.push_back(model.point(d));
    }
    return out;
}

std::vector<HBPoint> s_curve(const ConverterSpec& spec, const std::vector<double>& d_grid) {
    return s_curve(HarmonicBalanceModel(spec), d_grid);
}

RampRequirement min_stabilizing_ramp(const HarmonicBalanceModel& model, int grid) {
    const double T = model.spec().T;
    if (model.series().identically_zero()) {
        return {0.0, 0.0};
    }
    auto s_at = [&](double d) {
        const HBPoint p = model.point(d);
        if (!p.v_s_implied || *p.v_s_implied <= 0.0) {
            return -std::numeric_limits<double>::infinity();
        }
        return *p.s_value;
    };
    const std::vector<double> ds = duty_grid(T, grid);
    std::size_t best = ds.size();
    double best_s = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double s = s_at(ds[i]);
        if (s > best_s) {
            best_s = s;
            best = i;
        }
    }
    if (best == ds.size()) {
        return {0.0, 0.0};
    }
    // Golden-section polish over the neighbouring cells.
    double a = best > 0 ? ds[best - 1] : ds[best] * 1e-6;
    double b = best + 1 < ds.size() ? ds[best + 1] : T * (1.0 - 1e-9);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double e = a + g * (b - a);
    double fc = s_at(c);
    double fe = s_at(e);
    for (int it = 0; it < 80 && (b - a) > 1e-13 * T; ++it) {
        if (fc > fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = s_at(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = s_at(e);
        }
    }
    RampRequirement out{best_s, ds[best]};
    for (double d : {a, b, c, e}) {
        const double s = s_at(d);
        if (s > out.m_a_min) {
            out = {s, d};
        }
    }
    return out;
}

RampRequirement min_stabilizing_ramp(const ConverterSpec& spec, int grid) {
    return min_stabilizing_ramp(HarmonicBalanceModel(spec), grid);
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

StateFeedbackClosedForm::StateFeedbackClosedForm(const ConverterSpec& spec, double k_i, double k_v)
    : spec_(spec), k_i_(k_i), k_v_(k_v) {}

StateFeedbackClosedForm::StateFeedbackClosedForm(const ConverterSpec& spec) : spec_(spec), k_i_(0.0), k_v_(0.0) {
    if (const auto* sf = std::get_if<StateFeedback>(&spec.scheme)) {
        k_i_ = sf->k_i;
        k_v_ = sf->k_v;
    } else if (std::holds_alternative<Cmc>(spec.scheme)) {
        k_i_ = 1.0;
        k_v_ = 0.0;
    } else {
        detail::fail(ErrorCategory::critical, "UnsupportedScheme",
                     "state-feedback closed forms need a state-feedback or CMC scheme");
    }
}

double StateFeedbackClosedForm::approx_lhs(double D) const {
    return approx_lhs(D, spec_.v_s);
}

double StateFeedbackClosedForm::approx_lhs(double D, double v_s) const {
    const double L = spec_.L;
    const double T = spec_.T;
    const double current_term = (v_s * k_i_ / L) * (D - (spec_.K() + 1.0) / 2.0);
    const double voltage_term =
        (v_s * k_v_ / T) * (-1.0 + T * T * (1.0 - 6.0 * D + 6.0 * D * D) / (12.0 * L * spec_.C));
    return current_term + voltage_term;
}

double StateFeedbackClosedForm::critical_duty() const {
    if (k_i_ == 0.0) {
        detail::fail(ErrorCategory::critical, "ZeroCurrentGain", "critical duty needs k_i != 0");
    }
    return (spec_.K() + 1.0) / 2.0 + spec_.L * spec_.ramp_slope() / (spec_.v_s * k_i_) +
           spec_.L * k_v_ / (spec_.T * k_i_);
}

double StateFeedbackClosedForm::ripple_ratio() const noexcept {
    return spec_.T * spec_.T / (12.0 * spec_.L * spec_.C);
}

TransferFunction StateFeedbackClosedForm::high_frequency_G() const {
    const double LC = spec_.L * spec_.C;
    return {Eigen::Vector2d(k_v_, k_i_ * spec_.C), Eigen::Vector3d(0.0, 0.0, LC)};
}

CmcClosedForm closed_form_cmc(const ConverterSpec& spec) {
    CmcClosedForm out;
    out.duty = (spec.K() + 1.0) / 2.0 + spec.L * spec.ramp_slope() / spec.v_s;
    out.in_range = out.duty > 0.0 && out.duty < 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// Parameter-plane boundary
// ---------------------------------------------------------------------------

void set_parameter(ConverterSpec& spec, const std::string& name, double value) {
    if (name == "v_s") spec.v_s = value;
    else if (name == "R") spec.R = value;
    else if (name == "L") spec.L = value;
    else if (name == "C") spec.C = value;
    else if (name == "R_c") spec.R_c = value;
    else if (name == "T") spec.T = value;
    else if (name == "V_m") spec.V_m = value;
    else if (name == "v_r") spec.v_r = value;
    else if (name == "k_i" || name == "k_v") {
        auto* sf = std::get_if<StateFeedback>(&spec.scheme);
        if (!sf) {
            detail::fail(ErrorCategory::config, "UnknownParameter",
                         name + " is only defined for the state-feedback scheme");
        }
        (name == "k_i" ? sf->k_i : sf->k_v) = value;
    } else {
        detail::fail(ErrorCategory::config, "UnknownParameter", "unknown converter parameter '" + name + "'");
    }
}

double get_parameter(const ConverterSpec& spec, const std::string& name) {
    if (name == "v_s") return spec.v_s;
    if (name == "R") return spec.R;
    if (name == "L") return spec.L;
    if (name == "C") return spec.C;
    if (name == "R_c") return spec.R_c;
    if (name == "T") return spec.T;
    if (name == "V_m") return spec.V_m;
    if (name == "v_r") return spec.v_r;
    if (const auto* sf = std::get_if<StateFeedback>(&spec.scheme)) {
        if (name == "k_i") return sf->k_i;
        if (name == "k_v") return sf->k_v;
    }
    detail::fail(ErrorCategory::config, "UnknownParameter", "unknown converter parameter '" + name + "'");
}

namespace {

// "below" when the stable branch approaches the fold from lower v_s.
std::string stable_direction(const HarmonicBalanceModel& model, const SNBSolution& fold) {
    const double T = model.spec().T;
    const double delta = 1e-3 * T;
    for (double d : {fold.d_star - delta, fold.d_star + delta}) {
        if (d <= 0.0 || d >= T) {
            continue;
        }
        const HBPoint p = model.point(d);
        if (p.stable_hint == StabilityHint::stable && p.v_s_implied) {
            return *p.v_s_implied < fold.v_s_star ? "below" : "above";
        }
    }
    return "below";
}

std::vector<double> linspace(const SweepAxis& axis) {
    std::vector<double> v;
    const int n = std::max(axis.points, 1);
    for (int i = 0; i < n; ++i) {
        v.push_back(n == 1 ? axis.lo : axis.lo + (axis.hi - axis.lo) * i / (n - 1));
    }
    return v;
}

} // namespace

std::vector<BoundaryPoint> trace_boundary(const ConverterSpec& spec, const SweepAxis& x, const SweepAxis& y,
                                          const FindSnbOptions& opts) {
    if (!(x.hi > x.lo) || !(y.hi > y.lo)) {
        detail::fail(ErrorCategory::config, "InvalidRange", "boundary ranges must be increasing");
    }
    (void)get_parameter(spec, x.name);
    (void)get_parameter(spec, y.name);

    std::vector<BoundaryPoint> out;
    for (double xv : linspace(x)) {
        ConverterSpec sx = spec;
        set_parameter(sx, x.name, xv);
        bool found = false;

        if (y.name == "v_s") {
            const HarmonicBalanceModel model(sx, {opts.series_terms});
            for (const SNBSolution& fold : find_snb(model, opts)) {
                if (fold.v_s_star >= y.lo && fold.v_s_star <= y.hi) {
                    out.push_back({xv, fold.v_s_star, stable_direction(model, fold)});
                    found = true;
                }
            }
        } else {
            // phi(y) = fold voltage - operating voltage; the boundary is phi = 0.
            std::string direction = "below";
            auto phi = [&](double yv) {
                ConverterSpec sy = sx;
                set_parameter(sy, y.name, yv);
                try {
                    const HarmonicBalanceModel model(sy, {opts.series_terms});
                    const auto folds = find_snb(model, opts);
                    if (folds.empty()) {
                        return kNaN;
                    }
                    direction = stable_direction(model, folds.front());
                    return folds.front().v_s_star - sx.v_s;
                } catch (const Error&) {
                    return kNaN;
                }
            };
            const std::vector<double> ys = linspace(y);
            std::vector<double> phis;
            for (double yv : ys) {
                phis.push_back(phi(yv));
            }
            for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
                if (std::isnan(phis[j]) || std::isnan(phis[j + 1]) || phis[j] * phis[j + 1] > 0.0) {
                    continue;
                }
                const double yc = bracketed_root(phi, ys[j], ys[j + 1], phis[j], phis[j + 1]);
                phi(yc);
                // Stable operation needs v_s on the stable side of the fold.
                const bool stable_where_phi_positive = direction == "below";
                const bool upper_positive = phis[j + 1] > 0.0;
                const bool stable_above = stable_where_phi_positive == upper_positive;
                out.push_back({xv, yc, stable_above ? "above" : "below"});
                found = true;
            }
        }
        if (!found) {
            out.push_back({xv, std::nullopt, ""});
        }
    }
    return out;
}

} // namespace snb
