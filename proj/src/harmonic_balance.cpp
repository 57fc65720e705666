#include "snb/harmonic_balance.hpp"

#include "snb/fourier_sums.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace snb {

namespace {

constexpr double kPi = std::numbers::pi;

void check_duty(double D) {
    if (!(D > 0.0 && D < 1.0)) {
        detail::fail(ErrorCategory::harmonic_balance, "DomainError",
                     "duty D = " + std::to_string(D) + " outside (0, 1)");
    }
}

// 1 - exp(-w) without cancellation for small |w|.
std::complex<double> one_minus_exp_neg(std::complex<double> w) {
    const double a = -w.real();
    const double b = -w.imag();
    const double s = std::sin(0.5 * b);
    const double re = std::expm1(a) * std::cos(b) - 2.0 * s * s;
    const double im = std::exp(a) * std::sin(b);
    return {-re, -im};
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

} // namespace

double alpha_taylor(double D, int k) {
    check_duty(D);
    if (k < 0 || k > kAlphaTaylorOrder) {
        detail::fail(ErrorCategory::harmonic_balance, "UnsupportedOrder",
                     "alpha_k requested for k = " + std::to_string(k) + " (0..8 supported)");
    }
    if (k == 0) {
        return kPi * (2.0 * D - 1.0);
    }
    if (k == 1) {
        return kPi * kPi * (2.0 * D * D - 2.0 * D + 1.0 / 3.0);
    }
    // Generating function x e^{xt} / (e^x - 1) = sum B_n(t) x^n / n!.
    return std::pow(2.0 * kPi, k + 1) * fourier::bernoulli_poly(k + 1, D) / factorial(k + 1);
}

std::complex<double> alpha(double D, std::complex<double> p) {
    check_duty(D);
    if (std::abs(p) < kAlphaTaylorSwitch) {
        std::complex<double> acc = 0.0;
        for (int k = kAlphaTaylorOrder; k >= 0; --k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            acc = acc * p + sign * alpha_taylor(D, k);
        }
        return acc;
    }
    const double nearest = std::round(p.imag());
    if (nearest != 0.0 && std::abs(p - std::complex<double>(0.0, nearest)) < 1e-12) {
        detail::fail(ErrorCategory::harmonic_balance, "PoleError",
                     "alpha(D, p) has a pole at p = j" + std::to_string(nearest));
    }
    const std::complex<double> two_pi_p = 2.0 * kPi * p;
    // pi e^{pi p (1-2D)} csch(pi p), written to avoid overflow for large |Re p|.
    std::complex<double> kernel;
    if (p.real() >= 0.0) {
        kernel = 2.0 * kPi * std::exp(-two_pi_p * D) / one_minus_exp_neg(two_pi_p);
    } else {
        kernel = -2.0 * kPi * std::exp(two_pi_p * (1.0 - D)) / one_minus_exp_neg(-two_pi_p);
    }
    return 1.0 / p - kernel;
}

std::complex<double> correction(double D, std::complex<double> p) {
    return alpha(D, p) - alpha_taylor(D, 0) + alpha_taylor(D, 1) * p;
}

FTransformResult f_closed(const PartialFractionForm& pf, double D, double omega_s) {
    check_duty(D);
    std::complex<double> acc = 0.0;
    if (pf.b1 != 0.0) {
        acc += pf.b1 * alpha_taylor(D, 0) / omega_s;
    }
    if (pf.b2 != 0.0) {
        acc += pf.b2 * alpha_taylor(D, 1) / (omega_s * omega_s);
    }
    for (const auto& sp : pf.simple_poles) {
        acc += sp.residue / omega_s * alpha(D, -sp.pole / omega_s);
    }
    FTransformResult r;
    r.value = acc.real();
    r.method = FMethod::closed_form;
    r.imag_residual = acc.imag();
    return r;
}

FTransformResult f_closed(const TransferFunction& tf, double D, double omega_s) {
    return f_closed(partial_fractions(tf), D, omega_s);
}

FTransformResult f_series(const TransferFunction& tf_in, double D, double omega_s, long N) {
    check_duty(D);
    if (N < 1000) {
        detail::fail(ErrorCategory::harmonic_balance, "SeriesTooShort",
                     "series truncation N = " + std::to_string(N) + " below 1000");
    }
    const TransferFunction tf = strip_feedthrough(tf_in);
    const long window = N / 10;
    const long half_window = window / 2;
    double partial = 0.0;
    double window_sum = 0.0;
    double half_window_sum = 0.0;
    for (long n = 1; n <= N; ++n) {
        const double frac = std::fmod(static_cast<double>(n) * D, 1.0);
        const std::complex<double> rot = std::polar(1.0, 2.0 * kPi * frac);
        partial += -2.0 * (rot * eval_jomega(tf, static_cast<double>(n) * omega_s)).real();
        if (n > N - window) {
            window_sum += partial;
        }
        if (n > N - half_window) {
            half_window_sum += partial;
        }
    }
    const double avg = window_sum / static_cast<double>(window);
    const double avg_half = half_window_sum / static_cast<double>(half_window);
    FTransformResult r;
    r.value = avg;
    r.method = FMethod::series;
    r.terms_used = N;
    r.tail_estimate = std::abs(avg - avg_half);
    return r;
}

const char* to_string(TableCase c) {
    switch (c) {
    case TableCase::C1: return "C1";
    case TableCase::C2: return "C2";
    case TableCase::C3: return "C3";
    case TableCase::C4: return "C4";
    case TableCase::C5: return "C5";
    case TableCase::C6: return "C6";
    case TableCase::C7: return "C7";
    case TableCase::C8: return "C8";
    case TableCase::C9: return "C9";
    }
    return "?";
}

bool needs_pole(TableCase c) {
    return c == TableCase::C1 || c == TableCase::C3 || c == TableCase::C4 || c == TableCase::C5 ||
           c == TableCase::C8 || c == TableCase::C9;
}

bool needs_zero(TableCase c) {
    return c == TableCase::C4 || c == TableCase::C7 || c == TableCase::C8 || c == TableCase::C9;
}

namespace {

void check_params(TableCase c, std::optional<double> p, std::optional<double> z) {
    if (needs_pole(c) && !(p && *p > 0.0)) {
        detail::fail(ErrorCategory::harmonic_balance, "MissingParameter",
                     std::string("case ") + to_string(c) + " requires a positive normalized pole p");
    }
    if (needs_zero(c) && !(z && *z > 0.0)) {
        detail::fail(ErrorCategory::harmonic_balance, "MissingParameter",
                     std::string("case ") + to_string(c) + " requires a positive normalized zero z");
    }
}

} // namespace

double table_case(TableCase c, double D, std::optional<double> p_opt, std::optional<double> z_opt,
                  double omega_s) {
    check_params(c, p_opt, z_opt);
    const double p = p_opt.value_or(0.0);
    const double z = z_opt.value_or(1.0);
    const double a0 = alpha_taylor(D, 0);
    const double a1 = alpha_taylor(D, 1);
    const double w = omega_s;
    auto a = [&] { return alpha(D, p).real(); };
    auto cc = [&] { return correction(D, p).real(); };
    switch (c) {
    case TableCase::C1: return (a0 - a1 * p + cc()) / w;
    case TableCase::C2: return a0 / w;
    case TableCase::C3: return p * a();
    case TableCase::C4: return p * (1.0 - p / z) * a();
    case TableCase::C5: return (a1 * p - cc()) / w;
    case TableCase::C6: return a1 / (w * w);
    case TableCase::C7: return (a0 / z + a1) / (w * w);
    case TableCase::C8: return ((p / z) * a0 - (p / z - 1.0) * (a1 * p - cc())) / w;
    case TableCase::C9: return ((p / z) * a1 + (1.0 / p - 1.0 / z) * cc()) / (w * w);
    }
    return 0.0;
}

TransferFunction table_case_tf(TableCase c, std::optional<double> p_opt, std::optional<double> z_opt,
                               double omega_s) {
    check_params(c, p_opt, z_opt);
    const double wp = p_opt.value_or(1.0) * omega_s;
    const double wz = z_opt.value_or(1.0) * omega_s;
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    const Eigen::Vector2d lead_zero(1.0, 1.0 / wz);
    switch (c) {
    case TableCase::C1: return {one, Eigen::Vector2d(wp, 1.0)};
    case TableCase::C2: return {one, Eigen::Vector2d(0.0, 1.0)};
    case TableCase::C3: return {one, Eigen::Vector2d(1.0, 1.0 / wp)};
    case TableCase::C4: return {lead_zero, Eigen::Vector2d(1.0, 1.0 / wp)};
    case TableCase::C5: return {one, Eigen::Vector3d(0.0, 1.0, 1.0 / wp)};
    case TableCase::C6: return {one, Eigen::Vector3d(0.0, 0.0, 1.0)};
    case TableCase::C7: return {lead_zero, Eigen::Vector3d(0.0, 0.0, 1.0)};
    case TableCase::C8: return {lead_zero, Eigen::Vector3d(0.0, 1.0, 1.0 / wp)};
    case TableCase::C9: return {lead_zero, Eigen::Vector4d(0.0, 0.0, 1.0, 1.0 / wp)};
    }
    return {};
}

} // namespace snb
