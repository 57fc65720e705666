#include "snb/spectral_series.hpp"

#include "snb/fourier_sums.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace snb {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr long kResync = 128;
} // namespace

SpectralSeries::SpectralSeries(const TransferFunction& G, double omega_s, long N) : omega_s_(omega_s) {
    if (N < 16) {
        detail::fail(ErrorCategory::critical, "SeriesTooShort", "harmonic series needs at least 16 terms");
    }
    if (G.is_zero()) {
        zero_ = true;
        remainder_.assign(static_cast<std::size_t>(N), {0.0, 0.0});
        return;
    }
    if (!G.strictly_proper()) {
        detail::fail(ErrorCategory::critical, "NonStrictlyProperLoop",
                     "steady-state harmonic sums need a strictly proper G(s)");
    }
    const DcGain dc = snb::dc_gain(G);
    if (dc.infinite) {
        detail::fail(ErrorCategory::critical, "NonFiniteDcGain",
                     "G(0) is infinite; the steady-state balance needs a finite DC gain");
    }
    g0_ = dc.value;

    const auto laurent = laurent_at_infinity(G, 3);
    for (int k = 1; k <= 3; ++k) {
        g_[k] = laurent[static_cast<std::size_t>(k)];
    }

    // R(s) = G(s) - g1/s - g2/s^2 - g3/s^3 = (N s^3 - Den (g1 s^2 + g2 s + g3)) / (s^3 Den).
    const Eigen::VectorXd& num = G.num();
    const Eigen::VectorXd& den = G.den();
    const Eigen::Index n_den = den.size() - 1;
    Eigen::VectorXd shifted = Eigen::VectorXd::Zero(num.size() + 3);
    shifted.tail(num.size()) = num;
    const Eigen::Vector3d asym(g_[3], g_[2], g_[1]);
    Eigen::VectorXd rem_num = polyadd<double>(shifted, Eigen::VectorXd(-polymul<double>(den, asym)));
    // Coefficients of order >= n_den vanish analytically.
    if (rem_num.size() > n_den) {
        rem_num = Eigen::VectorXd(rem_num.head(n_den));
    }
    Eigen::VectorXd rem_den = Eigen::VectorXd::Zero(den.size() + 3);
    rem_den.tail(den.size()) = den;

    remainder_.resize(static_cast<std::size_t>(N));
    double envelope = 0.0;
    for (long n = 1; n <= N; ++n) {
        const std::complex<double> s(0.0, static_cast<double>(n) * omega_s);
        const std::complex<double> r =
            rem_num.size() > 0 ? polyval<double>(rem_num, s) / polyval<double>(rem_den, s) : 0.0;
        remainder_[static_cast<std::size_t>(n - 1)] = r;
        if (n > N - 10) {
            envelope = std::max(envelope, std::abs(r) * std::pow(static_cast<double>(n), 4));
        }
    }
    tail_bound_ = envelope / (3.0 * std::pow(static_cast<double>(N), 3));
}

SpectralSeries::Pair SpectralSeries::sums(double D) const {
    Pair out;
    if (zero_) {
        return out;
    }
    const double x = D - std::floor(D);
    const double theta = 2.0 * kPi * x;
    const std::complex<double> step = std::polar(1.0, theta);
    std::complex<double> rot = step;
    double weighted = 0.0;
    double state = 0.0;
    const long N = terms();
    for (long n = 1; n <= N; ++n) {
        if (n % kResync == 0) {
            rot = std::polar(1.0, 2.0 * kPi * std::fmod(static_cast<double>(n) * x, 1.0));
        }
        const std::complex<double> r = remainder_[static_cast<std::size_t>(n - 1)];
        const std::complex<double> rr = rot * r;
        weighted += rr.real();
        // Re[(rot - 1) r / (j 2 pi n)] = Im[(rot - 1) r] / (2 pi n)
        state += (rr - r).imag() / (2.0 * kPi * static_cast<double>(n));
        rot *= step;
    }
    const double w = omega_s_;
    weighted += g_[1] / w * fourier::sin_sum(1, x) - g_[2] / (w * w) * fourier::cos_sum(2, x) -
                g_[3] / (w * w * w) * fourier::sin_sum(3, x);
    state += -g_[1] / (2.0 * kPi * w) * (fourier::cos_sum(2, x) - fourier::zeta_even(2)) -
             g_[2] / (2.0 * kPi * w * w) * fourier::sin_sum(3, x) +
             g_[3] / (2.0 * kPi * w * w * w) * (fourier::cos_sum(4, x) - fourier::zeta_even(4));
    out.weighted = weighted;
    out.state = state;
    return out;
}

double SpectralSeries::weighted_sum(double D) const {
    return sums(D).weighted;
}

double SpectralSeries::state_sum(double D) const {
    return sums(D).state;
}

} // namespace snb
