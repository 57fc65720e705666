#include "snb/fourier_sums.hpp"

#include "snb/error.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace snb::fourier {

namespace {

// B_0..B_10 with the B_1 = -1/2 convention.
constexpr std::array<double, 11> kBernoulli = {
    1.0, -0.5, 1.0 / 6.0, 0.0, -1.0 / 30.0, 0.0, 1.0 / 42.0, 0.0, -1.0 / 30.0, 0.0, 5.0 / 66.0,
};

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) {
        b = b * (n - k + i) / i;
    }
    return b;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

} // namespace

double bernoulli_poly(int n, double x) {
    if (n < 0 || n > 10) {
        detail::fail(ErrorCategory::harmonic_balance, "UnsupportedOrder",
                     "Bernoulli polynomial order " + std::to_string(n) + " outside 0..10");
    }
    // Horner in x over the coefficients binom(n,k) B_{n-k}.
    double acc = 0.0;
    for (int k = n; k >= 0; --k) {
        acc = acc * x + binomial(n, k) * kBernoulli[static_cast<std::size_t>(n - k)];
    }
    return acc;
}

double cos_sum(int k, double x) {
    const int m = k / 2;
    const double sign = (m % 2 == 1) ? 1.0 : -1.0;
    return sign * std::pow(2.0 * std::numbers::pi, k) * bernoulli_poly(k, x) / (2.0 * factorial(k));
}

double sin_sum(int k, double x) {
    const int m = (k - 1) / 2;
    const double sign = (m % 2 == 1) ? 1.0 : -1.0;
    return sign * std::pow(2.0 * std::numbers::pi, k) * bernoulli_poly(k, x) / (2.0 * factorial(k));
}

double zeta_even(int k) {
    return cos_sum(k, 0.0);
}

} // namespace snb::fourier
