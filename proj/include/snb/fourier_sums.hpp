#pragma once

// Closed forms of the classical Fourier sums
//   sum_{n>=1} cos(2 pi n x) / n^k   (k even)
//   sum_{n>=1} sin(2 pi n x) / n^k   (k odd)
// through Bernoulli polynomials, valid for x in [0, 1] (open interval for k = 1).

namespace snb::fourier {

/// Bernoulli polynomial B_n(x), 0 <= n <= 10.
[[nodiscard]] double bernoulli_poly(int n, double x);

/// sum cos(2 pi n x) / n^k for even k >= 2.
[[nodiscard]] double cos_sum(int k, double x);

/// sum sin(2 pi n x) / n^k for odd k >= 1.
[[nodiscard]] double sin_sum(int k, double x);

/// Riemann zeta at even k (the cosine sum at x = 0).
[[nodiscard]] double zeta_even(int k);

} // namespace snb::fourier
