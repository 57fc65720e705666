#pragma once

// F-transform calculus: the weighted spectral sum
//
//     F[T](D) = -2 Re sum_{n>=1} exp(j 2 pi n D) T(j n w_s)
//
// in closed form (through the alpha(D, p) building block and a partial
// fraction decomposition) and as a directly summed series.

#include "snb/partial_fractions.hpp"
#include "snb/rational_tf.hpp"

#include <complex>
#include <optional>

namespace snb {

enum class FMethod { closed_form, series };

struct FTransformResult {
    double value = 0.0;
    FMethod method = FMethod::closed_form;
    /// Series only.
    long terms_used = 0;
    double tail_estimate = 0.0;
    /// Closed form only: imaginary part left after summing the fractions
    /// (zero up to rounding for real-coefficient inputs).
    double imag_residual = 0.0;
};

/// Below this |p| the building block is evaluated from its Taylor series.
inline constexpr double kAlphaTaylorSwitch = 1e-3;
inline constexpr int kAlphaTaylorOrder = 8;

/// alpha(D, p) = 1/p - pi e^{pi p (1 - 2D)} csch(pi p), analytically
/// continued to complex p (poles at p in jZ \ {0}).
[[nodiscard]] std::complex<double> alpha(double D, std::complex<double> p);

/// Taylor coefficient alpha_k(D) of alpha(D, p) = sum_k (-1)^k alpha_k(D) p^k,
/// 0 <= k <= 8.
[[nodiscard]] double alpha_taylor(double D, int k);

/// Correction term c(D, p) = alpha(D, p) - alpha_0(D) + alpha_1(D) p.
[[nodiscard]] std::complex<double> correction(double D, std::complex<double> p);

/// Closed-form F-transform of a partial-fraction form. The constant term
/// contributes nothing (F[1] = 0).
[[nodiscard]] FTransformResult f_closed(const PartialFractionForm& pf, double D, double omega_s);

/// Convenience overload: decomposes `tf` first.
[[nodiscard]] FTransformResult f_closed(const TransferFunction& tf, double D, double omega_s);

/// Direct truncated summation of the defining series with Cesaro averaging
/// over the last N/10 partial sums. The feedthrough is removed first so that
/// both methods transform the same function. Requires N >= 1000.
[[nodiscard]] FTransformResult f_series(const TransferFunction& tf, double D, double omega_s, long N);

enum class TableCase { C1, C2, C3, C4, C5, C6, C7, C8, C9 };

inline constexpr TableCase kAllTableCases[] = {TableCase::C1, TableCase::C2, TableCase::C3,
                                               TableCase::C4, TableCase::C5, TableCase::C6,
                                               TableCase::C7, TableCase::C8, TableCase::C9};

[[nodiscard]] const char* to_string(TableCase c);
[[nodiscard]] bool needs_pole(TableCase c);
[[nodiscard]] bool needs_zero(TableCase c);

/// The printed closed-form entry for a standard loop-gain shape; p and z are
/// the pole and zero normalized by omega_s.
[[nodiscard]] double table_case(TableCase c, double D, std::optional<double> p, std::optional<double> z,
                                double omega_s);

/// The transfer function that row `c` describes, with w_p = p w_s, w_z = z w_s.
[[nodiscard]] TransferFunction table_case_tf(TableCase c, std::optional<double> p, std::optional<double> z,
                                             double omega_s);

} // namespace snb
