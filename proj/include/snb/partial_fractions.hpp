#pragma once

#include "snb/rational_tf.hpp"

#include <complex>
#include <vector>

namespace snb {

struct SimplePole {
    std::complex<double> pole;     // rad/s, never 0
    std::complex<double> residue;
};

/// tf(s) = feedthrough + b1/s + b2/s^2 + sum_k residue_k / (s - pole_k).
///
/// Complex poles always appear together with their conjugate (and the
/// conjugate residue), so the form recomposes to a real-coefficient function.
struct PartialFractionForm {
    double feedthrough = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    std::vector<SimplePole> simple_poles;
};

[[nodiscard]] std::complex<double> eval(const PartialFractionForm& pf, std::complex<double> s);

struct PartialFractionOptions {
    /// Roots of numerator and denominator closer than this (relative) cancel.
    double cancel_tol = 1e-7;
    /// Two non-origin poles closer than this (relative) count as repeated.
    double repeat_tol = 1e-6;
    /// Required relative agreement of the recomposed form at the probe points.
    double verify_tol = 1e-9;
};

/// Cancels numerator/denominator roots that coincide to `rel_tol`, including
/// exact common factors of s. Returns the input unchanged if nothing cancels.
[[nodiscard]] TransferFunction cancel_common_roots(const TransferFunction& tf, double rel_tol = 1e-7);

/// Decomposition into first-order fractions plus origin poles of order <= 2.
///
/// Throws RepeatedPoleError for a repeated non-origin pole and
/// OriginMultiplicityError for 1/s^3 or higher.
[[nodiscard]] PartialFractionForm partial_fractions(const TransferFunction& tf,
                                                    const PartialFractionOptions& opts = {});

} // namespace snb
