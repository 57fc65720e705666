#pragma once

#include "snb/rational_tf.hpp"

#include <complex>
#include <vector>

namespace snb {

/// Harmonic samples G(j n w_s), n = 1..N, of a strictly proper G, with the
/// first three terms of its expansion at infinity (g_k / s^k) summed in
/// closed form. The sampled remainder decays like n^-4, so the truncated
/// sums below carry a tail of order N^-3 or smaller.
class SpectralSeries {
public:
    SpectralSeries(const TransferFunction& G, double omega_s, long N);

    /// sum_{n>=1} Re[ e^{j 2 pi n D} G(j n w_s) ]
    [[nodiscard]] double weighted_sum(double D) const;

    /// sum_{n>=1} Re[ (e^{j 2 pi n D} - 1) / (j 2 pi n) G(j n w_s) ]
    [[nodiscard]] double state_sum(double D) const;

    /// Both sums in one pass.
    struct Pair {
        double weighted = 0.0;
        double state = 0.0;
    };
    [[nodiscard]] Pair sums(double D) const;

    [[nodiscard]] double dc_gain() const noexcept { return g0_; }
    [[nodiscard]] long terms() const noexcept { return static_cast<long>(remainder_.size()); }
    /// Bound on the neglected part of weighted_sum (integral test on the
    /// n^-4 remainder envelope); state_sum's tail is smaller still.
    [[nodiscard]] double tail_bound() const noexcept { return tail_bound_; }
    [[nodiscard]] bool identically_zero() const noexcept { return zero_; }

private:
    double omega_s_;
    double g0_ = 0.0;
    double g_[4] = {0.0, 0.0, 0.0, 0.0};
    std::vector<std::complex<double>> remainder_;
    double tail_bound_ = 0.0;
    bool zero_ = false;
};

} // namespace snb
