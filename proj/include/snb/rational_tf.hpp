#pragma once

// Real-coefficient rational functions of the Laplace variable s.
//
// Coefficients are stored densely in ascending powers of s. Everything here
// is templated on the scalar so that the same transfer function can be
// re-evaluated in extended precision (long double) when checking the double
// path.

#include "snb/error.hpp"

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace snb {

template <typename Scalar>
using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Horner evaluation of an ascending-order polynomial at a complex point.
template <typename Scalar>
[[nodiscard]] std::complex<Scalar> polyval(const Coeffs<Scalar>& c, const std::complex<Scalar>& s) {
    std::complex<Scalar> acc{0};
    for (Eigen::Index k = c.size() - 1; k >= 0; --k) {
        acc = acc * s + c[k];
    }
    return acc;
}

template <typename Scalar>
[[nodiscard]] Scalar polyval(const Coeffs<Scalar>& c, Scalar s) {
    Scalar acc{0};
    for (Eigen::Index k = c.size() - 1; k >= 0; --k) {
        acc = acc * s + c[k];
    }
    return acc;
}

/// Derivative of an ascending-order polynomial.
template <typename Scalar>
[[nodiscard]] Coeffs<Scalar> polyder(const Coeffs<Scalar>& c) {
    if (c.size() <= 1) {
        return Coeffs<Scalar>::Zero(1);
    }
    Coeffs<Scalar> d(c.size() - 1);
    for (Eigen::Index k = 1; k < c.size(); ++k) {
        d[k - 1] = Scalar(k) * c[k];
    }
    return d;
}

template <typename Scalar>
[[nodiscard]] Coeffs<Scalar> polymul(const Coeffs<Scalar>& a, const Coeffs<Scalar>& b) {
    Coeffs<Scalar> out = Coeffs<Scalar>::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

template <typename Scalar>
[[nodiscard]] Coeffs<Scalar> polyadd(const Coeffs<Scalar>& a, const Coeffs<Scalar>& b) {
    Coeffs<Scalar> out = Coeffs<Scalar>::Zero(std::max(a.size(), b.size()));
    out.head(a.size()) += a;
    out.head(b.size()) += b;
    return out;
}

/// Drops exactly-zero highest-order coefficients (keeps at least one entry).
template <typename Scalar>
[[nodiscard]] Coeffs<Scalar> trim(const Coeffs<Scalar>& c) {
    Eigen::Index n = c.size();
    while (n > 1 && c[n - 1] == Scalar(0)) {
        --n;
    }
    if (n == 0) {
        return Coeffs<Scalar>::Zero(1);
    }
    return c.head(n);
}

/// Roots of an ascending-order real polynomial, as eigenvalues of its
/// companion matrix. Trailing zero coefficients must already be trimmed.
[[nodiscard]] Eigen::VectorXcd poly_roots(const Eigen::VectorXd& ascending);

/// Monic-free reconstruction: lead * prod(s - r_k). Imaginary parts of the
/// product are discarded, so `roots` must be closed under conjugation.
[[nodiscard]] Eigen::VectorXd poly_from_roots(const Eigen::VectorXcd& roots, double lead);

template <typename Scalar>
class RationalTF {
public:
    using Poly = Coeffs<Scalar>;

    /// Unit gain.
    RationalTF() : num_(Poly::Ones(1)), den_(Poly::Ones(1)) {}

    RationalTF(Poly num, Poly den) : num_(trim(num)), den_(trim(den)) {
        if (den_.size() == 1 && den_[0] == Scalar(0)) {
            detail::fail(ErrorCategory::tf_core, "InvalidTransferFunction",
                         "denominator polynomial is identically zero");
        }
        for (Eigen::Index k = 0; k < num_.size(); ++k) {
            if (!std::isfinite(static_cast<double>(num_[k]))) {
                detail::fail(ErrorCategory::tf_core, "InvalidTransferFunction",
                             "non-finite numerator coefficient");
            }
        }
        for (Eigen::Index k = 0; k < den_.size(); ++k) {
            if (!std::isfinite(static_cast<double>(den_[k]))) {
                detail::fail(ErrorCategory::tf_core, "InvalidTransferFunction",
                             "non-finite denominator coefficient");
            }
        }
        if (num_degree() > den_degree()) {
            detail::fail(ErrorCategory::tf_core, "ImproperTransferFunction",
                         "numerator degree " + std::to_string(num_degree()) +
                             " exceeds denominator degree " + std::to_string(den_degree()));
        }
    }

    RationalTF(std::initializer_list<Scalar> num, std::initializer_list<Scalar> den)
        : RationalTF(from_list(num), from_list(den)) {}

    static RationalTF constant(Scalar k) {
        return RationalTF(Poly::Constant(1, k), Poly::Ones(1));
    }

    [[nodiscard]] const Poly& num() const noexcept { return num_; }
    [[nodiscard]] const Poly& den() const noexcept { return den_; }

    [[nodiscard]] int num_degree() const noexcept { return static_cast<int>(num_.size()) - 1; }
    [[nodiscard]] int den_degree() const noexcept { return static_cast<int>(den_.size()) - 1; }

    [[nodiscard]] bool is_zero() const noexcept { return num_.size() == 1 && num_[0] == Scalar(0); }
    [[nodiscard]] bool strictly_proper() const noexcept {
        return is_zero() || num_degree() < den_degree();
    }

    /// Value at s -> infinity (zero for strictly proper functions).
    [[nodiscard]] Scalar feedthrough() const noexcept {
        return strictly_proper() ? Scalar(0) : num_[num_.size() - 1] / den_[den_.size() - 1];
    }

    template <typename Other>
    [[nodiscard]] RationalTF<Other> cast() const {
        return RationalTF<Other>(num_.template cast<Other>(), den_.template cast<Other>());
    }

private:
    static Poly from_list(std::initializer_list<Scalar> l) {
        Poly p(static_cast<Eigen::Index>(l.size()));
        Eigen::Index i = 0;
        for (Scalar v : l) {
            p[i++] = v;
        }
        return p;
    }

    Poly num_;
    Poly den_;
};

using TransferFunction = RationalTF<double>;

template <typename Scalar>
[[nodiscard]] std::complex<Scalar> eval(const RationalTF<Scalar>& tf, const std::complex<Scalar>& s) {
    return polyval(tf.num(), s) / polyval(tf.den(), s);
}

/// tf(jω). Numerator and denominator are evaluated separately by Horner.
template <typename Scalar>
[[nodiscard]] std::complex<Scalar> eval_jomega(const RationalTF<Scalar>& tf, Scalar omega) {
    const std::complex<Scalar> s{Scalar(0), omega};
    const std::complex<Scalar> d = polyval(tf.den(), s);
    if (std::abs(d) < Scalar(1e-300)) {
        detail::fail(ErrorCategory::tf_core, "PoleProximityError",
                     "j*omega is (numerically) a pole at omega = " +
                         std::to_string(static_cast<double>(omega)));
    }
    return polyval(tf.num(), s) / d;
}

template <typename Scalar>
[[nodiscard]] RationalTF<Scalar> operator*(const RationalTF<Scalar>& a, const RationalTF<Scalar>& b) {
    return {polymul(a.num(), b.num()), polymul(a.den(), b.den())};
}

template <typename Scalar>
[[nodiscard]] RationalTF<Scalar> operator*(Scalar k, const RationalTF<Scalar>& a) {
    return {Coeffs<Scalar>(k * a.num()), a.den()};
}

/// Sum over the product of denominators; identical denominators are kept
/// as-is so that k1*G + k2*H over a shared plant does not square its order.
template <typename Scalar>
[[nodiscard]] RationalTF<Scalar> operator+(const RationalTF<Scalar>& a, const RationalTF<Scalar>& b) {
    if (a.den().size() == b.den().size() && a.den() == b.den()) {
        return {polyadd(a.num(), b.num()), a.den()};
    }
    return {polyadd(polymul(a.num(), b.den()), polymul(b.num(), a.den())),
            polymul(a.den(), b.den())};
}

template <typename Scalar>
[[nodiscard]] RationalTF<Scalar> operator-(const RationalTF<Scalar>& a, const RationalTF<Scalar>& b) {
    return a + Scalar(-1) * b;
}

/// tf minus its value at infinity.
template <typename Scalar>
[[nodiscard]] RationalTF<Scalar> strip_feedthrough(const RationalTF<Scalar>& tf) {
    if (tf.strictly_proper()) {
        return tf;
    }
    Coeffs<Scalar> num = tf.num() - tf.feedthrough() * tf.den();
    num[num.size() - 1] = Scalar(0);
    return {num, tf.den()};
}

/// DC gain, possibly infinite. A shared factor s (up to s^2) in a 0/0
/// quotient is cancelled first.
struct DcGain {
    bool infinite = false;
    double value = 0.0;
};

template <typename Scalar>
[[nodiscard]] DcGain dc_gain(const RationalTF<Scalar>& tf) {
    Coeffs<Scalar> num = tf.num();
    Coeffs<Scalar> den = tf.den();
    for (int reduce = 0; reduce <= 2; ++reduce) {
        const bool num_zero = num[0] == Scalar(0);
        const bool den_zero = den[0] == Scalar(0);
        if (!den_zero) {
            return {false, static_cast<double>(num[0] / den[0])};
        }
        if (!num_zero) {
            return {true, std::numeric_limits<double>::infinity()};
        }
        if (tf.is_zero()) {
            return {false, 0.0};
        }
        if (reduce == 2 || num.size() < 2 || den.size() < 2) {
            break;
        }
        num = Coeffs<Scalar>(num.tail(num.size() - 1));
        den = Coeffs<Scalar>(den.tail(den.size() - 1));
    }
    detail::fail(ErrorCategory::tf_core, "IndeterminateDcGain",
                 "0/0 at s = 0 persists after cancelling s^2");
}

/// Coefficients g_0..g_order of the expansion tf(s) = sum_k g_k / s^k about
/// s = infinity. g_0 is the feedthrough.
template <typename Scalar>
[[nodiscard]] std::vector<Scalar> laurent_at_infinity(const RationalTF<Scalar>& tf, int order) {
    // With u = 1/s: tf = u^r * P(u) / Q(u), where P, Q hold the coefficients
    // in descending powers of s and r is the relative degree.
    const int m = tf.num_degree();
    const int n = tf.den_degree();
    std::vector<Scalar> out(static_cast<std::size_t>(order + 1), Scalar(0));
    if (tf.is_zero()) {
        return out;
    }
    const int r = n - m;
    auto p = [&](int i) { return i <= m ? tf.num()[m - i] : Scalar(0); };
    auto q = [&](int i) { return i <= n ? tf.den()[n - i] : Scalar(0); };
    // Power-series division P/Q.
    std::vector<Scalar> series(static_cast<std::size_t>(order + 1), Scalar(0));
    for (int i = 0; i <= order; ++i) {
        Scalar acc = p(i);
        for (int j = 1; j <= i; ++j) {
            acc -= q(j) * series[static_cast<std::size_t>(i - j)];
        }
        series[static_cast<std::size_t>(i)] = acc / q(0);
    }
    for (int k = r; k <= order; ++k) {
        out[static_cast<std::size_t>(k)] = series[static_cast<std::size_t>(k - r)];
    }
    return out;
}

} // namespace snb
