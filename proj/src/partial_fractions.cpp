#include "snb/partial_fractions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace snb {

namespace {

bool roots_coincide(std::complex<double> a, std::complex<double> b, double rel_tol) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= rel_tol * scale;
}

// Removes a common power of s from both polynomials.
void cancel_origin(Eigen::VectorXd& num, Eigen::VectorXd& den) {
    while (num.size() > 1 && den.size() > 1 && num[0] == 0.0 && den[0] == 0.0) {
        num = Eigen::VectorXd(num.tail(num.size() - 1));
        den = Eigen::VectorXd(den.tail(den.size() - 1));
    }
}

double characteristic_scale(const std::vector<SimplePole>& poles) {
    if (poles.empty()) {
        return 1.0;
    }
    double log_sum = 0.0;
    for (const auto& sp : poles) {
        log_sum += std::log(std::abs(sp.pole));
    }
    return std::exp(log_sum / static_cast<double>(poles.size()));
}

} // namespace

std::complex<double> eval(const PartialFractionForm& pf, std::complex<double> s) {
    std::complex<double> acc = pf.feedthrough;
    if (pf.b1 != 0.0) {
        acc += pf.b1 / s;
    }
    if (pf.b2 != 0.0) {
        acc += pf.b2 / (s * s);
    }
    for (const auto& sp : pf.simple_poles) {
        acc += sp.residue / (s - sp.pole);
    }
    return acc;
}

TransferFunction cancel_common_roots(const TransferFunction& tf, double rel_tol) {
    if (tf.is_zero()) {
        return TransferFunction(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
    }
    Eigen::VectorXd num = tf.num();
    Eigen::VectorXd den = tf.den();
    cancel_origin(num, den);
    if (num.size() < 2 || den.size() < 2) {
        return {num, den};
    }

    const Eigen::VectorXcd zeros = poly_roots(num);
    const Eigen::VectorXcd poles = poly_roots(den);
    std::vector<bool> zero_used(static_cast<std::size_t>(zeros.size()), false);
    std::vector<bool> pole_used(static_cast<std::size_t>(poles.size()), false);
    bool any = false;
    for (Eigen::Index i = 0; i < zeros.size(); ++i) {
        for (Eigen::Index j = 0; j < poles.size(); ++j) {
            if (!pole_used[static_cast<std::size_t>(j)] && roots_coincide(zeros[i], poles[j], rel_tol)) {
                zero_used[static_cast<std::size_t>(i)] = true;
                pole_used[static_cast<std::size_t>(j)] = true;
                any = true;
                break;
            }
        }
    }
    if (!any) {
        return {num, den};
    }
    auto keep = [](const Eigen::VectorXcd& roots, const std::vector<bool>& used) {
        std::vector<std::complex<double>> kept;
        for (Eigen::Index k = 0; k < roots.size(); ++k) {
            if (!used[static_cast<std::size_t>(k)]) {
                kept.push_back(roots[k]);
            }
        }
        return Eigen::VectorXcd(Eigen::Map<Eigen::VectorXcd>(kept.data(), static_cast<Eigen::Index>(kept.size())));
    };
    return {poly_from_roots(keep(zeros, zero_used), num[num.size() - 1]),
            poly_from_roots(keep(poles, pole_used), den[den.size() - 1])};
}

PartialFractionForm partial_fractions(const TransferFunction& tf_in, const PartialFractionOptions& opts) {
    PartialFractionForm pf;
    if (tf_in.is_zero()) {
        return pf;
    }
    const TransferFunction tf = cancel_common_roots(tf_in, opts.cancel_tol);
    pf.feedthrough = tf.feedthrough();

    const Eigen::VectorXd& num = tf.num();
    const Eigen::VectorXd& den = tf.den();

    int origin = 0;
    while (origin < den.size() - 1 && den[origin] == 0.0) {
        ++origin;
    }
    if (origin > 2) {
        detail::fail(ErrorCategory::tf_core, "OriginMultiplicityError",
                     "pole at s = 0 of multiplicity " + std::to_string(origin) + " (at most 2 supported)");
    }
    const Eigen::VectorXd q = den.tail(den.size() - origin);
    const Eigen::VectorXcd roots = poly_roots(q);

    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        for (Eigen::Index j = i + 1; j < roots.size(); ++j) {
            if (roots_coincide(roots[i], roots[j], opts.repeat_tol)) {
                detail::fail(ErrorCategory::tf_core, "RepeatedPoleError",
                             "repeated pole near s = (" + std::to_string(roots[i].real()) + ", " +
                                 std::to_string(roots[i].imag()) + ")");
            }
        }
    }

    const Eigen::VectorXd dden = polyder<double>(den);
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        std::complex<double> p = roots[i];
        if (std::abs(p.imag()) <= 1e-12 * std::abs(p)) {
            p = {p.real(), 0.0};
            const std::complex<double> r = polyval<double>(num, p) / polyval<double>(dden, p);
            pf.simple_poles.push_back({p, {r.real(), 0.0}});
        } else if (p.imag() > 0.0) {
            const std::complex<double> r = polyval<double>(num, p) / polyval<double>(dden, p);
            pf.simple_poles.push_back({p, r});
            pf.simple_poles.push_back({std::conj(p), std::conj(r)});
        }
    }
    if (origin > 0) {
        const double n0 = num[0];
        const double q0 = q[0];
        if (origin == 1) {
            pf.b1 = n0 / q0;
        } else {
            const double n1 = num.size() > 1 ? num[1] : 0.0;
            const double q1 = q.size() > 1 ? q[1] : 0.0;
            pf.b2 = n0 / q0;
            pf.b1 = (n1 * q0 - n0 * q1) / (q0 * q0);
        }
    }

    // Recomposition check at fixed off-axis probe points around the pole scale,
    // relative to the size of the individual terms so that probes near a zero
    // of the source do not count as failures.
    const double scale = characteristic_scale(pf.simple_poles);
    for (int k = 0; k < 10; ++k) {
        const double radius = scale * std::pow(10.0, -1.0 + 0.25 * k);
        const double angle = 0.3 + 0.23 * k;
        const std::complex<double> s = std::polar(radius, angle);
        const std::complex<double> orig = eval(tf, s);
        const std::complex<double> rec = eval(pf, s);
        double magnitude = std::abs(pf.feedthrough) + std::abs(pf.b1 / s) + std::abs(pf.b2 / (s * s));
        for (const auto& sp : pf.simple_poles) {
            magnitude += std::abs(sp.residue / (s - sp.pole));
        }
        magnitude = std::max(magnitude, std::abs(orig));
        const double rel = std::abs(rec - orig) / magnitude;
        if (magnitude > 0.0 && rel > opts.verify_tol) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3g", rel);
            detail::fail(ErrorCategory::tf_core, "DecompositionAccuracyError",
                         std::string("recomposed partial fractions deviate from the source by ") + buf +
                             " (relative)");
        }
    }
    return pf;
}

} // namespace snb
