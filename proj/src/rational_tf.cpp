#include "snb/rational_tf.hpp"

#include <Eigen/Eigenvalues>

namespace snb {

Eigen::VectorXcd poly_roots(const Eigen::VectorXd& ascending) {
    const Eigen::Index n = ascending.size() - 1;
    if (n < 1) {
        return Eigen::VectorXcd(0);
    }
    const double lead = ascending[n];
    if (lead == 0.0) {
        detail::fail(ErrorCategory::tf_core, "InvalidPolynomial",
                     "poly_roots requires a nonzero leading coefficient");
    }
    if (n == 1) {
        Eigen::VectorXcd r(1);
        r[0] = -ascending[0] / lead;
        return r;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    companion.bottomLeftCorner(n - 1, n - 1).setIdentity();
    for (Eigen::Index k = 0; k < n; ++k) {
        companion(k, n - 1) = -ascending[k] / lead;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    if (es.info() != Eigen::Success) {
        detail::fail(ErrorCategory::tf_core, "RootFindingError",
                     "companion-matrix eigenvalue iteration did not converge");
    }
    return es.eigenvalues();
}

Eigen::VectorXd poly_from_roots(const Eigen::VectorXcd& roots, double lead) {
    Coeffs<std::complex<double>> acc = Coeffs<std::complex<double>>::Constant(1, lead);
    for (Eigen::Index k = 0; k < roots.size(); ++k) {
        Coeffs<std::complex<double>> factor(2);
        factor << -roots[k], 1.0;
        acc = polymul(acc, factor);
    }
    return acc.real();
}

} // namespace snb
