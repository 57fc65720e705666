#include "snb/error.hpp"
#include "snb/partial_fractions.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

using namespace snb;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

bool throws_kind(auto&& fn, const std::string& kind) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind() == kind;
    }
    return false;
}

double recomposition_error(const TransferFunction& tf, const PartialFractionForm& pf) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double w = std::pow(10.0, -2.0 + 8.0 * i / 99.0);
        const std::complex<double> s(0.0, w);
        const auto ref = eval(tf, s);
        worst = std::max(worst, std::abs(eval(pf, s) - ref) / (1.0 + std::abs(ref)));
    }
    return worst;
}

bool conjugate_closed(const PartialFractionForm& pf) {
    for (const SimplePole& a : pf.simple_poles) {
        if (a.pole.imag() == 0.0) {
            continue;
        }
        bool found = false;
        for (const SimplePole& b : pf.simple_poles) {
            if (b.pole == std::conj(a.pole) && b.residue == std::conj(a.residue)) {
                found = true;
            }
        }
        if (!found) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("integrator with a lag", "[tf_core][partial_fractions]") {
    const double wp = 250.0;
    const TransferFunction tf({1.0}, {0.0, 1.0, 1.0 / wp});
    const PartialFractionForm pf = partial_fractions(tf);
    CHECK_THAT(pf.b1, WithinRel(1.0, 1e-12));
    CHECK(pf.b2 == 0.0);
    CHECK(pf.feedthrough == 0.0);
    REQUIRE(pf.simple_poles.size() == 1);
    CHECK_THAT(pf.simple_poles[0].pole.real(), WithinRel(-wp, 1e-12));
    CHECK_THAT(pf.simple_poles[0].residue.real(), WithinRel(-1.0, 1e-12));
    CHECK(recomposition_error(tf, pf) < 1e-9);
}

TEST_CASE("lead-lag keeps its feedthrough", "[tf_core][partial_fractions]") {
    const double wz = 40.0;
    const double wp = 900.0;
    const TransferFunction tf({1.0, 1.0 / wz}, {1.0, 1.0 / wp});
    const PartialFractionForm pf = partial_fractions(tf);
    CHECK_THAT(pf.feedthrough, WithinRel(wp / wz, 1e-12));
    REQUIRE(pf.simple_poles.size() == 1);
    CHECK_THAT(pf.simple_poles[0].pole.real(), WithinRel(-wp, 1e-12));
    CHECK_THAT(pf.simple_poles[0].residue.real(), WithinRel(wp * (1.0 - wp / wz), 1e-12));
    CHECK_THAT(eval(pf, 0.0).real(), WithinRel(1.0, 1e-12));
}

TEST_CASE("double integrator", "[tf_core][partial_fractions]") {
    const PartialFractionForm pf = partial_fractions(TransferFunction({1.0}, {0.0, 0.0, 1.0}));
    CHECK(pf.b2 == 1.0);
    CHECK(pf.b1 == 0.0);
    CHECK(pf.feedthrough == 0.0);
    CHECK(pf.simple_poles.empty());
}

TEST_CASE("origin terms of order two with a zero", "[tf_core][partial_fractions]") {
    // (1 + s/4) / (s^2 (1 + s/9))
    const TransferFunction tf({1.0, 0.25}, {0.0, 0.0, 1.0, 1.0 / 9.0});
    const PartialFractionForm pf = partial_fractions(tf);
    CHECK_THAT(pf.b2, WithinRel(1.0, 1e-12));
    CHECK_THAT(pf.b1, WithinRel(0.25 - 1.0 / 9.0, 1e-12));
    CHECK(recomposition_error(tf, pf) < 1e-9);
}

TEST_CASE("resonant power stage decomposes into a conjugate pair", "[tf_core][partial_fractions]") {
    const double L = 20e-3;
    const double C = 47e-6;
    const double R = 22.0;
    const TransferFunction tf({1.0 / R, C}, {1.0, L / R, L * C});
    const PartialFractionForm pf = partial_fractions(tf);
    REQUIRE(pf.simple_poles.size() == 2);
    CHECK(pf.simple_poles[0].pole.imag() != 0.0);
    CHECK(conjugate_closed(pf));
    CHECK(recomposition_error(tf, pf) < 1e-9);
    for (double x : {-3.0, 0.5, 17.0, 1e4}) {
        CHECK(std::abs(eval(pf, std::complex<double>(x, 0.0)).imag()) < 1e-12);
    }
}

TEST_CASE("random real-coefficient functions recompose", "[tf_core][partial_fractions][property]") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> mag(0.1, 50.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        Eigen::VectorXcd poles(4);
        poles[0] = {-mag(rng), 0.0};
        poles[1] = {-mag(rng), 0.0};
        const std::complex<double> c(-mag(rng), mag(rng));
        poles[2] = c;
        poles[3] = std::conj(c);
        const Eigen::VectorXd den = poly_from_roots(poles, 1.0);
        Eigen::VectorXd num(3);
        num << mag(rng), unit(rng), unit(rng);
        const TransferFunction tf(num, den);
        const PartialFractionForm pf = partial_fractions(tf);
        CHECK(conjugate_closed(pf));
        CHECK(recomposition_error(tf, pf) < 1e-9);
        for (const SimplePole& p : pf.simple_poles) {
            CHECK(p.pole != std::complex<double>(0.0, 0.0));
        }
    }
}

TEST_CASE("near-cancelling roots are removed", "[tf_core][partial_fractions]") {
    // (s + 5 (1 + 1e-10)) / ((s + 5)(s + 2))
    const TransferFunction tf({5.0 * (1.0 + 1e-10), 1.0}, {10.0, 7.0, 1.0});
    const TransferFunction reduced = cancel_common_roots(tf);
    CHECK(reduced.den_degree() == 1);
    const PartialFractionForm pf = partial_fractions(tf);
    REQUIRE(pf.simple_poles.size() == 1);
    CHECK_THAT(pf.simple_poles[0].pole.real(), WithinRel(-2.0, 1e-9));

    // Exact common factor of s.
    const TransferFunction s_common({0.0, 2.0}, {0.0, 1.0, 1.0});
    CHECK(cancel_common_roots(s_common).den_degree() == 1);
}

TEST_CASE("unsupported pole structures are rejected", "[tf_core][partial_fractions]") {
    CHECK(throws_kind([] { (void)partial_fractions(TransferFunction({1.0}, {0.0, 0.0, 0.0, 1.0})); },
                      "OriginMultiplicityError"));
    // 1 / (s + 3)^2
    CHECK(throws_kind([] { (void)partial_fractions(TransferFunction({1.0}, {9.0, 6.0, 1.0})); },
                      "RepeatedPoleError"));
}
