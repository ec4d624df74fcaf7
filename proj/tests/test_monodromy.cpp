#include "hamtrace/monodromy.hpp"
#include "hamtrace/threebody.hpp"
#include "test_helpers.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>
#include <random>

using namespace hamtrace;

TEST_CASE("zero field gives the identity flow") {
    auto B = MatrixPath::constant(Mat::Zero(2, 2), 1.0);
    auto fs = integrate_fundamental(B);
    CHECK((fs.at_T() - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((fs.eval(0.37) - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("constant coefficients against the scaling-and-squaring exponential") {
    std::mt19937 rng(3);
    for (int rep = 0; rep < 4; ++rep) {
        const int n = 1 + rep % 2;
        const Mat B0 = ht_test::random_symmetric(2 * n, rng);
        const Mat J = standard_J(n);
        auto B = MatrixPath::constant(B0, 1.5);
        auto fs = integrate_fundamental(B, 0.0, nullptr, 1e-12);
        const Mat expected = (J * B0 * 1.5).exp();
        CHECK((fs.at_T_real() - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("symplecticity drift stays below the default bound on random paths") {
    std::mt19937 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 1 + rep % 3;
        auto B = ht_test::random_trig_path(2 * n, 1.0, rng);
        auto fs = integrate_fundamental(B);
        CHECK(fs.sympl_drift() <= 1e-9);
        CHECK(!fs.drift_flagged());
        // det gamma = 1 at every accepted-step sample
        for (const auto& [t, g] : fs.samples()) CHECK(std::abs(cdet(g) - 1.0) < 1e-9);
        // dense-output interpolant is one order looser
        for (double t : {0.25, 0.5, 0.9}) CHECK(std::abs(cdet(fs.eval(t)) - 1.0) < 1e-8);
    }
}

TEST_CASE("group property: restart at T/2 reproduces one-shot integration") {
    std::mt19937 rng(23);
    auto B = ht_test::random_trig_path(4, 2.0, rng);
    auto full = integrate_fundamental(B, 0.0, nullptr, 1e-11);
    // second half as its own path
    auto Bshift = MatrixPath::builtin("shifted", 4, 1.0,
                                      [&B](double t) { return B.eval(t + 1.0); });
    auto first = MatrixPath::builtin("first", 4, 1.0, [&B](double t) { return B.eval(t); });
    auto g1 = integrate_fundamental(first, 0.0, nullptr, 1e-11);
    auto g2 = integrate_fundamental(Bshift, 0.0, nullptr, 1e-11);
    const CMat combined = g2.at_T() * g1.at_T();
    CHECK((combined - full.at_T()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("identity monodromy is degenerate at omega = 1") {
    auto B = MatrixPath::constant(Mat::Zero(4, 4), 1.0);
    auto bc = BoundaryData::make(Mat::Identity(4, 4), 0.0, 1.0);
    auto rep = monodromy(B, bc, {1.0});
    CHECK((rep.M - CMat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rep.e_total == 4);
    CHECK(rep.classification == "degenerate");
}

TEST_CASE("eigenvalues come in symplectic quadruples") {
    std::mt19937 rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 2;
        auto B = ht_test::random_trig_path(2 * n, 1.0, rng);
        auto bc = BoundaryData::make(Mat::Identity(2 * n, 2 * n), 0.0, 1.0);
        auto mono = monodromy(B, bc);
        for (cplx mu : mono.eigenvalues) {
            double best_inv = 1e300, best_conj = 1e300;
            for (cplx nu2 : mono.eigenvalues) {
                best_inv = std::min(best_inv, std::abs(nu2 - 1.0 / mu));
                best_conj = std::min(best_conj, std::abs(nu2 - std::conj(mu)));
            }
            CHECK(best_inv < 1e-8);
            CHECK(best_conj < 1e-8);
        }
    }
}

TEST_CASE("circular three-body problem: resonant mass parameter has -1 in the spectrum") {
    auto B = make_builtin("threebody", {{"beta", 0.75}, {"e", 0.0}});
    auto bc = BoundaryData::make(Mat::Identity(4, 4), 0.0, 2.0 * PI);
    auto rep = monodromy(B, bc, {cplx(-1.0, 0.0)}, 1e-11);
    int hits = 0;
    for (cplx mu : rep.eigenvalues)
        if (std::abs(mu - cplx(-1.0, 0.0)) < 1e-6) ++hits;
    CHECK(hits == 2);
    CHECK(rep.classification == "degenerate");
}

TEST_CASE("circular three-body problem is hyperbolic at beta = 9") {
    auto B = make_builtin("threebody", {{"beta", 9.0}, {"e", 0.0}});
    auto bc = BoundaryData::make(Mat::Identity(4, 4), 0.0, 2.0 * PI);
    auto rep = monodromy(B, bc, {}, 1e-11);
    CHECK(rep.classification == "hyperbolic");
    CHECK(rep.e_total == 0);
}
