#include "hamtrace/galerkin.hpp"
#include "hamtrace/iterated_integrals.hpp"
#include "test_helpers.hpp"

#include <doctest.h>
#include <random>

using namespace hamtrace;

TEST_CASE("alpha = 0 gives determinant one at every level") {
    std::mt19937 rng(3);
    auto B = ht_test::random_trig_path(2, 1.0, rng, 0.4);
    auto D = ht_test::random_spd_path(2, 1.0, rng, 0.5);
    auto bc = BoundaryData::make(Mat::Identity(2, 2), cplx(0, 0.3), 1.0);
    auto td = truncated_fredholm(B, D, bc, 0.0, 32);
    for (cplx v : td.values) CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("log determinant matches the first trace coefficients at small coupling") {
    std::mt19937 rng(7);
    auto B = ht_test::random_trig_path(2, 1.0, rng, 0.5);
    auto D = ht_test::random_spd_path(2, 1.0, rng, 0.6);
    auto bc = BoundaryData::make(Mat::Identity(2, 2), cplx(0, 0.35), 1.0);
    const cplx alpha(0.1, 0.0);

    auto td = truncated_fredholm(B, D, bc, alpha, 128);
    auto tr = trace_power(B, D, bc, 4);
    cplx series = 0.0;
    for (int m = 1; m <= 4; ++m)
        series -= std::pow(alpha, m) / static_cast<double>(m) * tr.values[m - 1];
    CHECK(std::abs(std::log(td.extrapolated) - series) < 1e-4);
}

TEST_CASE("free operator negative counts match the twist layout") {
    // A - nu J on the integer frame: eigenvalues 2 pi k -/+ u per branch
    const double u = 0.7;
    auto B = MatrixPath::constant(Mat::Zero(2, 2), 1.0);
    const FourierFrame fr = FourierFrame::make(1.0, +1, 8);
    const CMat T = assemble_first_order(B, cplx(0, u), fr);
    const CMat H = 0.5 * (T + T.adjoint());
    // each mode block has eigenvalues +/-(2 pi k + u): exactly one negative per block
    CHECK(negative_count(H) == 17);
}

TEST_CASE("unsupported boundary matrices are rejected for frame work") {
    Mat S = standard_J(1); // symplectic orthogonal rotation, but not +/-I
    CHECK_THROWS_AS(frame_sign(S), domain_error);
}

TEST_CASE("truncation sequence is monotone for a second-order style problem") {
    // second-order problem mapped to first order has a trace-class perturbation
    std::mt19937 rng(11);
    auto B = MatrixPath::builtin("kn", 2, 1.0, [](double) {
        Mat K(2, 2);
        K << 1, 0, 0, 0;
        return K;
    });
    auto R = ht_test::random_spd(1, rng);
    auto D = MatrixPath::builtin("d", 2, 1.0, [R](double) {
        Mat Dm = Mat::Zero(2, 2);
        Dm(1, 1) = R(0, 0);
        return Dm;
    });
    auto bc = BoundaryData::make(-Mat::Identity(2, 2), 0.0, 1.0);
    auto td = truncated_fredholm(B, D, bc, 1.0, 64);
    REQUIRE(td.values.size() == 3);
    CHECK(std::abs(td.values[2] - td.values[1]) <= std::abs(td.values[1] - td.values[0]) + 1e-12);
}
