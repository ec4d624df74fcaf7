#include "hamtrace/galerkin.hpp"
#include "hamtrace/integrator.hpp"
#include "hamtrace/sturm_liouville.hpp"
#include "test_helpers.hpp"

#include <doctest.h>
#include <random>

using namespace hamtrace;

namespace {

MatrixPath const_path(double v, double T) {
    return MatrixPath::constant(v * Mat::Identity(1, 1), T);
}

SturmLiouvilleProblem free_particle_with(double r, double T, cplx nu, int sbar_sign) {
    // P = I, Q = 0, base R = 0, perturbation R1 = -R so the pencil is
    // -(d/dt+nu)^2 y - lambda r y = 0
    return SturmLiouvilleProblem(const_path(1.0, T), const_path(0.0, T), const_path(0.0, T),
                                 const_path(-r, T), sbar_sign * Mat::Identity(1, 1), nu);
}

} // namespace

TEST_CASE("first-order form of the free particle") {
    auto slp = free_particle_with(1.0, 1.0, 0.0, +1);
    auto hf = to_hamiltonian(slp);
    const Mat B0 = hf.B.eval(0.3);
    Mat expect = Mat::Zero(2, 2);
    expect(0, 0) = 1.0;
    CHECK((B0 - expect).cwiseAbs().maxCoeff() < 1e-14);
    const Mat D0 = hf.D.eval(0.3);
    CHECK(D0(0, 0) == 0.0);
    CHECK(D0(1, 1) == doctest::Approx(1.0)); // -R1 = +r
}

TEST_CASE("constant-coefficient eigenvalue sums against the closed forms") {
    const double r = 1.7, T = 1.0;
    const cplx nu(0, 0.4);
    const cplx omega = std::exp(nu * T);
    auto slp = free_particle_with(r, T, nu, +1);
    auto rep = lagrangian_trace(slp, 2, 1e-12);

    // order 1: sum 1/lambda = -omega T^2 r / (1-omega)^2
    const cplx aa1 = -omega * T * T * r / ((1.0 - omega) * (1.0 - omega));
    CHECK(std::abs(rep.values[0] - aa1) < 1e-9);

    // order 2: aa2 is the trace against the squared resolvent; the eigenvalue
    // power sum carries one more factor of r
    const cplx aa2 = omega * T * T * T * T / 6.0 * r * (1.0 + 4.0 * omega + omega * omega) /
                     std::pow(1.0 - omega, 4);
    CHECK(std::abs(rep.values[1] - r * aa2) < 1e-9 * (1.0 + std::abs(r * aa2)));

    // brute Fourier series for the first power: lambda_k = -(2 pi i k + nu)^2 / r,
    // with the analytic remainder of the paired terms
    cplx direct = 0.0;
    const long K = 300000;
    for (long k = -K; k <= K; ++k) {
        const cplx mu = cplx(0, 2.0 * PI * k) + nu;
        direct += -r / (mu * mu);
    }
    const double X = static_cast<double>(K) + 0.5;
    direct += r / (2.0 * PI * PI) * X / (X * X + nu * nu / (4.0 * PI * PI));
    CHECK(std::abs(direct - rep.values[0]) < 1e-9 * (1.0 + std::abs(direct)));
}

TEST_CASE("classical anti-periodic sums for constant coefficients") {
    KreinData kd{const_path(1.3, 1.0), 1.0};
    auto [s1, s2] = krein_sums(kd);
    CHECK(s1 == doctest::Approx(1.3 / 4.0).epsilon(1e-10));
    CHECK(s2 == doctest::Approx(1.3 * 1.3 / 48.0).epsilon(1e-8));
}

TEST_CASE("zero-average coefficient kills the first sum") {
    auto R = MatrixPath::builtin("r", 1, 1.0, [](double t) {
        return Mat(std::sin(2.0 * PI * t) * Mat::Identity(1, 1));
    });
    KreinData kd{R, 1.0};
    auto [s1, s2] = krein_sums(kd);
    CHECK(std::abs(s1) < 1e-12);
    CHECK(s2 > 0.0);
}

TEST_CASE("anti-periodic closed forms agree with brute eigenvalues of y'' + l r y = 0") {
    // eigenvalues ((2k+1) pi / T)^2 / r, each double
    const double r = 2.1, T = 1.0;
    KreinData kd{const_path(r, T), T};
    auto [s1, s2] = krein_sums(kd);
    double b1 = 0, b2 = 0;
    const long K = 200000;
    for (long k = 0; k < K; ++k) {
        const double lam = std::pow((2 * k + 1) * PI / T, 2) / r;
        b1 += 2.0 / lam;
        b2 += 2.0 / (lam * lam);
    }
    // midpoint remainder of 2 r T^2/((2k+1) pi)^2 beyond K
    b1 += 2.0 * r * T * T / (PI * PI) * (1.0 / (4.0 * K));
    CHECK(s1 == doctest::Approx(b1).epsilon(1e-8));
    CHECK(s2 == doctest::Approx(b2).epsilon(1e-8));
}

TEST_CASE("random coefficient: second sum against the Galerkin spectrum") {
    std::mt19937 rng(31);
    auto Rm = ht_test::random_spd(1, rng);
    auto R = MatrixPath::builtin("r", 1, 1.0, [Rm](double t) {
        return Mat(Rm * (1.0 + 0.3 * std::cos(2.0 * PI * t)));
    });
    KreinData kd{R, 1.0};
    auto [s1, s2] = krein_sums(kd);

    // y'' + l R y = 0 maps to the pencil with R1 = +R at the negated parameter:
    // the positive-R1 solve returns l' = -l, so odd sums flip sign
    SturmLiouvilleProblem slp(const_path(1.0, 1.0), const_path(0.0, 1.0), const_path(0.0, 1.0),
                              MatrixPath::builtin("r", 1, 1.0, [Rm](double t) {
                                  return Mat(Rm * (1.0 + 0.3 * std::cos(2.0 * PI * t)));
                              }),
                              -Mat::Identity(1, 1), 0.0);
    auto slice = sl_eigenvalues_galerkin(slp, 512);
    auto g1 = reciprocal_power_sum(slice, 1);
    auto g2 = reciprocal_power_sum(slice, 2);
    CHECK(std::abs(s2 - g2.value.real()) < 1e-6 * std::max(1.0, std::abs(s2)));
    CHECK(std::abs(s1 + g1.value.real()) < 2e-5 * std::max(1.0, std::abs(s1)));
}

TEST_CASE("determinant is invariant under the triangular change of frame") {
    std::mt19937 rng(37);
    // smooth periodic P (invertible), Q, R with Sbar = I
    auto P = ht_test::random_spd_path(1, 1.0, rng);
    auto Q = ht_test::random_trig_path(1, 1.0, rng, 0.4);
    auto R = ht_test::random_trig_path(1, 1.0, rng, 0.8);
    auto R1 = ht_test::random_spd_path(1, 1.0, rng);
    SturmLiouvilleProblem slp(P, Q, R, R1, Mat::Identity(1, 1), cplx(0, 0.3));

    const double lambda = 0.7;
    auto Bl = to_hamiltonian_path(slp, lambda);
    auto fs = integrate_fundamental(Bl, 0.0, nullptr, 1e-12);
    auto hf = to_hamiltonian(slp);
    const cplx omega = hf.bc.omega;
    const CMat Sd = hf.bc.S.cast<cplx>();
    const cplx direct = cdet(Sd * fs.at_T() - omega * CMat::Identity(2, 2));

    // eta(t) = [[P, Q],[0, I]] conjugation of the normalized flow
    auto eta = [&](double t) {
        Mat e = Mat::Zero(2, 2);
        e(0, 0) = P.eval(t)(0, 0);
        e(0, 1) = Q.eval(t)(0, 0);
        e(1, 1) = 1.0;
        return e;
    };
    const Mat e0 = eta(0.0);
    const CMat ghat = (e0.inverse() * fs.at_T_real() * e0).cast<cplx>();
    const cplx conjugated = cdet(Sd * ghat - omega * CMat::Identity(2, 2));
    CHECK(std::abs(direct - conjugated) < 1e-9 * (1.0 + std::abs(direct)));
}

TEST_CASE("sign relation between the second-order and first-order power sums") {
    std::mt19937 rng(41);
    auto P = const_path(1.0, 1.0);
    auto Q = const_path(0.0, 1.0);
    auto R = ht_test::random_trig_path(1, 1.0, rng, 0.5);
    auto R1 = ht_test::random_spd_path(1, 1.0, rng);
    SturmLiouvilleProblem slp(P, Q, R, R1, Mat::Identity(1, 1), cplx(0, 0.35));

    // first-order side
    auto hf = to_hamiltonian(slp);
    auto tr = trace_power(hf.B, hf.D, hf.bc, 4);

    // second-order side via dense frames
    const FourierFrame fr = FourierFrame::make(1.0, +1, 160);
    const CMat A = assemble_second_order(P, Q, R, slp.nu(), fr);
    const CMat R1m = assemble_multiplication(R1, fr);
    const CMat F = Eigen::PartialPivLU<CMat>(A).solve(CMat(R1m));
    CMat Fp = F;
    for (int m = 2; m <= 4; ++m) {
        Fp = Fp * F;
        const cplx second = Fp.trace();
        const cplx expected = (m % 2 == 0 ? 1.0 : -1.0) * second;
        CHECK(std::abs(tr.values[m - 1] - expected) < 2e-4 * (1.0 + std::abs(expected)));
    }
}

TEST_CASE("second-order and first-order spectra coincide with multiplicity") {
    std::mt19937 rng(43);
    auto P = const_path(1.0, 1.0);
    auto Q = const_path(0.0, 1.0);
    auto R = ht_test::random_trig_path(1, 1.0, rng, 0.4);
    auto R1 = ht_test::random_spd_path(1, 1.0, rng);
    SturmLiouvilleProblem slp(P, Q, R, R1, Mat::Identity(1, 1), cplx(0, 0.3));

    auto galerkin = sl_eigenvalues_galerkin(slp, 256);
    auto hf = to_hamiltonian(slp);
    auto shooting = eigenvalues_by_shooting(hf.B, hf.D, hf.bc, 1000.0, 800, 1e-10, true);

    // compare inside the joint window
    for (const auto& s : shooting.eigenvalues) {
        double best = 1e300;
        for (const auto& g : galerkin.eigenvalues) best = std::min(best, std::abs(g.lambda - s.lambda));
        CHECK(best < 1e-6 * std::max(1.0, std::abs(s.lambda)));
    }
    CHECK(shooting.total_multiplicity() > 10);
}
