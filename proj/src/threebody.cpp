#include "hamtrace/threebody.hpp"

#include "hamtrace/boundary.hpp"
#include "hamtrace/integrator.hpp"
#include "hamtrace/iterated_integrals.hpp"
#include "hamtrace/matrix_path.hpp"
#include "hamtrace/monodromy.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace hamtrace::threebody {

double beta_of_masses(double m1, double m2, double m3) {
    const double s = m1 + m2 + m3;
    if (!(m1 > 0 && m2 > 0 && m3 > 0)) throw config_error("masses must be positive");
    return 27.0 * (m1 * m2 + m1 * m3 + m2 * m3) / (s * s);
}

void check_beta_e(double beta, double e) {
    if (beta < 0.0 || beta > 9.0) throw config_error("beta must lie in [0,9]");
    if (e < 0.0 || e >= 1.0) throw config_error("eccentricity must lie in [0,1)");
}

Mat B_path(double beta, double e, double t) {
    const double s9 = std::sqrt(9.0 - beta);
    const double den = 2.0 * (1.0 + e * std::cos(t));
    Mat B(4, 4);
    B << 1, 0, 0, 1,
         0, 1, -1, 0,
         0, -1, (2.0 * e * std::cos(t) - 1.0 - s9) / den, 0,
         1, 0, 0, (2.0 * e * std::cos(t) - 1.0 + s9) / den;
    return B;
}

Mat K_beta(double beta) {
    const double s9 = std::sqrt(9.0 - beta);
    Mat K = Mat::Zero(4, 4);
    K(2, 2) = (3.0 + s9) / 2.0;
    K(3, 3) = (3.0 - s9) / 2.0;
    return K;
}

CMat Diagonalization::S_beta() const {
    CMat S = CMat::Zero(4, 4);
    S(0, 2) = -theta1;
    S(2, 0) = theta1;
    S(1, 3) = -theta2;
    S(3, 1) = theta2;
    return S;
}

CMat Diagonalization::M_omega(cplx omega) const {
    CMat M = CMat::Zero(4, 4);
    for (int j = 0; j < 4; ++j) {
        const cplx Ej = std::exp(cplx(0, 2.0 * PI) * theta(j));
        const cplx den = Ej - omega;
        if (std::abs(den) < 1e-13) throw domain_error("omega is a circular-monodromy eigenvalue");
        M(j, j) = Ej / den;
    }
    return M;
}

Diagonalization diagonalize(double beta) {
    if (beta <= 1e-3 || std::abs(beta - 1.0) <= 1e-3 || beta > 9.0)
        throw domain_error("normal-form transformation singular near beta in {0, 1}");

    const cplx s1 = std::sqrt(cplx(1.0 - beta, 0.0)); // +i sqrt(beta-1) for beta > 1
    const cplx s9 = std::sqrt(cplx(9.0 - beta, 0.0));
    const cplx q = std::pow(cplx(1.0 - beta, 0.0), 0.25);
    const cplx rp = std::sqrt(4.0 + s1 - s9);
    const cplx rm = std::sqrt(4.0 - s1 - s9);
    const cplx tp14 = std::pow(2.0 + 2.0 * s1, 0.25);
    const cplx tp34 = std::pow(2.0 + 2.0 * s1, 0.75);
    const cplx tm14 = std::pow(2.0 - 2.0 * s1, 0.25);
    const cplx tm34 = std::pow(2.0 - 2.0 * s1, 0.75);

    Diagonalization D;
    D.beta = beta;
    D.theta1 = -std::sqrt((1.0 - s1) / 2.0);
    D.theta2 = std::sqrt((1.0 + s1) / 2.0);
    D.theta = CVec(4);
    D.theta << D.theta1, D.theta2, -D.theta1, -D.theta2;

    const cplx p11_12 = tp14 * (s9 - s1) / (2.0 * q * rp);
    const cplx p11_21 = -tm34 * (2.0 + s9 - s1) / (2.0 * q * (3.0 + s9) * rm);
    const cplx p12_11 = -tm14 * (s9 + s1) / (2.0 * q * rm);
    const cplx p12_22 = tp34 * (2.0 + s9 + s1) / (2.0 * q * (3.0 + s9) * rp);
    const cplx p21_11 = tm34 * (4.0 + s9 + s1) / (2.0 * q * (3.0 + s9) * rm);
    const cplx p21_22 = -2.0 * tp14 / (q * rp);
    const cplx p22_12 = -tp34 * (s9 + 4.0 - s1) / (2.0 * q * (3.0 + s9) * rp);
    const cplx p22_21 = 2.0 * tm14 / (q * rm);

    D.P = CMat::Zero(4, 4);
    D.P(0, 1) = p11_12;
    D.P(1, 0) = p11_21;
    D.P(0, 2) = p12_11;
    D.P(1, 3) = p12_22;
    D.P(2, 0) = p21_11;
    D.P(3, 1) = p21_22;
    D.P(2, 3) = p22_12;
    D.P(3, 2) = p22_21;

    D.U = CMat::Zero(4, 4);
    const double is2 = 1.0 / std::sqrt(2.0);
    D.U.block(0, 0, 2, 2) = is2 * CMat::Identity(2, 2);
    D.U.block(0, 2, 2, 2) = cplx(0, is2) * CMat::Identity(2, 2);
    D.U.block(2, 0, 2, 2) = is2 * CMat::Identity(2, 2);
    D.U.block(2, 2, 2, 2) = cplx(0, -is2) * CMat::Identity(2, 2);

    D.d1 = (3.0 + std::sqrt(9.0 - beta)) / 2.0;
    D.d2 = (3.0 - std::sqrt(9.0 - beta)) / 2.0;
    D.a = p21_11 * p21_11 * D.d1;
    D.b = p21_11 * p22_12 * D.d1;
    D.c = p22_12 * p22_12 * D.d1;
    D.h = p21_22 * p21_22 * D.d2;
    D.f = p21_22 * p22_21 * D.d2;
    D.g = p22_21 * p22_21 * D.d2;

    // Dtilde = U^{-T} (P^T K P) U^{-1}; U is unitary so U^{-1} = U^H, U^{-T} = conj(U)
    const CMat K = K_beta(beta).cast<cplx>();
    const CMat Dtilde = D.U.conjugate() * (D.P.transpose() * K * D.P) * D.U.adjoint();
    D.JD_tilde = standard_J(2).cast<cplx>() * Dtilde;
    return D;
}

namespace {

// I1(d) = int_0^{2pi} int_0^t cos^-(t) cos^-(s) e^{i d (t-s)} ds dt
cplx kernel_ordered(cplx d) {
    const cplx d2 = d * d;
    const cplx eipd = std::exp(cplx(0, PI) * d);
    return (2.0 + 2.0 * eipd + cplx(0, PI) * d * (d2 - 1.0)) / (2.0 * (d2 - 1.0) * (d2 - 1.0));
}

// I2(d) = int int over the full square of the same integrand
cplx kernel_full(cplx d) {
    const cplx d2 = d * d;
    const cplx eipd = std::exp(cplx(0, PI) * d);
    return (2.0 + eipd + 1.0 / eipd) / ((d2 - 1.0) * (d2 - 1.0));
}

double require_real(cplx v, double tol, const char* what) {
    if (std::abs(v.imag()) > tol * (1.0 + std::abs(v)))
        throw domain_error(std::string(what) + ": imaginary residue too large");
    return v.real();
}

} // namespace

double f_closed(double beta, cplx omega, double tol_res, double tol_pole) {
    auto D = diagonalize(beta);
    for (int j = 0; j < 4; ++j) {
        const cplx Ej = std::exp(cplx(0, 2.0 * PI) * D.theta(j));
        if (std::abs(Ej - omega) < tol_pole)
            throw domain_error("f pole: omega at a circular-monodromy eigenvalue");
    }
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 4; ++m) {
            const cplx d = D.theta(m) - D.theta(n);
            if (std::abs(d * d - 1.0) < tol_res)
                throw domain_error("f resonance shell: |(theta_m - theta_n)^2 - 1| too small");
        }

    const CMat& JD = D.JD_tilde;
    const CMat M = D.M_omega(omega);
    cplx f1 = 0.0, f2 = 0.0;
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 4; ++m) {
            const cplx w = JD(n, m) * JD(m, n);
            if (w == cplx(0.0)) continue;
            const cplx d = D.theta(m) - D.theta(n);
            f1 += w * M(n, n) * kernel_ordered(d);
            f2 += w * M(n, n) * M(m, m) * kernel_full(d);
        }
    return require_real(2.0 * f1 - f2, 1e-9, "f_closed");
}

double f_quadrature(double beta, cplx omega, int sign, double tol) {
    auto D = diagonalize(beta);
    const CMat M = D.M_omega(omega);
    const CMat& JD = D.JD_tilde;

    // augmented pass: W(t) = int_0^t c(s) E(-s) JD E(s) ds,  Z' = c E(-t) JD E(t) W
    auto E = [&](double t) {
        CMat out = CMat::Zero(4, 4);
        for (int j = 0; j < 4; ++j) out(j, j) = std::exp(cplx(0, 1) * D.theta(j) * t);
        return out;
    };
    auto rhs = [&](double t, const CMat& y) -> CMat {
        const double c = std::cos(t);
        const double part = 0.5 * (c + sign * std::abs(c));
        CMat out = CMat::Zero(4, 8);
        if (part != 0.0) {
            const CMat kern = part * (E(-t) * JD * E(t));
            out.leftCols(4) = kern;
            out.rightCols(4) = kern * y.leftCols(4);
        }
        return out;
    };
    Dopri5<cplx> solver(rhs, tol, tol);
    const CMat yT =
        solver.integrate(0.0, CMat::Zero(4, 8), 2.0 * PI, {PI / 2.0, 3.0 * PI / 2.0}, false);
    const CMat W = yT.leftCols(4), Z = yT.rightCols(4);
    const cplx val = 2.0 * (Z * M).trace() - (W * M * W * M).trace();
    return require_real(val, 1e-8, "f_quadrature");
}

double f_direct(double beta, cplx omega, int sign, double tol) {
    const MatrixPath B = make_builtin("threebody", {{"beta", beta}, {"e", 0.0}});
    const MatrixPath K =
        make_builtin(sign < 0 ? "threebody_kminus" : "threebody_kplus", {{"beta", beta}});
    auto st = compute_Mk(B, K, 2, tol);

    const CMat M = st.gammaT.cast<cplx>();
    const CMat A = M - omega * CMat::Identity(4, 4);
    Eigen::PartialPivLU<CMat> lu(A);
    Eigen::ComplexEigenSolver<CMat> es(M);
    for (int i = 0; i < 4; ++i)
        if (std::abs(es.eigenvalues()(i) - omega) < 1e-10)
            throw domain_error("f pole: omega at a circular-monodromy eigenvalue");
    const CMat W = lu.solve(M);
    const CMat M1 = st.M[1].cast<cplx>(), M2 = st.M[2].cast<cplx>();
    const cplx val = -2.0 * (M2 * W).trace() + (M1 * W * M1 * W).trace();
    return require_real(val, 1e-8, "f_direct");
}

double f_eval(double beta, cplx omega) {
    const bool p_safe = (beta > 1e-3) && (std::abs(beta - 1.0) > 1e-3) && beta <= 9.0;
    if (p_safe) {
        try {
            return f_closed(beta, omega);
        } catch (const domain_error&) {
            try {
                return f_quadrature(beta, omega);
            } catch (const domain_error&) {
                // fall through to the original frame
            }
        }
    }
    return f_direct(beta, omega);
}

namespace {

// golden-section maximum refinement on [lo, hi]
template <class F>
std::pair<double, double> golden_max(const F& f, double lo, double hi, double xtol) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

} // namespace

double f_hat(double beta, int scan) {
    if (beta <= 1.0) throw domain_error("sup of f over the circle is finite only for beta > 1");
    auto fu = [&](double u) { return f_eval(beta, std::exp(cplx(0, 2.0 * PI) * u)); };

    std::vector<double> vals(scan);
    double vmax = -1e300;
    for (int i = 0; i < scan; ++i) {
        vals[i] = fu(static_cast<double>(i) / scan);
        vmax = std::max(vmax, vals[i]);
    }
    // refine every local maximum above 0.9 of the scan max
    double best = vmax;
    for (int i = 0; i < scan; ++i) {
        const double prev = vals[(i + scan - 1) % scan], next = vals[(i + 1) % scan];
        if (vals[i] >= prev && vals[i] >= next && vals[i] > 0.9 * vmax) {
            const double u0 = (static_cast<double>(i) - 1.0) / scan;
            const double u1 = (static_cast<double>(i) + 1.0) / scan;
            best = std::max(best, golden_max(fu, u0, u1, 1e-10).second);
        }
    }
    return best;
}

double g_closed(double beta, cplx nu) {
    if (!(beta > 1.0 && beta <= 9.0)) throw domain_error("g closed form defined for beta in (1,9]");
    if (std::abs(nu.real()) > 1e-12) throw domain_error("g requires purely imaginary nu");
    const double u = nu.imag();
    const cplx s1 = std::sqrt(cplx(1.0 - beta, 0.0));
    const cplx z = std::sqrt(-1.0 + s1);
    const cplx Em = std::exp(-std::sqrt(2.0) * PI * z), Ep = std::exp(std::sqrt(2.0) * PI * z);
    const cplx den = 2.0 * std::cos(2.0 * PI * u) - Em - Ep;
    if (std::abs(den) < 1e-12) throw domain_error("g pole: omega at a circular-monodromy eigenvalue");
    const cplx C = std::sqrt(2.0) * (-3.0 - beta + 3.0 * s1) / (4.0 * s1 * z);
    return 2.0 * (C * (Em - Ep) / den).real();
}

double g_via_trace(double beta, cplx nu) {
    auto D = diagonalize(beta);
    const cplx omega = std::exp(2.0 * PI * nu);
    const CMat M = D.M_omega(omega);
    const cplx val = (cplx(0, 1) * D.JD_tilde * M).trace();
    return require_real(val, 1e-9, "g_via_trace");
}

double g_hat(double beta, int scan) {
    auto gu = [&](double u) { return g_closed(beta, cplx(0, u)); };
    double vmax = -1e300;
    int imax = 0;
    for (int i = 0; i < scan; ++i) {
        const double v = gu(static_cast<double>(i) / scan);
        if (v > vmax) {
            vmax = v;
            imax = i;
        }
    }
    const double u0 = (static_cast<double>(imax) - 1.0) / scan;
    const double u1 = (static_cast<double>(imax) + 1.0) / scan;
    return std::max(vmax, golden_max(gu, u0, u1, 1e-10).second);
}

double h_bound(double beta) {
    if (!(beta > 1.0 && beta <= 9.0)) throw domain_error("bound defined for beta in (1,9]");
    const cplx s1 = std::sqrt(cplx(1.0 - beta, 0.0));
    const cplx z = std::sqrt(-1.0 + s1);
    const double ch = z.real(), dh = z.imag();
    const double s2pi = std::sqrt(2.0) * PI;
    const double num = std::abs((std::exp(-s2pi * ch) - std::exp(s2pi * ch)) * std::sin(s2pi * dh));
    const double den =
        std::sqrt(std::exp(-2.0 * s2pi * ch) + std::exp(2.0 * s2pi * ch) - 2.0 * std::cos(2.0 * s2pi * dh));
    const double pre = std::sqrt(2.0 * (beta - 1.0)) / (std::pow(beta, 0.25) * std::sqrt(beta + 15.0));
    return pre * num / den;
}

double ecc_weight(double e) {
    if (e < 0.0 || e >= 1.0) throw config_error("eccentricity must lie in [0,1)");
    if (e == 0.0) return 0.0;
    return PI - 4.0 / std::sqrt(1.0 - e * e) * std::atan(std::sqrt((1.0 - e) / (1.0 + e)));
}

namespace {

// solve ecc_weight(e) = target on [0, 1); the weight is monotone increasing
double solve_ecc_weight(double target) {
    if (target <= 0.0) return 0.0;
    double lo = 0.0, hi = 1.0 - 1e-9;
    if (ecc_weight(hi) <= target) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ecc_weight(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

template <class F>
std::vector<CurvePoint> map_curve(const std::vector<double>& betas, const F& f, int jobs) {
    std::vector<CurvePoint> out(betas.size());
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, jobs);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= betas.size()) return;
            out[i] = CurvePoint{betas[i], f(betas[i])};
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs - 1; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return out;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

} // namespace

std::vector<RegionCurve> region_curves(int resolution, int jobs) {
    if (resolution < 50) throw config_error("need at least 50 samples per curve");
    std::vector<RegionCurve> curves;
    const cplx minus1(-1.0, 0.0);
    const cplx om3 = std::exp(cplx(0, std::sqrt(2.0) * PI));

    {
        // e = 1/(1+sqrt(f(beta,-1))) on [0, 3/4]; left endpoint by extrapolation,
        // right endpoint pinned at (3/4, 0) where f blows up
        auto betas = linspace(0.01, 0.75 - 2e-3, resolution - 1);
        RegionCurve c{"G1", "e = 1/(1+sqrt(f(beta,-1)))", {}};
        c.samples = map_curve(betas, [&](double b) { return 1.0 / (1.0 + std::sqrt(f_eval(b, minus1))); }, jobs);
        c.samples.push_back({0.75, 0.0});
        curves.push_back(std::move(c));
    }
    {
        auto betas = linspace(0.75 + 2e-3, 1.0 - 2e-3, resolution - 1);
        RegionCurve c{"G2", "e = 1/sqrt(f(beta,-1))", {}};
        c.samples = map_curve(betas, [&](double b) { return 1.0 / std::sqrt(f_eval(b, minus1)); }, jobs);
        c.samples.insert(c.samples.begin(), {0.75, 0.0});
        curves.push_back(std::move(c));
    }
    {
        auto betas = linspace(0.75 + 2e-3, 1.0 - 2e-3, resolution);
        RegionCurve c{"G3", "e = 1/(1+sqrt(f(beta,exp(i sqrt2 pi))))", {}};
        c.samples = map_curve(betas, [&](double b) { return 1.0 / (1.0 + std::sqrt(f_eval(b, om3))); }, jobs);
        curves.push_back(std::move(c));
    }
    {
        auto betas = linspace(1.0 + 2e-3, 9.0, resolution);
        RegionCurve c{"G4", "e = 1/sqrt(sup_omega f(beta,omega))", {}};
        c.samples = map_curve(betas, [&](double b) { return 1.0 / std::sqrt(f_hat(b)); }, jobs);
        curves.push_back(std::move(c));
    }
    {
        auto betas = linspace(1.0 + 2e-3, 9.0, resolution);
        RegionCurve c{"G5", "weight(e) = 1/sup_nu g(beta,nu)", {}};
        c.samples = map_curve(betas, [&](double b) { return solve_ecc_weight(1.0 / g_hat(b)); }, jobs);
        curves.push_back(std::move(c));
    }
    {
        auto betas = linspace(1.0 + 2e-3, 9.0, resolution);
        RegionCurve c{"G6", "e = 1/sqrt(f(beta,-1))", {}};
        c.samples = map_curve(betas, [&](double b) { return 1.0 / std::sqrt(f_eval(b, minus1)); }, jobs);
        curves.push_back(std::move(c));
    }
    {
        auto betas = linspace(1.0 + 2e-3, 9.0, resolution);
        RegionCurve c{"G7", "weight(e) = 1/g(beta, i/2)", {}};
        c.samples = map_curve(
            betas, [&](double b) { return solve_ecc_weight(1.0 / g_closed(b, cplx(0, 0.5))); }, jobs);
        curves.push_back(std::move(c));
    }
    return curves;
}

ClassifyResult classify_point(double beta, double e, bool cross_check) {
    check_beta_e(beta, e);
    ClassifyResult res;
    res.verdict = "inconclusive";
    res.criterion = "none";

    const cplx minus1(-1.0, 0.0);
    try {
        if (beta < 0.75 - 2e-3) {
            if (e < 1.0 / (1.0 + std::sqrt(f_eval(beta, minus1)))) {
                res.verdict = "linear-stable";
                res.criterion = "order-2 trace bound at omega=-1";
                res.normal_form = "R(t1)*R(t2), t1,t2 in (pi,2pi)";
            }
        } else if (beta > 0.75 + 2e-3 && beta < 1.0 - 2e-3) {
            const cplx om3 = std::exp(cplx(0, std::sqrt(2.0) * PI));
            if (e < 1.0 / std::sqrt(f_eval(beta, minus1)) &&
                e < 1.0 / (1.0 + std::sqrt(f_eval(beta, om3)))) {
                res.verdict = "linear-stable";
                res.criterion = "order-2 trace bounds at omega=-1 and omega=exp(i sqrt2 pi)";
                res.normal_form = "R(t1)*R(t2), t1 in ((2-sqrt2)pi,pi), t2 in (sqrt2 pi,2pi)";
            }
        } else if (beta > 1.0 + 2e-3) {
            if (e < 1.0 / std::sqrt(f_hat(beta))) {
                res.verdict = "hyperbolic";
                res.criterion = "order-2 trace bound, sup over the circle";
            } else if (ecc_weight(e) < 1.0 / g_hat(beta)) {
                res.verdict = "hyperbolic";
                res.criterion = "first-order trace bound, sup over imaginary nu";
            } else if (beta >= 3.0334 && e <= 0.1797) {
                res.verdict = "hyperbolic";
                res.criterion = "certified box [3.0334,9]x[0,0.1797]";
            }
        }
    } catch (const domain_error&) {
        // stay inconclusive when a criterion cannot be evaluated
    }

    if (cross_check) {
        const MatrixPath B = make_builtin("threebody", {{"beta", beta}, {"e", e}});
        auto bc = BoundaryData::make(Mat::Identity(4, 4), 0.0, 2.0 * PI);
        auto rep = monodromy(B, bc, {}, 1e-11);
        res.eigenvalues = rep.eigenvalues;
        res.eigenvalue_configuration = rep.classification;
    }
    return res;
}

} // namespace hamtrace::threebody
