#include "hamtrace/iterated_integrals.hpp"
#include "hamtrace/integrator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace hamtrace {

double IteratedIntegralStack::expansion_symplectic_defect() const {
    const int d = static_cast<int>(M[0].rows());
    const Mat J = standard_J(d / 2);
    double worst = 0.0;
    for (int k = 1; k <= m_max; ++k) {
        Mat C = Mat::Zero(d, d);
        for (int j = 0; j <= k; ++j) C += M[j].transpose() * J * M[k - j];
        worst = std::max(worst, C.cwiseAbs().maxCoeff());
    }
    return worst;
}

IteratedIntegralStack compute_Mk(const MatrixPath& B, const MatrixPath& D, int m_max,
                                 double tol) {
    if (m_max < 1) throw config_error("m_max must be >= 1");
    if (B.dim() != D.dim()) throw config_error("B and D dimensions differ");
    const int d = B.dim();
    const Mat J = standard_J(d / 2);
    const double T = B.period();

    // state columns: [gamma | Phi_1 | ... | Phi_m]
    auto rhs = [&](double t, const Mat& y) -> Mat {
        Mat out(d, d * (m_max + 1));
        const Mat gamma = y.leftCols(d);
        out.leftCols(d) = J * (B.eval(t) * gamma);
        const Mat JDhat = J * (gamma.transpose() * D.eval(t) * gamma);
        for (int k = 1; k <= m_max; ++k) {
            const Mat prev = (k == 1) ? Mat::Identity(d, d) : Mat(y.middleCols((k - 1) * d, d));
            out.middleCols(k * d, d) = JDhat * prev;
        }
        return out;
    };

    Mat y0 = Mat::Zero(d, d * (m_max + 1));
    y0.leftCols(d) = Mat::Identity(d, d);

    std::vector<double> brk = B.breakpoints();
    brk.insert(brk.end(), D.breakpoints().begin(), D.breakpoints().end());

    Dopri5<double> solver(rhs, tol, tol);
    const Mat yT = solver.integrate(0.0, y0, T, brk, false);

    IteratedIntegralStack st;
    st.m_max = m_max;
    st.tol = tol;
    st.gammaT = yT.leftCols(d);
    st.M.resize(m_max + 1);
    st.M[0] = Mat::Identity(d, d);
    for (int k = 1; k <= m_max; ++k) st.M[k] = yT.middleCols(k * d, d);
    return st;
}

namespace {

// ordered compositions j1+...+jk = m, all parts >= 1
void for_each_composition(int m, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> parts;
    std::function<void(int)> rec = [&](int rest) {
        if (rest == 0) {
            fn(parts);
            return;
        }
        for (int j = 1; j <= rest; ++j) {
            parts.push_back(j);
            rec(rest - j);
            parts.pop_back();
        }
    };
    rec(m);
}

CMat resolvent_weight(const CMat& M, cplx omega, double* rcond_out) {
    const Eigen::Index d = M.rows();
    const CMat A = M - omega * CMat::Identity(d, d);
    if (rcond_out) *rcond_out = resolvent_rcond(M, omega);

    Eigen::ComplexEigenSolver<CMat> es(M);
    double gap = 1e300;
    for (Eigen::Index i = 0; i < d; ++i)
        gap = std::min(gap, std::abs(es.eigenvalues()(i) - omega) / std::abs(omega));
    if (gap <= 1e-10) throw domain_error("unperturbed system degenerate");
    if (rcond_out && *rcond_out < 1e-12)
        throw domain_error("monodromy resolvent too ill-conditioned (near-degenerate)");
    return Eigen::PartialPivLU<CMat>(A).solve(M);
}

} // namespace

cplx composition_trace(const std::vector<CMat>& G, int m) {
    cplx total = 0.0;
    for_each_composition(m, [&](const std::vector<int>& parts) {
        CMat prod = G[parts[0] - 1];
        for (size_t i = 1; i < parts.size(); ++i) prod = prod * G[parts[i] - 1];
        const int k = static_cast<int>(parts.size());
        const double coeff = ((k % 2 == 0) ? 1.0 : -1.0) / k;
        total += coeff * prod.trace();
    });
    return static_cast<double>(m) * total;
}

TraceReport trace_power(const MatrixPath& B, const MatrixPath& D, const BoundaryData& bc,
                        int m_max, double tol) {
    if (m_max < 1 || m_max > 8)
        throw config_error("trace order must lie in 1..8 (composition count doubles per order)");
    if (bc.dim() != B.dim()) throw config_error("boundary matrix dimension mismatch");

    auto st = compute_Mk(B, D, m_max, tol);
    const CMat M = bc.S.cast<cplx>() * st.gammaT.cast<cplx>();

    TraceReport rep;
    rep.m_max = m_max;
    rep.tol = tol;
    const CMat W = resolvent_weight(M, bc.omega, &rep.resolvent_rcond);

    rep.G.resize(m_max);
    for (int k = 1; k <= m_max; ++k) rep.G[k - 1] = st.M[k].cast<cplx>() * W;

    for (int m = 1; m <= m_max; ++m) {
        rep.values.push_back(composition_trace(rep.G, m));
        rep.method.push_back("composition-sum");
    }

    // Closed forms for orders 1 and 2 through an independent numeric route:
    // dense-output interpolation of gamma_0 plus adaptive quadrature.
    {
        auto fs = integrate_fundamental(B, 0.0, nullptr, 0.01 * tol);
        const int d = B.dim();
        const CMat J = standard_J(d / 2).cast<cplx>();
        auto Dhat = [&](double t) -> CMat {
            const CMat g = fs.eval(t);
            return g.transpose() * D.eval(t).cast<cplx>() * g;
        };
        std::function<CMat(double)> f1 = [&](double t) -> CMat { return J * Dhat(t); };
        const CMat Q1 = adaptive_quad<CMat>(f1, 0.0, B.period(), tol);
        rep.closed_form_m1 = -(Q1 * W).trace();

        std::function<CMat(double)> f2 = [&](double t) -> CMat {
            std::function<CMat(double)> inner = [&](double s) -> CMat { return J * Dhat(s); };
            const CMat In = adaptive_quad<CMat>(inner, 0.0, t, tol * 10);
            return CMat(J * Dhat(t) * In);
        };
        const CMat Q2 = adaptive_quad<CMat>(f2, 0.0, B.period(), tol * 10);
        rep.closed_form_m2 = -2.0 * (Q2 * W).trace() + (Q1 * W * Q1 * W).trace();
    }
    return rep;
}

cplx trace_power_special(const MatrixPath& B, const MatrixPath& D, const BoundaryData& bc,
                         double hyp_tol, double tol) {
    auto st = compute_Mk(B, D, 1, tol);
    const int d = B.dim();
    const CMat M = bc.S.cast<cplx>() * st.gammaT.cast<cplx>();
    const CMat I = CMat::Identity(d, d);
    const CMat J = standard_J(d / 2).cast<cplx>();
    const CMat Q = st.M[1].cast<cplx>(); // = J int_0^T Dhat dt
    const cplx w = bc.omega;

    const bool plusI = (M - I).cwiseAbs().maxCoeff() <= hyp_tol;
    const bool minusI = (M + I).cwiseAbs().maxCoeff() <= hyp_tol;
    if (plusI || minusI) {
        const double sgn = plusI ? 1.0 : -1.0;
        const cplx denom = (1.0 - sgn * w) * (1.0 - sgn * w);
        if (std::abs(denom) < 1e-14) throw domain_error("special form pole: omega = +/-1 mismatch");
        return sgn * w / denom * (Q * Q).trace();
    }

    const bool commJ = (M * J - J * M).cwiseAbs().maxCoeff() <= hyp_tol;
    const bool symm = (M - M.transpose()).cwiseAbs().maxCoeff() <= hyp_tol;
    if (!(commJ && symm))
        throw domain_error("special-form hypothesis violated (need M=+/-I, or MJ=JM with M symmetric)");

    const CMat A = M - w * I;
    const CMat W = Eigen::PartialPivLU<CMat>(A).solve(M);
    if ((M * Q - Q * M).cwiseAbs().maxCoeff() <= hyp_tol) {
        const CMat W2 = Eigen::PartialPivLU<CMat>(CMat(A * A)).solve(M);
        return w * (Q * Q * W2).trace();
    }
    return (Q * W * Q * W).trace() - (Q * Q * W).trace();
}

namespace {

// analytic remainder of sum_{k>K} [(c+2 pi k)^{-m} + (c-2 pi k)^{-m}]
cplx paired_tail(cplx c, int m, long K) {
    const double x = static_cast<double>(K) + 0.5;
    const cplx up = c + 2.0 * PI * x, dn = c - 2.0 * PI * x;
    cplx integral;
    if (m == 1) {
        // int_x^inf [ (c+2pi s)^{-1} + (c-2pi s)^{-1} ] ds = (1/2pi) log((x-a)/(x+a)), a = c/2pi
        const cplx a = c / (2.0 * PI);
        integral = (1.0 / (2.0 * PI)) * std::log((x - a) / (x + a));
    } else {
        integral = (std::pow(up, 1 - m) - std::pow(dn, 1 - m)) / (2.0 * PI * (m - 1));
    }
    const cplx fprime =
        -2.0 * PI * static_cast<double>(m) * (std::pow(up, -m - 1) - std::pow(dn, -m - 1));
    return integral + fprime / 24.0;
}

} // namespace

IdentityResult identity_suite(cplx nu, cplx alpha, int m, long K) {
    if (m < 1 || m > 3) throw config_error("identity suite supports orders 1..3");
    const cplx ch = std::cosh(nu), ca = std::cos(alpha), sa = std::sin(alpha);
    const cplx den = ch - ca;
    if (std::abs(den) < 1e-8) throw domain_error("identity pole: cosh(nu) = cos(alpha)");

    IdentityResult r{};
    switch (m) {
        case 1: r.closed_form = -sa / den; break;
        case 2: r.closed_form = (1.0 - ch * ca) / (den * den); break;
        case 3: r.closed_form = sa * (ch * ch + ch * ca - 2.0) / (2.0 * den * den * den); break;
    }

    const cplx c1 = cplx(0, 1) * nu - alpha, c2 = -cplx(0, 1) * nu - alpha;
    cplx sum = std::pow(c1, -m) + std::pow(c2, -m);
    for (long k = 1; k <= K; ++k) {
        const double w = 2.0 * PI * static_cast<double>(k);
        sum += std::pow(c1 + w, -m) + std::pow(c1 - w, -m);
        sum += std::pow(c2 + w, -m) + std::pow(c2 - w, -m);
    }
    r.partial_sum = sum;
    r.tail_value = paired_tail(c1, m, K) + paired_tail(c2, m, K);
    // next Euler-Maclaurin term is O(K^{-m-3})
    r.tail_bound = 10.0 * std::pow(static_cast<double>(K), -m - 3) + 1e-15 * std::abs(sum);
    return r;
}

} // namespace hamtrace
