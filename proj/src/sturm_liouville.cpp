#include "hamtrace/sturm_liouville.hpp"
#include "hamtrace/galerkin.hpp"
#include "hamtrace/integrator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace hamtrace {

SturmLiouvilleProblem::SturmLiouvilleProblem(MatrixPath P, MatrixPath Q, MatrixPath R,
                                             MatrixPath R1, Mat Sbar, cplx nu)
    : n_(P.dim()), P_(std::move(P)), Q_(std::move(Q)), R_(std::move(R)), R1_(std::move(R1)),
      Sbar_(std::move(Sbar)), nu_(nu) {
    const double T = P_.period();
    for (const MatrixPath* p : {&Q_, &R_, &R1_})
        if (p->dim() != n_ || std::abs(p->period() - T) > 1e-12)
            throw config_error("P/Q/R/R1 must share dimension and period");
    if (orthogonal_defect(Sbar_) > 1e-12) throw config_error("Sbar must be orthogonal");
    if (P_.symmetry_defect() > 1e-12 || R_.symmetry_defect() > 1e-12 ||
        R1_.symmetry_defect() > 1e-12)
        throw config_error("P, R, R1 must be symmetric paths");

    // compatibility at the endpoints
    if ((Sbar_ * P_.eval(T) - P_.eval(0.0) * Sbar_).cwiseAbs().maxCoeff() > 1e-10 ||
        (Sbar_ * Q_.eval(T) - Q_.eval(0.0) * Sbar_).cwiseAbs().maxCoeff() > 1e-10)
        throw config_error("boundary compatibility Sbar P(T) = P(0) Sbar (and same for Q) fails");

    for (int i = 0; i <= 64; ++i) {
        const Mat Pt = P_.eval(T * i / 64.0);
        Eigen::JacobiSVD<Mat> svd(Pt);
        const double smin = svd.singularValues().minCoeff();
        if (smin < 1e-12) throw domain_error("P(t) singular at a sample time");
        worst_P_cond_ = std::max(worst_P_cond_, svd.singularValues().maxCoeff() / smin);
    }
}

namespace {

Mat b_lambda_block(const SturmLiouvilleProblem& slp, double t, double lambda) {
    const int n = slp.n();
    const Mat P = slp.P().eval(t);
    const Mat Q = slp.Q().eval(t);
    const Mat R = slp.R().eval(t);
    const Mat R1 = slp.R1().eval(t);
    const Mat Pinv = P.inverse();
    Mat B(2 * n, 2 * n);
    B.topLeftCorner(n, n) = Pinv;
    B.topRightCorner(n, n) = -Pinv * Q;
    B.bottomLeftCorner(n, n) = -Q.transpose() * Pinv;
    B.bottomRightCorner(n, n) = Q.transpose() * Pinv * Q - R - lambda * R1;
    return B;
}

} // namespace

MatrixPath to_hamiltonian_path(const SturmLiouvilleProblem& slp, double lambda) {
    // copy what the lambda-path needs so the path owns its data
    auto slp_copy = std::make_shared<SturmLiouvilleProblem>(slp);
    return MatrixPath::builtin("sl_first_order", 2 * slp.n(), slp.T(),
                               [slp_copy, lambda](double t) {
                                   return b_lambda_block(*slp_copy, t, lambda);
                               });
}

HamiltonianForm to_hamiltonian(const SturmLiouvilleProblem& slp) {
    const int n = slp.n();
    HamiltonianForm hf;
    hf.B = to_hamiltonian_path(slp, 0.0);

    auto slp_copy = std::make_shared<SturmLiouvilleProblem>(slp);
    hf.D = MatrixPath::builtin("sl_perturbation", 2 * n, slp.T(), [slp_copy, n](double t) {
        Mat D = Mat::Zero(2 * n, 2 * n);
        D.bottomRightCorner(n, n) = -slp_copy->R1().eval(t);
        return D;
    });

    Mat Sd = Mat::Zero(2 * n, 2 * n);
    Sd.topLeftCorner(n, n) = slp.Sbar();
    Sd.bottomRightCorner(n, n) = slp.Sbar();
    hf.bc = BoundaryData::make(Sd, slp.nu(), slp.T());
    return hf;
}

TraceReport lagrangian_trace(const SturmLiouvilleProblem& slp, int m_max, double tol) {
    auto hf = to_hamiltonian(slp);
    TraceReport rep = trace_power(hf.B, hf.D, hf.bc, m_max, tol);
    // order 1 is an honest eigenvalue sum on this path
    if (!rep.method.empty()) rep.method[0] = "composition-sum (eigenvalue sum)";
    return rep;
}

Mat KreinData::R_ave() const {
    std::function<Mat(double)> f = [&](double t) { return R.eval(t); };
    return adaptive_quad<Mat>(f, 0.0, T, 1e-12) / T;
}

Mat KreinData::X(double t) const {
    const Mat Rav = R_ave();
    std::function<Mat(double)> dev = [&](double s) { return Mat(R.eval(s) - Rav); };
    // C makes the average of X vanish: C = -(1/T) int_0^T int_0^t (R - R_ave) ds dt
    std::function<Mat(double)> inner = [&](double u) { return adaptive_quad<Mat>(dev, 0.0, u, 1e-11); };
    const Mat C = -adaptive_quad<Mat>(inner, 0.0, T, 1e-10) / T;
    return adaptive_quad<Mat>(dev, 0.0, t, 1e-11) + C;
}

std::pair<double, double> krein_sums(const KreinData& kd) {
    const double T = kd.T;
    std::function<double(double)> trR = [&](double t) { return kd.R.eval(t).trace(); };
    const double sum1 = T / 4.0 * adaptive_quad<double>(trR, 0.0, T, 1e-12);

    const Mat Rav = kd.R_ave();
    std::function<Mat(double)> dev = [&](double s) { return Mat(kd.R.eval(s) - Rav); };
    std::function<Mat(double)> inner = [&](double u) { return adaptive_quad<Mat>(dev, 0.0, u, 1e-11); };
    const Mat C = -adaptive_quad<Mat>(inner, 0.0, T, 1e-10) / T;
    std::function<double(double)> trX2 = [&](double t) {
        const Mat X = adaptive_quad<Mat>(dev, 0.0, t, 1e-11) + C;
        return (X * X).trace();
    };
    std::function<Mat(double)> Rf = [&](double t) { return kd.R.eval(t); };
    const Mat intR = adaptive_quad<Mat>(Rf, 0.0, T, 1e-12);
    const double sum2 =
        T / 2.0 * adaptive_quad<double>(trX2, 0.0, T, 1e-10) + T * T / 48.0 * (intR * intR).trace();
    return {sum1, sum2};
}

namespace {

std::vector<double> galerkin_lambdas(const SturmLiouvilleProblem& slp, int K) {
    const int sign = frame_sign(slp.Sbar());
    const FourierFrame fr = FourierFrame::make(slp.T(), sign, K);
    const CMat A = assemble_second_order(slp.P(), slp.Q(), slp.R(), slp.nu(), fr);
    const CMat R1 = assemble_multiplication(slp.R1(), fr);
    // hermitize against quadrature noise
    const CMat Ah = 0.5 * (A + A.adjoint());
    const CMat R1h = 0.5 * (R1 + R1.adjoint());
    Eigen::GeneralizedSelfAdjointEigenSolver<CMat> ges(Ah, R1h, Eigen::EigenvaluesOnly);
    std::vector<double> lam;
    for (Eigen::Index i = 0; i < ges.eigenvalues().size(); ++i)
        lam.push_back(-ges.eigenvalues()(i)); // A y = -lambda R1 y
    std::sort(lam.begin(), lam.end());
    return lam;
}

} // namespace

SpectrumSlice sl_eigenvalues_galerkin(const SturmLiouvilleProblem& slp, int K,
                                      double certify_rel) {
    // R1 > 0 needed for the generalized self-adjoint solve
    for (int i = 0; i < 32; ++i) {
        Eigen::SelfAdjointEigenSolver<Mat> es(slp.R1().eval(slp.T() * i / 32.0));
        if (es.eigenvalues().minCoeff() <= 0)
            throw domain_error("galerkin route requires pointwise positive R1");
    }
    auto coarse = galerkin_lambdas(slp, K / 2);
    auto fine = galerkin_lambdas(slp, K);

    SpectrumSlice slice;
    slice.method = "galerkin";
    slice.density_power = 2;

    // keep fine eigenvalues certified by a matching coarse one
    std::vector<double> kept;
    for (double lf : fine) {
        double best = 1e300;
        for (double lc : coarse) best = std::min(best, std::abs(lc - lf));
        if (best <= certify_rel * std::max(1.0, std::abs(lf))) kept.push_back(lf);
    }
    // cluster into multiplicities
    size_t i = 0;
    while (i < kept.size()) {
        size_t j = i + 1;
        while (j < kept.size() && std::abs(kept[j] - kept[i]) < 1e-7 * std::max(1.0, std::abs(kept[i])))
            ++j;
        EigenvalueHit hit;
        hit.lambda = kept[i + (j - i) / 2];
        hit.multiplicity = static_cast<int>(j - i);
        hit.residual = 0.0;
        slice.eigenvalues.push_back(hit);
        i = j;
    }
    if (!slice.eigenvalues.empty())
        slice.window = std::max(std::abs(slice.eigenvalues.front().lambda),
                                std::abs(slice.eigenvalues.back().lambda));

    std::vector<std::pair<double, int>> pos, neg;
    for (const auto& e : slice.eigenvalues)
        (e.lambda >= 0 ? pos : neg).emplace_back(std::abs(e.lambda), e.multiplicity);
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    slice.fit_pos = fit_counting(pos, 2);
    slice.fit_neg = fit_counting(neg, 2);
    return slice;
}

} // namespace hamtrace
