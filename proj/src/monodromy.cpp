#include "hamtrace/monodromy.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace hamtrace {

CMat FundamentalSolution::eval(double t) const {
    if (t < -1e-12 || t > T_ * (1 + 1e-12)) throw domain_error("fundamental solution: t outside [0,T]");
    t = std::clamp(t, 0.0, T_);
    if (segments_.empty()) throw domain_error("fundamental solution has no dense output");
    // binary search for the segment containing t
    size_t lo = 0, hi = segments_.size() - 1;
    while (lo < hi) {
        const size_t mid = (lo + hi + 1) / 2;
        if (segments_[mid].t0 <= t)
            lo = mid;
        else
            hi = mid - 1;
    }
    return segments_[lo].eval(t);
}

Mat FundamentalSolution::at_T_real() const {
    if (endpoint_.imag().cwiseAbs().maxCoeff() > 1e-9)
        throw domain_error("fundamental solution endpoint is not real");
    return endpoint_.real();
}

FundamentalSolution integrate_fundamental(const MatrixPath& B, cplx lambda, const MatrixPath* D,
                                          double tol, double drift_bound) {
    if (!(tol > 0)) throw config_error("integrator tolerance must be positive");
    const int d = B.dim();
    if (D && D->dim() != d) throw config_error("B and D dimensions differ");
    const Mat J = standard_J(d / 2);
    const CMat Jc = J.cast<cplx>();

    auto rhs = [&](double t, const CMat& g) -> CMat {
        CMat coef = B.eval(t).cast<cplx>();
        if (D && lambda != 0.0) coef += lambda * D->eval(t).cast<cplx>();
        return Jc * (coef * g);
    };

    std::vector<double> brk = B.breakpoints();
    if (D) brk.insert(brk.end(), D->breakpoints().begin(), D->breakpoints().end());

    Dopri5<cplx> solver(rhs, tol, tol);
    FundamentalSolution fs;
    fs.T_ = B.period();
    fs.endpoint_ = solver.integrate(0.0, CMat::Identity(d, d), B.period(), brk, true);
    fs.segments_ = solver.segments();
    fs.stats_ = solver.stats();

    fs.samples_.reserve(fs.segments_.size() + 1);
    for (const auto& seg : fs.segments_) fs.samples_.emplace_back(seg.t0, seg.c0);
    fs.samples_.emplace_back(fs.T_, fs.endpoint_);

    // symplecticity audit on the real form: gamma^T J gamma = J
    for (const auto& [t, g] : fs.samples_) {
        const CMat defect = g.transpose() * Jc * g - Jc;
        fs.sympl_drift_ = std::max(fs.sympl_drift_, defect.cwiseAbs().maxCoeff());
    }
    fs.drift_flagged_ = fs.sympl_drift_ > drift_bound;
    return fs;
}

Mat fundamental_endpoint_real(const MatrixPath& B, double lambda, const MatrixPath* D,
                              double tol) {
    const int d = B.dim();
    const Mat J = standard_J(d / 2);
    auto rhs = [&](double t, const Mat& g) -> Mat {
        Mat coef = B.eval(t);
        if (D && lambda != 0.0) coef += lambda * D->eval(t);
        return J * (coef * g);
    };
    std::vector<double> brk = B.breakpoints();
    if (D) brk.insert(brk.end(), D->breakpoints().begin(), D->breakpoints().end());
    Dopri5<double> solver(rhs, tol, tol);
    return solver.integrate(0.0, Mat::Identity(d, d), B.period(), brk, false);
}

int e_omega_count(const std::vector<cplx>& eigenvalues, cplx omega, double tol) {
    const double arc = std::abs(std::arg(omega));
    int count = 0;
    for (cplx mu : eigenvalues) {
        if (std::abs(std::abs(mu) - 1.0) > tol) continue;
        if (std::abs(std::arg(mu)) <= arc + tol) ++count;
    }
    return count;
}

MonodromyReport monodromy(const MatrixPath& B, const BoundaryData& bc,
                          const std::vector<cplx>& query_omegas, double tol) {
    if (bc.dim() != B.dim()) throw config_error("boundary matrix dimension mismatch");
    auto fs = integrate_fundamental(B, 0.0, nullptr, tol);

    MonodromyReport rep;
    rep.sympl_drift = fs.sympl_drift();
    rep.M = bc.S.cast<cplx>() * fs.at_T();

    Eigen::ComplexEigenSolver<CMat> es(rep.M);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        rep.eigenvalues.push_back(es.eigenvalues()(i));
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
              [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real()
                                                               : a.imag() < b.imag(); });

    const double uc = rep.unit_circle_tol;
    int on = 0, off = 0;
    for (cplx mu : rep.eigenvalues)
        (std::abs(std::abs(mu) - 1.0) <= uc ? on : off)++;
    rep.e_total = on;

    bool degenerate = false;
    for (cplx w : query_omegas)
        for (cplx mu : rep.eigenvalues)
            if (std::abs(mu - w) <= 1e-6) {
                rep.degenerate_at.push_back(w);
                degenerate = true;
                break;
            }

    if (degenerate)
        rep.classification = "degenerate";
    else if (off == 0)
        rep.classification = "elliptic";
    else if (on == 0)
        rep.classification = "hyperbolic";
    else
        rep.classification = "mixed";
    return rep;
}

} // namespace hamtrace
