#include "hamtrace/galerkin.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace hamtrace {

FourierFrame FourierFrame::make(double T, int sign, int K) {
    FourierFrame fr;
    fr.T = T;
    fr.sign = sign;
    if (sign == +1) {
        for (int k = -K; k <= K; ++k) fr.theta.push_back(2.0 * PI * k / T);
    } else if (sign == -1) {
        for (int k = -K - 1; k <= K; ++k) fr.theta.push_back((2.0 * k + 1.0) * PI / T);
    } else {
        throw config_error("frame sign must be +1 or -1");
    }
    return fr;
}

std::pair<int, int> FourierFrame::central(double theta_cut) const {
    int lo = 0, hi = blocks();
    while (lo < hi && std::abs(theta[lo]) > theta_cut + 1e-12) ++lo;
    while (hi > lo && std::abs(theta[hi - 1]) > theta_cut + 1e-12) --hi;
    return {lo, hi};
}

int frame_sign(const Mat& S) {
    const Mat I = Mat::Identity(S.rows(), S.cols());
    if ((S - I).cwiseAbs().maxCoeff() < 1e-12) return +1;
    if ((S + I).cwiseAbs().maxCoeff() < 1e-12) return -1;
    throw domain_error("only S = +I or S = -I admit an explicit Fourier frame");
}

std::vector<CMat> path_fourier_coeffs(const MatrixPath& path, int mmax, int grid) {
    const int d = path.dim();
    const double T = path.period();
    std::vector<Mat> samples(grid);
    for (int i = 0; i < grid; ++i) samples[i] = path.eval(T * i / grid);
    std::vector<CMat> hat(2 * mmax + 1, CMat::Zero(d, d));
    for (int m = -mmax; m <= mmax; ++m) {
        CMat acc = CMat::Zero(d, d);
        for (int i = 0; i < grid; ++i) {
            const double ang = -2.0 * PI * m * i / grid;
            acc += samples[i].cast<cplx>() * std::exp(cplx(0, ang));
        }
        hat[m + mmax] = acc / static_cast<double>(grid);
    }
    return hat;
}

namespace {

int coeff_band(const std::vector<CMat>& hat, double drop = 1e-14) {
    const int mmax = (static_cast<int>(hat.size()) - 1) / 2;
    int band = 0;
    for (int m = -mmax; m <= mmax; ++m)
        if (hat[m + mmax].cwiseAbs().maxCoeff() > drop) band = std::max(band, std::abs(m));
    return band;
}

} // namespace

CMat assemble_first_order(const MatrixPath& B, cplx nu, const FourierFrame& frame) {
    const int d = B.dim();
    const int nb = frame.blocks();
    const int mmax = nb; // generous coefficient range
    auto hat = path_fourier_coeffs(B, mmax, std::max(256, 8 * nb));
    const CMat J = standard_J(d / 2).cast<cplx>();

    CMat T = CMat::Zero(d * nb, d * nb);
    for (int r = 0; r < nb; ++r) {
        for (int c = 0; c < nb; ++c) {
            const double dm = (frame.theta[r] - frame.theta[c]) * frame.T / (2.0 * PI);
            const int m = static_cast<int>(std::lround(dm));
            if (std::abs(dm - m) > 1e-9 || std::abs(m) > mmax) continue;
            T.block(d * r, d * c, d, d) = -hat[m + mmax];
        }
        T.block(d * r, d * r, d, d) += cplx(0, -frame.theta[r]) * J - nu * J;
    }
    return T;
}

CMat assemble_multiplication(const MatrixPath& D, const FourierFrame& frame) {
    const int d = D.dim();
    const int nb = frame.blocks();
    const int mmax = nb;
    auto hat = path_fourier_coeffs(D, mmax, std::max(256, 8 * nb));
    CMat M = CMat::Zero(d * nb, d * nb);
    for (int r = 0; r < nb; ++r)
        for (int c = 0; c < nb; ++c) {
            const double dm = (frame.theta[r] - frame.theta[c]) * frame.T / (2.0 * PI);
            const int m = static_cast<int>(std::lround(dm));
            if (std::abs(dm - m) > 1e-9 || std::abs(m) > mmax) continue;
            M.block(d * r, d * c, d, d) = hat[m + mmax];
        }
    return M;
}

CMat assemble_second_order(const MatrixPath& P, const MatrixPath& Q, const MatrixPath& R,
                           cplx nu, const FourierFrame& frame) {
    const int n = P.dim();
    const int nb = frame.blocks();
    const CMat Pm = assemble_multiplication(P, frame);
    const CMat Qm = assemble_multiplication(Q, frame);
    CMat Qt = CMat::Zero(n * nb, n * nb);
    {
        // multiplication by Q^T: transpose the blocks, keep the convolution index
        const int mmax = nb;
        auto hat = path_fourier_coeffs(Q, mmax, std::max(256, 8 * nb));
        for (int r = 0; r < nb; ++r)
            for (int c = 0; c < nb; ++c) {
                const double dm = (frame.theta[r] - frame.theta[c]) * frame.T / (2.0 * PI);
                const int m = static_cast<int>(std::lround(dm));
                if (std::abs(dm - m) > 1e-9 || std::abs(m) > mmax) continue;
                Qt.block(n * r, n * c, n, n) = hat[m + mmax].transpose();
            }
    }
    const CMat Rm = assemble_multiplication(R, frame);

    CMat Dnu = CMat::Zero(n * nb, n * nb);
    for (int b = 0; b < nb; ++b)
        Dnu.block(n * b, n * b, n, n) =
            (cplx(0, frame.theta[b]) + nu) * CMat::Identity(n, n);

    return -Dnu * (Pm * Dnu + Qm) + Qt * Dnu + Rm;
}

int negative_count(const CMat& H, double thresh) {
    Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
    int cnt = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) < -thresh) ++cnt;
    return cnt;
}

double smallest_abs_eigenvalue(const CMat& H) {
    Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().minCoeff();
}

double smallest_eigenvalue(const CMat& H) {
    Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

TruncatedDeterminant truncated_fredholm(const MatrixPath& B, const MatrixPath& D,
                                        const BoundaryData& bc, cplx alpha, int N) {
    const int sign = frame_sign(bc.S); // throws for unsupported S
    const int d = B.dim();
    if (N < 8) throw config_error("truncation level too small");

    const int Kbig = 2 * N + 16;
    const FourierFrame big = FourierFrame::make(bc.T, sign, Kbig);
    const int nb = big.blocks();

    // sparse assembly of (A - B - nu J) on the big frame
    const int mmax = Kbig;
    auto hatB = path_fourier_coeffs(B, mmax, std::max(512, 8 * nb));
    auto hatD = path_fourier_coeffs(D, mmax, std::max(512, 8 * nb));
    const int bandB = coeff_band(hatB);
    const int bandD = coeff_band(hatD);
    const CMat J = standard_J(d / 2).cast<cplx>();

    using Sp = Eigen::SparseMatrix<cplx>;
    Sp T(d * nb, d * nb);
    {
        std::vector<Eigen::Triplet<cplx>> trip;
        trip.reserve(static_cast<size_t>(nb) * (2 * bandB + 1) * d * d + nb * d * d);
        for (int r = 0; r < nb; ++r) {
            for (int c = std::max(0, r - (bandB + 2)); c < std::min(nb, r + bandB + 3); ++c) {
                const double dm = (big.theta[r] - big.theta[c]) * big.T / (2.0 * PI);
                const int m = static_cast<int>(std::lround(dm));
                if (std::abs(dm - m) > 1e-9 || std::abs(m) > bandB) continue;
                CMat blk = -hatB[m + mmax];
                if (r == c) blk += cplx(0, -big.theta[r]) * J - bc.nu * J;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        if (blk(i, j) != cplx(0.0)) trip.emplace_back(d * r + i, d * c + j, blk(i, j));
            }
        }
        T.setFromTriplets(trip.begin(), trip.end());
    }

    Eigen::SparseLU<Sp> lu;
    lu.compute(T);
    if (lu.info() != Eigen::Success)
        throw domain_error("free-minus-coefficient operator is singular on the big frame");

    // central columns: modes with |theta| <= theta_cut(N)
    const double theta_cutN =
        (sign == +1) ? 2.0 * PI * N / bc.T + 1e-9 : (2.0 * N + 1.0) * PI / bc.T + 1e-9;
    auto [lo, hi] = big.central(theta_cutN);
    const int nc = hi - lo;
    const int Mc = d * nc;

    CMat X(d * nb, Mc);
    {
        CMat rhs = CMat::Zero(d * nb, Mc);
        for (int c = 0; c < Mc; ++c) rhs(d * lo + c, c) = 1.0;
        X = lu.solve(rhs);
    }

    // F = D * inv, compressed to the central block rows
    CMat F = CMat::Zero(Mc, Mc);
    for (int r = lo; r < hi; ++r) {
        for (int c = std::max(0, r - (bandD + 2)); c < std::min(nb, r + bandD + 3); ++c) {
            const double dm = (big.theta[r] - big.theta[c]) * big.T / (2.0 * PI);
            const int m = static_cast<int>(std::lround(dm));
            if (std::abs(dm - m) > 1e-9 || std::abs(m) > bandD) continue;
            F.block(d * (r - lo), 0, d, Mc) += hatD[m + mmax] * X.block(d * c, 0, d, Mc);
        }
    }

    TruncatedDeterminant td;
    td.N = N;
    for (int level : {N / 4, N / 2, N}) {
        const double cut =
            (sign == +1) ? 2.0 * PI * level / bc.T + 1e-9 : (2.0 * level + 1.0) * PI / bc.T + 1e-9;
        // sub-block of F for modes |theta| <= cut (contiguous inside the central block)
        int l2 = 0, h2 = nc;
        while (l2 < h2 && std::abs(big.theta[lo + l2]) > cut) ++l2;
        while (h2 > l2 && std::abs(big.theta[lo + h2 - 1]) > cut) --h2;
        const int sz = d * (h2 - l2);
        const CMat Fsub = F.block(d * l2, d * l2, sz, sz);
        const CMat Id = CMat::Identity(sz, sz);
        td.levels.push_back(level);
        td.values.push_back(cdet(Id - alpha * Fsub));
    }
    td.value = td.values.back();

    // observed rate from the three levels and a one-step Richardson limit
    const cplx d1 = td.values[1] - td.values[0];
    const cplx d2 = td.values[2] - td.values[1];
    if (std::abs(d2) > 0 && std::abs(d1) > 0) {
        td.rate = std::log2(std::abs(d1) / std::abs(d2));
        const cplx q = d2 / d1;
        if (std::abs(q) < 0.95)
            td.extrapolated = td.values[2] + d2 * q / (1.0 - q);
        else
            td.extrapolated = td.values[2];
    } else {
        td.extrapolated = td.values[2];
    }
    td.convergence_estimate = std::abs(td.value - td.extrapolated);
    return td;
}

} // namespace hamtrace
