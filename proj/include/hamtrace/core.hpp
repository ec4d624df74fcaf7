#ifndef HAMTRACE_CORE_HPP
#define HAMTRACE_CORE_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace hamtrace {

using cplx = std::complex<double>;
using Mat  = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec  = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

inline constexpr double PI = 3.14159265358979323846;

// Domain failures (degenerate operators, hypothesis violations) map to CLI exit 1.
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Malformed input (schema, dimension mismatch) maps to CLI exit 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Standard symplectic form J = [[0,-I],[I,0]] on R^{2n}.
inline Mat standard_J(int n) {
    Mat J = Mat::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n)   = -Mat::Identity(n, n);
    J.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return J;
}

inline double sym_defect(const Mat& A) {
    return (A - A.transpose()).cwiseAbs().maxCoeff();
}

inline double symplectic_defect(const Mat& S) {
    const int n = static_cast<int>(S.rows()) / 2;
    const Mat J = standard_J(n);
    return (S.transpose() * J * S - J).cwiseAbs().maxCoeff();
}

inline double orthogonal_defect(const Mat& S) {
    return (S.transpose() * S - Mat::Identity(S.rows(), S.cols())).cwiseAbs().maxCoeff();
}

// det and log-det of a complex matrix via partial-pivot LU.
inline cplx cdet(const CMat& A) {
    return Eigen::PartialPivLU<CMat>(A).determinant();
}

inline cplx clog_det(const CMat& A) {
    Eigen::PartialPivLU<CMat> lu(A);
    cplx s = 0.0;
    const auto& U = lu.matrixLU();
    for (Eigen::Index i = 0; i < U.rows(); ++i) s += std::log(U(i, i));
    // permutation sign contributes i*pi per transposition
    double sign = lu.permutationP().determinant();
    if (sign < 0) s += cplx(0.0, PI);
    return s;
}

// 1 / condition estimate of (M - w I); used to refuse near-degenerate resolvents.
inline double resolvent_rcond(const CMat& M, cplx w) {
    CMat A = M - w * CMat::Identity(M.rows(), M.cols());
    Eigen::JacobiSVD<CMat> svd(A);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0) return 0.0;
    return sv(sv.size() - 1) / sv(0);
}

} // namespace hamtrace

#endif
