#ifndef HAMTRACE_GALERKIN_HPP
#define HAMTRACE_GALERKIN_HPP

#include "hamtrace/boundary.hpp"
#include "hamtrace/matrix_path.hpp"

#include <vector>

namespace hamtrace {

// Fourier frame for the S-periodic boundary condition with S = +I (integer
// modes) or S = -I (half-integer modes); only these two have an explicit
// eigenframe of the free operator.
struct FourierFrame {
    double T = 0.0;
    int sign = +1;
    std::vector<double> theta; // sorted ascending; block b spans wave number theta[b]

    static FourierFrame make(double T, int sign, int K);
    int blocks() const { return static_cast<int>(theta.size()); }
    // index range [lo, hi) of the central blocks with |theta| <= theta_cut
    std::pair<int, int> central(double theta_cut) const;
};

// detects S = +/-I; throws for any other boundary matrix
int frame_sign(const Mat& S);

// Fourier coefficients path_hat[m + mmax] for m in [-mmax, mmax], by
// trapezoid on a uniform grid (spectrally accurate for smooth paths).
std::vector<CMat> path_fourier_coeffs(const MatrixPath& path, int mmax, int grid);

// Dense operator matrix of (A - B - nu J) on the frame (Hermitian for
// imaginary nu); blocks of size 2n.
CMat assemble_first_order(const MatrixPath& B, cplx nu, const FourierFrame& frame);

// Dense multiplication-operator matrix of a path on the frame; block size =
// path dimension.
CMat assemble_multiplication(const MatrixPath& D, const FourierFrame& frame);

// Second-order operator -(d/dt+nu)(P(d/dt+nu) + Q .) + Q^T(d/dt+nu) + R
// on the frame (block size n).
CMat assemble_second_order(const MatrixPath& P, const MatrixPath& Q, const MatrixPath& R,
                           cplx nu, const FourierFrame& frame);

// eigenvalue count below -thresh of a Hermitian matrix
int negative_count(const CMat& H, double thresh = 0.0);
double smallest_abs_eigenvalue(const CMat& H);
double smallest_eigenvalue(const CMat& H);

struct TruncatedDeterminant {
    int N = 0;
    cplx value = 0.0;                     // det(id - alpha P_N F P_N) at the final level
    std::vector<int> levels;              // N/4, N/2, N
    std::vector<cplx> values;             // determinant per level
    cplx extrapolated = 0.0;              // Richardson-style limit estimate
    double rate = 0.0;                    // observed convergence order
    double convergence_estimate = 0.0;    // |value(N) - extrapolated|
};

// det(id - alpha P_N F P_N) with F = D (A - B - nu J)^{-1}; the inverse is
// taken on a larger frame so the projected operator is the true compression.
TruncatedDeterminant truncated_fredholm(const MatrixPath& B, const MatrixPath& D,
                                        const BoundaryData& bc, cplx alpha, int N);

} // namespace hamtrace

#endif
