#ifndef HAMTRACE_STURM_LIOUVILLE_HPP
#define HAMTRACE_STURM_LIOUVILLE_HPP

#include "hamtrace/boundary.hpp"
#include "hamtrace/iterated_integrals.hpp"
#include "hamtrace/matrix_path.hpp"
#include "hamtrace/spectral_oracle.hpp"

namespace hamtrace {

// Second-order problem -(P y' + Q y)' + Q^T y' + (R + lambda R1) y = 0 with
// y(0) = Sbar y(T), y'(0) = Sbar y'(T); P invertible (no convexity assumed),
// compatibility Sbar P(T) = P(0) Sbar and Sbar Q(T) = Q(0) Sbar.
class SturmLiouvilleProblem {
public:
    SturmLiouvilleProblem(MatrixPath P, MatrixPath Q, MatrixPath R, MatrixPath R1, Mat Sbar,
                          cplx nu);

    int n() const { return n_; }
    double T() const { return P_.period(); }
    cplx nu() const { return nu_; }
    const MatrixPath& P() const { return P_; }
    const MatrixPath& Q() const { return Q_; }
    const MatrixPath& R() const { return R_; }
    const MatrixPath& R1() const { return R1_; }
    const Mat& Sbar() const { return Sbar_; }

    double worst_P_condition() const { return worst_P_cond_; }

private:
    int n_;
    MatrixPath P_, Q_, R_, R1_;
    Mat Sbar_;
    cplx nu_;
    double worst_P_cond_ = 0.0;
};

struct HamiltonianForm {
    MatrixPath B;        // coefficient path at lambda = 0
    MatrixPath D;        // linear-in-lambda perturbation diag(0, -R1)
    BoundaryData bc;     // S = diag(Sbar, Sbar), twist nu
};

// Momentum-coordinate first-order form of the second-order problem; lambda
// enters as B_lambda = B + lambda D.
HamiltonianForm to_hamiltonian(const SturmLiouvilleProblem& slp);
// coefficient path at a fixed lambda (for direct monodromy work)
MatrixPath to_hamiltonian_path(const SturmLiouvilleProblem& slp, double lambda);

// Eigenvalue power sums of the second-order problem. Unlike the general
// first-order case the order-1 sum is an honest eigenvalue sum here.
TraceReport lagrangian_trace(const SturmLiouvilleProblem& slp, int m_max, double tol = 1e-11);

struct KreinData {
    MatrixPath R;   // n x n symmetric coefficient of y'' + lambda R y = 0
    double T = 0.0;

    // X(t) = int_0^t (R - R_ave) ds + C with zero average
    Mat R_ave() const;
    Mat X(double t) const;
};

// Classical closed forms for the anti-periodic problem y'' + lambda R y = 0:
//   sum 1/lambda   = (T/4) int Tr R dt
//   sum 1/lambda^2 = (T/2) int Tr X^2 dt + (T^2/48) Tr[(int R)^2]
std::pair<double, double> krein_sums(const KreinData& kd);

// Galerkin eigenvalue slice of the second-order problem (R1 > 0 required);
// eigenvalues certified by agreement across two truncation levels.
SpectrumSlice sl_eigenvalues_galerkin(const SturmLiouvilleProblem& slp, int K,
                                      double certify_rel = 1e-8);

} // namespace hamtrace

#endif
