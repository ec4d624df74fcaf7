#ifndef HAMTRACE_ITERATED_INTEGRALS_HPP
#define HAMTRACE_ITERATED_INTEGRALS_HPP

#include "hamtrace/boundary.hpp"
#include "hamtrace/matrix_path.hpp"
#include "hamtrace/monodromy.hpp"

#include <map>
#include <string>
#include <vector>

namespace hamtrace {

// Nested time-ordered integrals of J Dhat with Dhat(t) = gamma0(t)^T D(t) gamma0(t):
//   M_0 = I,  M_k = int_0^T J Dhat(t1) int_0^{t1} J Dhat(t2) ... dt_k...dt_1.
// Computed in one integrator pass on the augmented system
//   gamma' = J B gamma,  Phi_k' = J Dhat(t) Phi_{k-1},  Phi_k(0) = 0.
struct IteratedIntegralStack {
    int m_max = 0;
    Mat gammaT;             // gamma_0(T)
    std::vector<Mat> M;     // M[0] = I, M[1..m_max]
    double tol = 0.0;

    // max_k || sum_{j=0}^k M_j^T J M_{k-j} ||_inf  (symplecticity of the expansion)
    double expansion_symplectic_defect() const;
};

IteratedIntegralStack compute_Mk(const MatrixPath& B, const MatrixPath& D, int m_max,
                                 double tol = 1e-11);

struct TraceReport {
    int m_max = 0;
    std::vector<cplx> values;        // values[m-1] = composition-sum value of order m
    std::vector<std::string> method; // provenance per order
    cplx closed_form_m1 = 0.0;       // quadrature evaluation of the order-1 closed form
    cplx closed_form_m2 = 0.0;       // quadrature evaluation of the order-2 closed form
    std::vector<CMat> G;             // G[k-1] = M_k * M (M - omega I)^{-1}
    double resolvent_rcond = 0.0;
    double tol = 0.0;
};

// Reciprocal-eigenvalue power traces of the twisted boundary value problem,
// from monodromy data alone. values[m-1] equals sum_j 1/lambda_j^m for m >= 2
// (and the conditional first-order trace for m = 1).
TraceReport trace_power(const MatrixPath& B, const MatrixPath& D, const BoundaryData& bc,
                        int m_max, double tol = 1e-11);

// Order-2 trace through the structural special forms (monodromy commuting
// with J, symmetric, or equal to +/-I). Throws if no hypothesis holds.
cplx trace_power_special(const MatrixPath& B, const MatrixPath& D, const BoundaryData& bc,
                         double hyp_tol = 1e-10, double tol = 1e-11);

// Composition-sum combination m * sum_k ((-1)^k / k) sum_{j1+..+jk=m} Tr(G_j1...G_jk)
// for matrices G[k-1]; exposed for reuse by the Sturm-Liouville layer.
cplx composition_trace(const std::vector<CMat>& G, int m);

struct IdentityResult {
    cplx closed_form;
    cplx partial_sum;   // raw symmetric sum over |k| <= K
    cplx tail_value;    // analytic estimate of the remainder
    double tail_bound;  // magnitude bound on the remainder after the tail correction
};

// Doubly infinite eigenvalue-sum identities of the constant-coefficient model
// problem: sum over k of (2k pi + i nu - alpha)^{-m} + (2k pi - i nu - alpha)^{-m}
// against their elementary closed forms, m in {1,2,3}.
IdentityResult identity_suite(cplx nu, cplx alpha, int m, long K = 10000);

} // namespace hamtrace

#endif
