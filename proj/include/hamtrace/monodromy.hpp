#ifndef HAMTRACE_MONODROMY_HPP
#define HAMTRACE_MONODROMY_HPP

#include "hamtrace/boundary.hpp"
#include "hamtrace/integrator.hpp"
#include "hamtrace/matrix_path.hpp"

#include <string>
#include <vector>

namespace hamtrace {

// Fundamental solution gamma(t) of gamma' = J (B + lambda D) gamma, gamma(0)=I,
// as dense-output samples plus interpolant. sympl_drift tracks the worst
// violation of gamma^T J gamma = J over the accepted steps.
class FundamentalSolution {
public:
    FundamentalSolution() = default;

    CMat eval(double t) const;
    CMat at_T() const { return endpoint_; }
    Mat at_T_real() const;

    double period() const { return T_; }
    double sympl_drift() const { return sympl_drift_; }
    bool drift_flagged() const { return drift_flagged_; }
    const IntegratorStats& stats() const { return stats_; }

    // sampled (t, gamma(t)) at accepted step endpoints
    const std::vector<std::pair<double, CMat>>& samples() const { return samples_; }

private:
    friend FundamentalSolution integrate_fundamental(const MatrixPath&, cplx, const MatrixPath*,
                                                     double, double);
    double T_ = 0.0;
    CMat endpoint_;
    std::vector<DenseSegment<cplx>> segments_;
    std::vector<std::pair<double, CMat>> samples_;
    double sympl_drift_ = 0.0;
    bool drift_flagged_ = false;
    IntegratorStats stats_;
};

// Integrates gamma' = J (B + lambda D) gamma. D may be null when lambda = 0.
// Deterministic for fixed tolerance; symplectic drift above drift_bound only
// flags the result, it does not abort.
FundamentalSolution integrate_fundamental(const MatrixPath& B, cplx lambda = 0.0,
                                          const MatrixPath* D = nullptr, double tol = 1e-10,
                                          double drift_bound = 1e-9);

// Real-path fast variant used by the shooting scans: returns gamma(T) only.
Mat fundamental_endpoint_real(const MatrixPath& B, double lambda, const MatrixPath* D,
                              double tol);

struct MonodromyReport {
    CMat M;                         // S gamma_0(T)
    std::vector<cplx> eigenvalues;  // with multiplicity (listed repeatedly)
    std::string classification;     // elliptic | hyperbolic | mixed | degenerate
    double unit_circle_tol = 1e-8;
    int e_total = 0;                // algebraic multiplicity on the unit circle
    std::vector<cplx> degenerate_at; // queried omegas found in the spectrum
    double sympl_drift = 0.0;
};

// Monodromy M = S gamma_0(T) with eigenvalue classification. Each queried
// omega on the unit circle is checked for degeneracy (omega in spec M).
MonodromyReport monodromy(const MatrixPath& B, const BoundaryData& bc,
                          const std::vector<cplx>& query_omegas = {}, double tol = 1e-10);

// Total algebraic multiplicity of eigenvalues of M on the arc
// {e^{i s} : |s| <= |arg omega|} (closed arc through 1).
int e_omega_count(const std::vector<cplx>& eigenvalues, cplx omega, double tol = 1e-8);

} // namespace hamtrace

#endif
