#ifndef HAMTRACE_SPECTRAL_ORACLE_HPP
#define HAMTRACE_SPECTRAL_ORACLE_HPP

#include "hamtrace/boundary.hpp"
#include "hamtrace/matrix_path.hpp"

#include <string>
#include <vector>

namespace hamtrace {

struct EigenvalueHit {
    double lambda = 0.0;
    int multiplicity = 1;
    // |h(lambda)| relative to the typical scan magnitude, re-evaluated through
    // the exact coefficient paths at doubled integrator accuracy
    double residual = 0.0;
};

struct TailFit {
    double slope = 0.0; // fitted spacing coefficient (lambda_j ~ slope*j + intercept)
    double intercept = 0.0;
    int fitted = 0;
    double rms_rel = 0.0;
};

struct SpectrumSlice {
    std::vector<EigenvalueHit> eigenvalues; // sorted ascending
    double window = 0.0;
    std::string method; // "det-rootfind" | "galerkin"
    TailFit fit_pos, fit_neg;
    double scale = 0.0; // typical |h| magnitude away from roots
    int density_power = 1; // lambda_j ~ j^density_power (1 first-order, 2 Sturm-Liouville)

    int total_multiplicity() const {
        int s = 0;
        for (const auto& e : eigenvalues) s += e.multiplicity;
        return s;
    }
};

// Real normalization omega^{-n} det(S gamma_lambda(T) - omega I); real-valued
// along real lambda for real coefficient data and imaginary nu.
double shooting_determinant(const MatrixPath& B, const MatrixPath& D, const BoundaryData& bc,
                            double lambda, double tol);

// Grid-scan root finder on [-window, window]: brackets sign changes, chases
// |h| minima for even-order roots, refines to ~1e-10, certifies each root by
// re-integration at doubled accuracy, and reads multiplicity off the slope of
// log|h| over three decades of approach (ties rounded up).
// sqrt_density spaces the scan uniformly in sign(l)*sqrt(|l|) for spectra
// that grow quadratically.
SpectrumSlice eigenvalues_by_shooting(const MatrixPath& B, const MatrixPath& D,
                                      const BoundaryData& bc, double window, int grid,
                                      double tol = 1e-10, bool sqrt_density = false);

struct PowerSum {
    cplx value = 0.0;
    double error_bound = 0.0;
    cplx tail = 0.0;
};

// sum of 1/lambda^m over the slice plus fitted-density tail (m >= 2 only).
PowerSum reciprocal_power_sum(const SpectrumSlice& slice, int m);

// density fit of sorted (|lambda|, multiplicity) pairs against the
// multiplicity-centered counting index; shared by both oracle routes.
TailFit fit_counting(const std::vector<std::pair<double, int>>& distinct, int density_power);

struct HillRatio {
    cplx lhs = 0.0; // eigenvalue product with tail correction
    cplx rhs = 0.0; // monodromy determinant ratio
    double rel_err = 0.0;
};

// Infinite-product identity: prod_j (1 - 1/lambda_j) against
// det(S gamma_1(T) - I) det(S gamma_0(T) - I)^{-1} at nu = 0.
HillRatio hill_ratio_check(const MatrixPath& B, const MatrixPath& D, const BoundaryData& bc,
                           const SpectrumSlice& slice);

} // namespace hamtrace

#endif
