#ifndef HAMTRACE_INDEX_STABILITY_HPP
#define HAMTRACE_INDEX_STABILITY_HPP

#include "hamtrace/boundary.hpp"
#include "hamtrace/matrix_path.hpp"
#include "hamtrace/sturm_liouville.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hamtrace {

struct IndexBoundReport {
    int m_minus = 0;
    int m_plus = 0;
    bool nondegenerate_certified = false;
    std::vector<cplx> traces_D1; // even-power traces used for the infima
    std::vector<cplx> traces_D2;
    // oracle side
    int crossing_count = 0;        // eigenvalues of the pencil in (0,1), with multiplicity
    int galerkin_index = 0;        // negative-count difference of the truncated operators
    bool oracle_ok = false;
};

// Certificate that A - B - D - nu J stays non-degenerate: needs brackets
// D1 < 0 < D2 pointwise with D1 <= D <= D2 and some even power k <= k_max with
// both Tr[(D_j (A-B-nu J)^{-1})^k] <= 1. False means inconclusive.
bool nondegeneracy_certificate(const MatrixPath& B, const MatrixPath& D, const BoundaryData& bc,
                               const MatrixPath& D1, const MatrixPath& D2, int k_max,
                               double tol = 1e-11);

// Two-sided index bound -m^- <= I(A-B-nuJ, A-B-D-nuJ) <= m^+ from even-power
// traces of the bracket perturbations, plus the oracle-counted crossings.
IndexBoundReport index_bracket(const MatrixPath& B, const MatrixPath& D, const BoundaryData& bc,
                               const MatrixPath& D1, const MatrixPath& D2, int k_max,
                               double tol = 1e-11);

// Relative Morse index of (A - nu J - B) vs (A - nu J - B - D) as the
// difference of negative-eigenvalue counts on a shared Fourier truncation.
int relative_morse_index_galerkin(const MatrixPath& B, const MatrixPath& D,
                                  const BoundaryData& bc, int K);

struct StabilityClaim {
    cplx omega;
    cplx trace2 = 0.0;
    bool criterion_holds = false;
    std::string claim;     // "spectrally-stable" | "elliptic-count" | "hyperbolic" | "inconclusive"
    std::string criterion; // which structural route produced it
    int e_omega_bound = 0; // claimed lower bound on e_omega(M)/2 (when applicable)
};

struct StabilityVerdict {
    std::vector<StabilityClaim> claims;
};

// Per-omega stability claims for the perturbed problem B + D, using the
// structural special forms (monodromy = I, constant commuting B, hyperbolic
// monodromy sampled over the nu interval).
StabilityVerdict stability_criteria(const MatrixPath& B, const MatrixPath& D,
                                    const BoundaryData& bc_template,
                                    const std::vector<cplx>& omegas, double tol = 1e-11);

// Morse index bound for the second-order operator family: given the base
// operator positive and R1 >= -K_path with K_path > 0, the index of the
// perturbed operator is at most inf_k Tr[(K A(nu)^{-1})^k].
int morse_bound_sl(const SturmLiouvilleProblem& slp, const MatrixPath& K_path, int k_max = 4,
                   double tol = 1e-11);

} // namespace hamtrace

#endif
