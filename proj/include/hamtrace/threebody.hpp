#ifndef HAMTRACE_THREEBODY_HPP
#define HAMTRACE_THREEBODY_HPP

#include "hamtrace/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hamtrace::threebody {

// Mass parameter from a mass triple: 27(m1 m2 + m1 m3 + m2 m3)/(m1+m2+m3)^2.
double beta_of_masses(double m1, double m2, double m3);

void check_beta_e(double beta, double e);

// 4x4 coefficient matrix of the essential linearized block at true anomaly t.
Mat B_path(double beta, double e, double t);

// Constant splitting matrix K_beta = diag(0,0,(3+sqrt(9-beta))/2,(3-sqrt(9-beta))/2).
Mat K_beta(double beta);

// Eigen-structure of the circular (e=0) problem.
//
// theta1 = -sqrt((1-sqrt(1-beta))/2), theta2 = sqrt((1+sqrt(1-beta))/2);
// for beta > 1 the branch sqrt(1-beta) = +i sqrt(beta-1) is used throughout.
// P diagonalizes J*B (P^{-1} J B P = S_beta) and is symplectic (P^T J P = J);
// the unitary U takes the rotation normal form to exp(i Theta t).
struct Diagonalization {
    double beta;
    cplx theta1, theta2;          // theta3 = -theta1, theta4 = -theta2
    CMat P;                       // 4x4 transformation
    CMat U;                       // (1/sqrt2) [[I, iI],[I, -iI]]
    CVec theta;                   // diag of Theta: (t1, t2, -t1, -t2)
    CMat JD_tilde;                // J * U^{-T} P^T K_beta P U^{-1}
    cplx a, b, c, h, f, g;        // entries of P^T K_beta P
    double d1, d2;

    CMat S_beta() const;          // block normal form of J*B_beta
    CMat M_omega(cplx omega) const; // diag of exp(2pi i Theta)(exp(2pi i Theta) - omega)^{-1}
};

Diagonalization diagonalize(double beta);

// Dual-route trace values f(beta, omega) = Tr[(K^- (A - nu J - B_{beta,0})^{-1})^2].
//
// f_closed uses the elementary double sums over the normal-form frame; it
// refuses near the resonance shells |(theta_m - theta_n)^2 - 1| < tol_res and
// near poles omega ~ exp(2pi i theta_j).
double f_closed(double beta, cplx omega, double tol_res = 1e-4, double tol_pole = 1e-6);

// f via numeric evaluation of the nested integrals in the exp(i Theta t) frame.
// sign = -1 selects cos^- K_beta (default), +1 the cos^+ variant; the two must
// agree (half-period shift symmetry of the circular problem).
double f_quadrature(double beta, cplx omega, int sign = -1, double tol = 1e-11);

// f via the original-frame trace formula (no normal-form transformation at
// all); robust at beta in {1} and inside resonance shells. Serves as the
// route of record where the other two refuse.
double f_direct(double beta, cplx omega, int sign = -1, double tol = 1e-11);

// Best available f: closed form where admissible, else quadrature, else direct.
double f_eval(double beta, cplx omega);

// sup over the unit circle of f(beta, ·), by coarse scan + golden-section.
double f_hat(double beta, int scan = 256);

// First-order trace kernel g(beta, nu) = -Tr(J K_beta M (M - omega I)^{-1}),
// M the circular monodromy, omega = exp(2 pi nu). Closed form for beta in (1,9].
double g_closed(double beta, cplx nu);
// Same value through the transformed-frame trace; the two must agree to 1e-10.
double g_via_trace(double beta, cplx nu);

double g_hat(double beta, int scan = 256);

// Right-hand side of the elementary hyperbolicity bound (a function of beta alone).
double h_bound(double beta);

// Eccentricity weight pi - (4/sqrt(1-e^2)) atan(sqrt((1-e)/(1+e)));
// equals the integral of e cos^+(t)/(1+e cos t) over one period.
double ecc_weight(double e);

struct CurvePoint {
    double beta;
    double e;
};

struct RegionCurve {
    std::string tag;      // "G1".."G7"
    std::string relation; // defining relation, for the CSV header
    std::vector<CurvePoint> samples;
};

// All seven certified region boundary curves at the given per-curve resolution.
std::vector<RegionCurve> region_curves(int resolution, int jobs = 0);

struct ClassifyResult {
    std::string verdict;        // "linear-stable" | "hyperbolic" | "inconclusive"
    std::string criterion;      // which bound fired
    std::optional<std::string> normal_form; // rotation-pair tag for stable points
    // direct monodromy cross-check
    std::vector<cplx> eigenvalues;
    std::string eigenvalue_configuration; // "elliptic" | "hyperbolic" | "mixed" | "degenerate"
};

ClassifyResult classify_point(double beta, double e, bool cross_check = true);

} // namespace hamtrace::threebody

#endif
