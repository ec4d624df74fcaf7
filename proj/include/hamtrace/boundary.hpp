#ifndef HAMTRACE_BOUNDARY_HPP
#define HAMTRACE_BOUNDARY_HPP

#include "hamtrace/core.hpp"

namespace hamtrace {

// Twisted boundary condition z(0) = omega S z(T) with S symplectic-orthogonal
// and omega = exp(nu T) on the unit circle for imaginary nu.
struct BoundaryData {
    Mat S;
    cplx nu = 0.0;
    cplx omega = 1.0;
    double T = 0.0;

    static BoundaryData make(const Mat& S, cplx nu, double T) {
        if (S.rows() != S.cols() || S.rows() % 2 != 0)
            throw config_error("boundary matrix S must be square of even dimension");
        if (symplectic_defect(S) > 1e-12)
            throw config_error("boundary matrix S is not symplectic");
        if (orthogonal_defect(S) > 1e-12)
            throw config_error("boundary matrix S is not orthogonal");
        BoundaryData b;
        b.S = S;
        b.nu = nu;
        b.T = T;
        b.omega = std::exp(nu * T);
        return b;
    }

    int dim() const { return static_cast<int>(S.rows()); }

    void require_imaginary_nu(const char* where) const {
        if (std::abs(nu.real()) > 1e-12)
            throw domain_error(std::string(where) + ": requires purely imaginary nu");
    }
};

struct StandardSymplecticForm {
    int n;
    Mat J;
    explicit StandardSymplecticForm(int half_dim) : n(half_dim), J(standard_J(half_dim)) {}
};

} // namespace hamtrace

#endif
