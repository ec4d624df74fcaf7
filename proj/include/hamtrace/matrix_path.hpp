#ifndef HAMTRACE_MATRIX_PATH_HPP
#define HAMTRACE_MATRIX_PATH_HPP

#include "hamtrace/core.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace hamtrace {

enum class Interp { Linear, Cubic };

// Time-parameterized square matrix t -> B(t) on [0,T].
//
// Three sources: a constant matrix, a named builtin family (closed form),
// or tabulated samples interpolated at a declared order. Immutable after
// construction; evaluation is thread-safe.
class MatrixPath {
public:
    MatrixPath() = default; // empty path; usable only after assignment

    static MatrixPath constant(const Mat& B0, double T);
    static MatrixPath builtin(const std::string& name, double dim, double T,
                              std::function<Mat(double)> eval,
                              std::vector<double> breakpoints = {});
    static MatrixPath tabulated(std::vector<double> times, std::vector<Mat> values,
                                Interp order);

    int dim() const { return dim_; }
    double period() const { return T_; }
    const std::string& kind() const { return kind_; }
    const std::string& builtin_name() const { return name_; }

    // Interior times where the path is only piecewise smooth; integrators
    // split steps there.
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    Mat eval(double t) const;
    Mat operator()(double t) const { return eval(t); }

    bool is_constant() const { return kind_ == "constant"; }
    const Mat& constant_value() const { return const_value_; }

    // max over a uniform probe grid of ||B(t) - B(t)^T||_inf
    double symmetry_defect(int samples = 257) const;

    // serialization hooks used by config round-trip
    const std::vector<double>& sample_times() const { return times_; }
    const std::vector<Mat>& sample_values() const { return values_; }
    Interp interp_order() const { return interp_; }
    const std::vector<std::pair<std::string, double>>& builtin_params() const { return params_; }

private:
    friend MatrixPath make_builtin(const std::string&,
                                   const std::vector<std::pair<std::string, double>>&);
    std::string kind_;
    std::string name_;
    int dim_ = 0;
    double T_ = 0.0;
    Mat const_value_;
    std::function<Mat(double)> fn_;
    std::vector<double> breakpoints_;
    std::vector<std::pair<std::string, double>> params_;

    // tabulated data
    std::vector<double> times_;
    std::vector<Mat> values_;
    Interp interp_ = Interp::Cubic;
    // per-entry cubic second-derivative coefficients (not-a-knot spline)
    std::vector<Mat> spline_m_;
    void build_spline();
};

// Registry of builtin families; throws config_error for unknown names.
// Known names:
//   threebody        params beta, e        4x4 linearized essential block, T=2pi
//   threebody_kbeta  params beta           constant K_beta
//   threebody_kminus params beta           cos^-(t) K_beta
//   threebody_kplus  params beta           cos^+(t) K_beta
//   threebody_d      params beta, e        e cos t/(1+e cos t) K_beta
MatrixPath make_builtin(const std::string& name,
                        const std::vector<std::pair<std::string, double>>& params);

} // namespace hamtrace

#endif
