#include "hamtrace/matrix_path.hpp"
#include "hamtrace/threebody.hpp"

#include <algorithm>
#include <cmath>

namespace hamtrace {

MatrixPath MatrixPath::constant(const Mat& B0, double T) {
    if (B0.rows() != B0.cols()) throw config_error("constant path: matrix not square");
    if (!(T > 0)) throw config_error("constant path: period must be positive");
    MatrixPath p;
    p.kind_ = "constant";
    p.dim_ = static_cast<int>(B0.rows());
    p.T_ = T;
    p.const_value_ = B0;
    return p;
}

MatrixPath MatrixPath::builtin(const std::string& name, double dim, double T,
                               std::function<Mat(double)> eval,
                               std::vector<double> breakpoints) {
    MatrixPath p;
    p.kind_ = "builtin";
    p.name_ = name;
    p.dim_ = static_cast<int>(dim);
    p.T_ = T;
    p.fn_ = std::move(eval);
    p.breakpoints_ = std::move(breakpoints);
    return p;
}

MatrixPath MatrixPath::tabulated(std::vector<double> times, std::vector<Mat> values,
                                 Interp order) {
    if (times.size() < 2 || times.size() != values.size())
        throw config_error("tabulated path: need matching times/values, at least two samples");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw config_error("tabulated path: sample times must be strictly increasing");
    if (std::abs(times.front()) > 1e-14)
        throw config_error("tabulated path: samples must start at t=0");
    const Eigen::Index d = values[0].rows();
    for (const auto& V : values)
        if (V.rows() != d || V.cols() != d)
            throw config_error("tabulated path: inconsistent sample dimensions");

    MatrixPath p;
    p.kind_ = "tabulated";
    p.dim_ = static_cast<int>(d);
    p.T_ = times.back();
    p.times_ = std::move(times);
    p.values_ = std::move(values);
    p.interp_ = order;
    if (order == Interp::Cubic) p.build_spline();
    return p;
}

// Not-a-knot cubic spline, entrywise. spline_m_ holds second derivatives.
void MatrixPath::build_spline() {
    const int N = static_cast<int>(times_.size());
    spline_m_.assign(N, Mat::Zero(dim_, dim_));
    if (N < 4) return; // fall back to natural-ish (zeros) for tiny tables

    const int n = N - 1;
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) h[i] = times_[i + 1] - times_[i];

    // Solve the tridiagonal-with-corners system per matrix entry.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (int i = 1; i < n; ++i) {
        A(i, i - 1) = h[i - 1];
        A(i, i) = 2.0 * (h[i - 1] + h[i]);
        A(i, i + 1) = h[i];
    }
    // not-a-knot: third derivative continuous across first/last interior knot
    A(0, 0) = h[1];
    A(0, 1) = -(h[0] + h[1]);
    A(0, 2) = h[0];
    A(N - 1, N - 3) = h[n - 1];
    A(N - 1, N - 2) = -(h[n - 2] + h[n - 1]);
    A(N - 1, N - 1) = h[n - 2];

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd rhs(N), m(N);
    for (int r = 0; r < dim_; ++r)
        for (int c = 0; c < dim_; ++c) {
            rhs.setZero();
            for (int i = 1; i < n; ++i)
                rhs(i) = 6.0 * ((values_[i + 1](r, c) - values_[i](r, c)) / h[i] -
                                (values_[i](r, c) - values_[i - 1](r, c)) / h[i - 1]);
            m = lu.solve(rhs);
            for (int i = 0; i < N; ++i) spline_m_[i](r, c) = m(i);
        }
}

Mat MatrixPath::eval(double t) const {
    if (t < -1e-12 || t > T_ * (1.0 + 1e-12))
        throw domain_error("matrix path evaluated outside [0,T]");
    t = std::clamp(t, 0.0, T_);
    if (kind_ == "constant") return const_value_;
    if (kind_ == "builtin") return fn_(t);

    // tabulated
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    int i = static_cast<int>(it - times_.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(times_.size()) - 2);
    const double h = times_[i + 1] - times_[i];
    const double a = (times_[i + 1] - t) / h;
    const double b = (t - times_[i]) / h;
    if (interp_ == Interp::Linear || spline_m_.empty())
        return a * values_[i] + b * values_[i + 1];
    return a * values_[i] + b * values_[i + 1] +
           ((a * a * a - a) * spline_m_[i] + (b * b * b - b) * spline_m_[i + 1]) * (h * h) / 6.0;
}

double MatrixPath::symmetry_defect(int samples) const {
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = T_ * k / (samples - 1);
        worst = std::max(worst, sym_defect(eval(t)));
    }
    return worst;
}

MatrixPath make_builtin(const std::string& name,
                        const std::vector<std::pair<std::string, double>>& params) {
    auto get = [&](const std::string& key) -> double {
        for (const auto& [k, v] : params)
            if (k == key) return v;
        throw config_error("builtin path '" + name + "' missing parameter '" + key + "'");
    };

    auto finish = [&](MatrixPath p) {
        p.params_ = params;
        p.kind_ = "builtin";
        p.name_ = name;
        return p;
    };

    if (name == "threebody") {
        const double beta = get("beta"), ecc = get("e");
        threebody::check_beta_e(beta, ecc);
        return finish(MatrixPath::builtin(
            name, 4, 2.0 * PI, [beta, ecc](double t) { return threebody::B_path(beta, ecc, t); }));
    }
    if (name == "threebody_kbeta") {
        const double beta = get("beta");
        return finish(MatrixPath::constant(threebody::K_beta(beta), 2.0 * PI));
    }
    if (name == "threebody_kminus" || name == "threebody_kplus") {
        const double beta = get("beta");
        const double sgn = (name == "threebody_kminus") ? -1.0 : 1.0;
        const Mat K = threebody::K_beta(beta);
        // cos^{+-} kinks at t = pi/2, 3pi/2
        return finish(MatrixPath::builtin(
            name, 4, 2.0 * PI,
            [K, sgn](double t) {
                const double c = std::cos(t);
                const double part = 0.5 * (c + sgn * std::abs(c));
                return Mat(part * K);
            },
            {PI / 2.0, 3.0 * PI / 2.0}));
    }
    if (name == "threebody_d") {
        const double beta = get("beta"), ecc = get("e");
        threebody::check_beta_e(beta, ecc);
        const Mat K = threebody::K_beta(beta);
        return finish(MatrixPath::builtin(name, 4, 2.0 * PI, [K, ecc](double t) {
            const double c = std::cos(t);
            return Mat((ecc * c / (1.0 + ecc * c)) * K);
        }));
    }
    throw config_error("unknown builtin path '" + name + "'");
}

} // namespace hamtrace
