#ifndef HAMTRACE_INTEGRATOR_HPP
#define HAMTRACE_INTEGRATOR_HPP

#include "hamtrace/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace hamtrace {

struct IntegratorStats {
    long steps = 0;
    long rejected = 0;
    double tol = 0.0;
};

// One accepted Dormand-Prince 5(4) step with Hairer's 4th-order dense output.
template <class Scalar>
struct DenseSegment {
    using M = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    double t0 = 0, h = 0;
    M c0, c1, c2, c3, c4;

    M eval(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        return c0 + th * (c1 + th1 * (c2 + th * (c3 + th1 * c4)));
    }
};

// Adaptive explicit Runge-Kutta 5(4) on matrix-valued ODEs y' = f(t, y).
// Steps never straddle the supplied breakpoints (kinks in coefficients).
template <class Scalar>
class Dopri5 {
public:
    using M = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Rhs = std::function<M(double, const M&)>;

    Dopri5(Rhs f, double rtol, double atol) : f_(std::move(f)), rtol_(rtol), atol_(atol) {}

    // Integrates from (t0, y0) to t1 > t0. If record is true, dense-output
    // segments are stored and retrievable via segments().
    M integrate(double t0, const M& y0, double t1,
                const std::vector<double>& breakpoints = {}, bool record = false) {
        segments_.clear();
        stats_ = IntegratorStats{};
        stats_.tol = rtol_;

        std::vector<double> stops;
        for (double b : breakpoints)
            if (b > t0 + 1e-14 && b < t1 - 1e-14) stops.push_back(b);
        stops.push_back(t1);
        std::sort(stops.begin(), stops.end());

        M y = y0;
        double t = t0;
        double h = initial_step(t0, y0, stops.front());
        for (double stop : stops) {
            while (t < stop - 1e-14 * std::max(1.0, std::abs(stop))) {
                h = std::min(h, stop - t);
                if (h < 1e-14 * std::max(1.0, std::abs(stop)))
                    throw domain_error("integrator step size underflow (stiffness?)");
                step(t, y, h, record);
            }
            t = stop;
        }
        return y;
    }

    const std::vector<DenseSegment<Scalar>>& segments() const { return segments_; }
    const IntegratorStats& stats() const { return stats_; }

private:
    Rhs f_;
    double rtol_, atol_;
    IntegratorStats stats_;
    std::vector<DenseSegment<Scalar>> segments_;

    double initial_step(double t0, const M&, double t1) const {
        const double span = t1 - t0;
        return std::min(span, std::max(1e-6 * span, 1e-3));
    }

    double err_norm(const M& e, const M& y, const M& ynew) const {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < e.size(); ++i) {
            const double sc = atol_ + rtol_ * std::max(std::abs(y(i)), std::abs(ynew(i)));
            const double q = std::abs(e(i)) / sc;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(e.size()));
    }

    void step(double& t, M& y, double& h, bool record) {
        static const double a21 = 1.0 / 5;
        static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        // dense output weights (Hairer, Norsett, Wanner DOPRI5 CONTD5)
        static const double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

        for (;;) {
            const M k1 = f_(t, y);
            const M k2 = f_(t + c2 * h, y + h * (a21 * k1));
            const M k3 = f_(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
            const M k4 = f_(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const M k5 = f_(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const M k6 = f_(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const M ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const M k7 = f_(t + h, ynew);
            const M errm = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double err = err_norm(errm, y, ynew);
            if (err <= 1.0) {
                if (record) {
                    DenseSegment<Scalar> seg;
                    seg.t0 = t;
                    seg.h = h;
                    seg.c0 = y;
                    seg.c1 = ynew - y;
                    seg.c2 = h * k1 - seg.c1;
                    seg.c3 = seg.c1 - h * k7 - seg.c2;
                    seg.c4 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                    segments_.push_back(std::move(seg));
                }
                t += h;
                y = ynew;
                ++stats_.steps;
                const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
                h *= fac;
                return;
            }
            ++stats_.rejected;
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            if (h < 1e-14) throw domain_error("integrator step size underflow (stiffness?)");
        }
    }
};

// Adaptive Gauss-Kronrod (15 point) quadrature of a scalar- or matrix-valued
// function; used for the time integrals of coefficient paths.
template <class Value>
Value adaptive_quad(const std::function<Value(double)>& f, double a, double b, double tol,
                    int max_depth = 30);

namespace detail {
// 7-15 Gauss-Kronrod nodes/weights on [-1,1]
inline const double gk_x[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline const double gk_wk[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline const double gk_wg[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870};

template <class Value>
void gk15(const std::function<Value(double)>& f, double a, double b, Value& kron, double& err) {
    const double hc = 0.5 * (b - a), mid = 0.5 * (a + b);
    Value g{}, k{};
    bool init = false;
    for (int i = 0; i < 15; ++i) {
        Value v = f(mid + hc * gk_x[i]);
        if (!init) {
            k = gk_wk[i] * v;
            if (i % 2 == 1)
                g = gk_wg[i / 2] * v;
            else
                g = 0.0 * v;
            init = true;
        } else {
            k += gk_wk[i] * v;
            if (i % 2 == 1) g += gk_wg[i / 2] * v;
        }
    }
    kron = hc * k;
    Value diff = hc * g - kron;
    if constexpr (std::is_arithmetic_v<Value>)
        err = std::abs(diff);
    else if constexpr (std::is_same_v<Value, cplx>)
        err = std::abs(diff);
    else
        err = diff.cwiseAbs().maxCoeff();
}
} // namespace detail

template <class Value>
Value adaptive_quad(const std::function<Value(double)>& f, double a, double b, double tol,
                    int max_depth) {
    Value kron;
    double err;
    detail::gk15(f, a, b, kron, err);
    if (err < tol || max_depth <= 0) return kron;
    const double mid = 0.5 * (a + b);
    return adaptive_quad(f, a, mid, tol / 2, max_depth - 1) +
           adaptive_quad(f, mid, b, tol / 2, max_depth - 1);
}

} // namespace hamtrace

#endif
