#ifndef HAMTRACE_TEST_HELPERS_HPP
#define HAMTRACE_TEST_HELPERS_HPP

#include "hamtrace/boundary.hpp"
#include "hamtrace/matrix_path.hpp"

#include <memory>
#include <random>

namespace ht_test {

using namespace hamtrace;

inline Mat random_symmetric(int d, std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Mat A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = g(rng);
    return 0.5 * (A + A.transpose());
}

inline Mat random_spd(int d, std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Mat A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = g(rng);
    return A * A.transpose() + 0.05 * scale * scale * Mat::Identity(d, d);
}

// smooth symmetric trig-polynomial path  C0 + C1 cos(2 pi t/T) + S1 sin(2 pi t/T)
inline MatrixPath random_trig_path(int d, double T, std::mt19937& rng, double scale = 1.0,
                                   bool time_symmetric = false) {
    auto C0 = std::make_shared<Mat>(random_symmetric(d, rng, scale));
    auto C1 = std::make_shared<Mat>(random_symmetric(d, rng, scale));
    auto S1 = std::make_shared<Mat>(time_symmetric ? Mat(Mat::Zero(d, d))
                                                   : random_symmetric(d, rng, scale));
    return MatrixPath::builtin("trig", d, T, [C0, C1, S1, T](double t) {
        const double w = 2.0 * hamtrace::PI * t / T;
        return Mat(*C0 + std::cos(w) * (*C1) + std::sin(w) * (*S1));
    });
}

// strictly positive smooth path: Gram matrix of a trig factor plus a floor
inline MatrixPath random_spd_path(int d, double T, std::mt19937& rng, double scale = 1.0,
                                  bool time_symmetric = false) {
    std::normal_distribution<double> g(0.0, scale);
    auto draw = [&](double s) {
        Mat A(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) A(i, j) = s * g(rng);
        return A;
    };
    auto A0 = std::make_shared<Mat>(draw(1.0));
    auto A1 = std::make_shared<Mat>(draw(0.3));
    auto A2 = std::make_shared<Mat>(time_symmetric ? Mat(Mat::Zero(d, d)) : draw(0.3));
    const double floor = 0.05 * scale * scale;
    return MatrixPath::builtin("trig_gram", d, T, [A0, A1, A2, T, floor, d](double t) {
        const double w = 2.0 * hamtrace::PI * t / T;
        const Mat V = *A0 + std::cos(w) * (*A1) + std::sin(w) * (*A2);
        return Mat(V * V.transpose() + floor * Mat::Identity(d, d));
    });
}

inline MatrixPath scaled_path(const MatrixPath& p, double a) {
    auto base = std::make_shared<MatrixPath>(p);
    return MatrixPath::builtin("scaled", p.dim(), p.period(),
                               [base, a](double t) { return Mat(a * base->eval(t)); });
}

inline MatrixPath constant_path(const Mat& M, double T) { return MatrixPath::constant(M, T); }

} // namespace ht_test

#endif
