// Test-only reference implementations, independent of the library paths
// they are used to check.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracles {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

// Gamma via upward shift plus a Stirling tail in long double:
// Gamma(x) = Gamma(x + k) / (x (x+1) ... (x+k-1)) with x + k >= 40.
inline long double gamma_stirling(long double x) {
    if (x <= 0.0L) throw std::invalid_argument("gamma_stirling: x must be positive");
    long double shift = 1.0L;
    while (x < 40.0L) {
        shift *= x;
        x += 1.0L;
    }
    // log Gamma by the Stirling series with Bernoulli terms through B_16.
    const long double c[8] = {
        1.0L / 12.0L,     -1.0L / 360.0L,     1.0L / 1260.0L,  -1.0L / 1680.0L,
        1.0L / 1188.0L, -691.0L / 360360.0L,  1.0L / 156.0L, -3617.0L / 122400.0L,
    };
    constexpr long double pi = 3.14159265358979323846264338327950288L;
    long double lg = (x - 0.5L) * std::log(x) - x + 0.5L * std::log(2.0L * pi);
    long double xp = x;
    for (int i = 0; i < 8; ++i) {
        lg += c[i] / xp;
        xp *= x * x;
    }
    return std::exp(lg) / shift;
}

// Extended-precision Mittag-Leffler series with compensated summation.
// At least min_terms terms are always taken; the sum is extended until the
// term magnitude falls below 1e-26 * (1 + |sum|). Returns the value and the
// largest term magnitude (cancellation indicator) through *peak.
inline long double ml_series(long double alpha, long double beta, long double z,
                             int min_terms = 500, long double* peak = nullptr,
                             int max_terms = 400000) {
    long double sum = 0.0L, comp = 0.0L, pk = 0.0L;
    for (int k = 0; k < max_terms; ++k) {
        long double lt = (z == 0.0L && k > 0)
                             ? -std::numeric_limits<long double>::infinity()
                             : k * std::log(std::fabs(z)) - std::lgamma(k * alpha + beta);
        if (z == 0.0L && k == 0) lt = -std::lgamma(beta);
        long double mag = std::exp(lt);
        long double term = (z < 0.0L && (k & 1)) ? -mag : mag;
        long double y = term - comp;
        long double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        pk = std::max(pk, mag);
        if (k >= min_terms && mag <= 1e-26L * (1.0L + std::fabs(sum))) break;
    }
    if (peak) *peak = pk;
    return sum;
}

// Matrix exponential by scaling and squaring over a plain Taylor series.
inline Mat expm(const Mat& A) {
    int s = 0;
    double nrm = A.norm();
    while (nrm > 0.25) {
        nrm *= 0.5;
        ++s;
    }
    Mat M = A / std::pow(2.0, s);
    Mat sum = Mat::Identity(A.rows(), A.cols());
    Mat term = sum;
    for (int k = 1; k <= 30; ++k) {
        term = (term * M) / k;
        sum += term;
        if (term.norm() < 1e-18 * sum.norm()) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

// Composite trapezoid over uniform samples.
inline double trapezoid(const std::vector<double>& y, double h) {
    double acc = 0.5 * (y.front() + y.back());
    for (size_t i = 1; i + 1 < y.size(); ++i) acc += y[i];
    return acc * h;
}

// Dense Riemann-style reference for int_0^t (t-tau)^{e1} tau^{e0} f(tau) dtau
// via midpoint refinement; good to ~1e-8 for the smooth f used in tests.
template <class F>
double singular_integral(double e0, double e1, double t, F&& f, int panels = 200000) {
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        // Graded mesh toward both endpoints.
        double u0 = static_cast<double>(i) / panels;
        double u1 = static_cast<double>(i + 1) / panels;
        auto warp = [&](double u) { return t * (3.0 - 2.0 * u) * u * u; };
        double a = warp(u0), b = warp(u1);
        double mid = 0.5 * (a + b);
        acc += std::pow(mid, e0) * std::pow(t - mid, e1) * f(mid) * (b - a);
    }
    return acc;
}

inline std::mt19937& rng() {
    static std::mt19937 gen(20240913u);
    return gen;
}

inline double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng());
}

inline Mat random_matrix(int r, int c) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = uniform(-1.0, 1.0);
    return m;
}

}  // namespace oracles
