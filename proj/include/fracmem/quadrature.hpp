#pragma once

#include <vector>

namespace fracmem {

/// Gauss-Legendre rule on [-1, 1]; nodes ascending. Built once per order
/// by Newton iteration and cached.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int points);

/// Integrates f over [a, b] with the given rule.
template <class F>
double gauss_panel(F&& f, double a, double b, const GaussRule& rule) {
    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t k = 0; k < rule.nodes.size(); ++k)
        acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
    return acc * half;
}

/// Breakpoints 0 = s_0 < s_1 < ... < s_P = length with panels clustered at
/// 0: s_j = length * (j/P)^grading.
std::vector<double> graded_breakpoints(double length, int panels, double grading);

/// Integral over [a,b] of tau^{e0} * (t - tau)^{e1}, with 0 <= a < b <= t
/// and e0, e1 > -1. Endpoint singularities are removed by power
/// substitutions; interior panels use plain Gauss-Legendre.
double algebraic_panel_integral(double e0, double e1, double t, double a, double b);

/// Zeroth and first moments of the same weight:
///   m0 = int tau^{e0} (t-tau)^{e1} dtau,  m1 = int tau^{e0+1} (t-tau)^{e1} dtau.
struct MomentPair {
    double m0;
    double m1;
};
MomentPair algebraic_moments(double e0, double e1, double t, double a, double b);

}  // namespace fracmem
