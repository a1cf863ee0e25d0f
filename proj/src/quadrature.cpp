#include "fracmem/quadrature.hpp"

#include "fracmem/types.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace fracmem {

namespace {

GaussRule build_gauss(int n) {
    GaussRule rule;
    rule.nodes.resize(static_cast<size_t>(n));
    rule.weights.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[static_cast<size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return rule;
}

const GaussRule& panel_rule() { return gauss_legendre(20); }

// int_0^c tau^{e0} * g(tau) dtau with e0 in (-1, 0), g smooth on [0, c]:
// substitute tau = c * y^{1/(1+e0)} so the weight becomes constant in y.
template <class G>
double desingularized_left(double e0, double c, G&& g) {
    double s = 1.0 / (1.0 + e0);
    double scale = std::pow(c, 1.0 + e0) * s;
    return scale * gauss_panel([&](double y) { return g(c * std::pow(y, s)); }, 0.0, 1.0,
                               panel_rule());
}

}  // namespace

const GaussRule& gauss_legendre(int points) {
    if (points < 1 || points > 256) throw DomainError("gauss_legendre: order out of range");
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(points);
    if (it == cache.end()) it = cache.emplace(points, build_gauss(points)).first;
    return it->second;
}

std::vector<double> graded_breakpoints(double length, int panels, double grading) {
    if (panels < 1) throw DomainError("graded_breakpoints: need at least one panel");
    std::vector<double> pts(static_cast<size_t>(panels) + 1);
    for (int j = 0; j <= panels; ++j)
        pts[static_cast<size_t>(j)] =
            length * std::pow(static_cast<double>(j) / panels, grading);
    pts.front() = 0.0;
    pts.back() = length;
    return pts;
}

double algebraic_panel_integral(double e0, double e1, double t, double a, double b) {
    if (!(b > a) || a < 0.0 || b > t * (1.0 + 1e-14))
        throw DomainError("algebraic_panel_integral: bad panel");
    if (e0 <= -1.0 || e1 <= -1.0)
        throw IntegrabilityError("algebraic_panel_integral: non-integrable exponent");
    b = std::min(b, t);

    const bool at_zero = (a <= 0.0) && (e0 < -1e-14);
    const bool at_t = (b >= t * (1.0 - 1e-15)) && (e1 < -1e-14);

    if (at_zero && at_t) {
        double mid = 0.5 * (a + b);
        return algebraic_panel_integral(e0, e1, t, a, mid) +
               algebraic_panel_integral(e0, e1, t, mid, b);
    }
    if (at_zero)
        return desingularized_left(e0, b, [&](double tau) { return std::pow(t - tau, e1); });
    if (at_t) {
        // Mirror: u = t - tau.
        double c = t - a;
        return desingularized_left(e1, c, [&](double u) { return std::pow(t - u, e0); });
    }
    return gauss_panel([&](double tau) { return std::pow(tau, e0) * std::pow(t - tau, e1); },
                       a, b, panel_rule());
}

MomentPair algebraic_moments(double e0, double e1, double t, double a, double b) {
    MomentPair m;
    m.m0 = algebraic_panel_integral(e0, e1, t, a, b);
    m.m1 = algebraic_panel_integral(e0 + 1.0, e1, t, a, b);
    return m;
}

}  // namespace fracmem
