#include "fracmem/fraccalc.hpp"

#include "fracmem/quadrature.hpp"
#include "fracmem/specfun.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace fracmem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Regular part of f at the nodes: v(tau) = f(tau) * tau^{-e0}. The node-0
// value comes from the stored coefficient when present, otherwise from
// linear extrapolation of the first two interior samples.
std::vector<Vec> regular_part(const GridFn& f) {
    const int n = f.grid.count();
    std::vector<Vec> v(static_cast<size_t>(n));
    if (!f.singular_start) {
        for (int j = 0; j < n; ++j) v[static_cast<size_t>(j)] = f.at(j);
        return v;
    }
    const double e0 = f.start_exponent;
    for (int j = 1; j < n; ++j)
        v[static_cast<size_t>(j)] = f.at(j) * std::pow(f.grid.node(j), -e0);
    if (f.start_coeff.size() == f.dim)
        v[0] = f.start_coeff;
    else
        v[0] = 2.0 * v[1] - v[2];
    return v;
}

struct PanelWeights {
    double left;
    double right;
};

// Weights of the two nodal density values over panel [a, b] against the
// weight tau^{e0} (t - tau)^{e1}.
PanelWeights panel_weights(double e0, double e1, double t, double a, double b) {
    double m0, m1;
    if (e0 == 0.0) {
        double sa = t - a, sb = t - b;
        double p = e1 + 1.0;
        m0 = (std::pow(sa, p) - std::pow(sb, p)) / p;
        double d2 = (std::pow(sa, p + 1.0) - std::pow(sb, p + 1.0)) / (p + 1.0);
        m1 = t * m0 - d2;
    } else {
        MomentPair m = algebraic_moments(e0, e1, t, a, b);
        m0 = m.m0;
        m1 = m.m1;
    }
    double theta = (m1 - a * m0) / (b - a);
    return {m0 - theta, theta};
}

// One evaluation node of the convolution. `rtab[k]` holds r(k*h); row i uses
// rtab[i-j] at panel node j. When fold_end is set (final row with an
// end-singular density) the density's algebraic end factor is merged into
// the kernel exponent and `v` must already hold the de-singularized values.
Vec conv_row(int i, double mu, double e0, const std::vector<Mat>& rtab,
             const std::vector<Vec>& v, const TimeGrid& grid, DensityMode mode,
             double fold_end) {
    const double t = grid.node(i);
    const double e1 = (mu - 1.0) + fold_end;
    Vec acc = Vec::Zero(rtab[0].rows());
    for (int j = 0; j < i; ++j) {
        double a = grid.node(j), b = grid.node(j + 1);
        Vec dl = rtab[static_cast<size_t>(i - j)] * v[static_cast<size_t>(j)];
        if (mode == DensityMode::piecewise_constant) {
            double m0 = (e0 == 0.0)
                            ? (std::pow(t - a, e1 + 1.0) - std::pow(t - b, e1 + 1.0)) / (e1 + 1.0)
                            : algebraic_panel_integral(e0, e1, t, a, b);
            acc += m0 * dl;
        } else {
            Vec dr = rtab[static_cast<size_t>(i - j - 1)] * v[static_cast<size_t>(j + 1)];
            PanelWeights w = panel_weights(e0, e1, t, a, b);
            acc += w.left * dl + w.right * dr;
        }
    }
    return acc;
}

std::vector<Mat> kernel_table(const SingularKernel& k, const TimeGrid& grid) {
    std::vector<Mat> rtab(static_cast<size_t>(grid.count()));
    for (int j = 0; j < grid.count(); ++j) {
        rtab[static_cast<size_t>(j)] = k.smooth_part(grid.node(j));
        if (rtab[static_cast<size_t>(j)].rows() != k.rows ||
            rtab[static_cast<size_t>(j)].cols() != k.cols)
            throw DomainError("convolve_singular: kernel smooth part has wrong shape");
    }
    return rtab;
}

void check_conv_inputs(const SingularKernel& k, const GridFn& f) {
    if (k.cols != f.dim)
        throw DomainError("convolve_singular: kernel columns do not match density dimension");
    if (f.singular_start && f.start_exponent <= -1.0)
        throw IntegrabilityError("convolve_singular: density start exponent <= -1");
    f.check_finite("convolve_singular density");
}

// Value (or local model) of the convolution at t -> 0+.
void set_start_node(GridFn& out, double mu, double e0, const Mat& r0, const Vec& v0) {
    double p = mu + e0;
    if (p > 1e-12) {
        out.at(0).setZero();
        return;
    }
    Vec coeff = r0 * v0 *
                (gamma_fn(e0 + 1.0) * gamma_fn(mu) * reciprocal_gamma(e0 + 1.0 + mu));
    if (std::abs(p) <= 1e-12) {
        out.at(0) = coeff;  // finite limit
        return;
    }
    out.mark_singular_start(p, coeff);
}

// Gruenwald-Letnikov weights w_0..w_n.
std::vector<double> gl_weights(double alpha, int n) {
    std::vector<double> w(static_cast<size_t>(n) + 1);
    w[0] = 1.0;
    for (int k = 1; k <= n; ++k)
        w[static_cast<size_t>(k)] = w[static_cast<size_t>(k - 1)] * (1.0 - (alpha + 1.0) / k);
    return w;
}

// Plain GL pass over regular samples; node 0 gets h^{-alpha} f_0 which the
// caller interprets.
GridFn gl_apply(double alpha, const GridFn& f) {
    const int n = f.grid.intervals;
    const double scale = std::pow(f.grid.step(), -alpha);
    std::vector<double> w = gl_weights(alpha, n);
    GridFn out(f.grid, f.dim);
    for (int i = 0; i <= n; ++i) {
        Vec acc = Vec::Zero(f.dim);
        for (int k = 0; k <= i; ++k) acc += w[static_cast<size_t>(k)] * f.at(i - k);
        out.at(i) = scale * acc;
    }
    return out;
}

}  // namespace

GridFn fractional_integral_left(double alpha, const GridFn& f) {
    if (alpha < 0.0) throw DomainError("fractional_integral_left: alpha must be >= 0");
    if (f.singular_end)
        throw DomainError("fractional_integral_left: singular-end samples not supported");
    if (alpha == 0.0) return f;  // I^0 is the identity
    f.check_finite("fractional_integral_left");

    const double e0 = f.singular_start ? f.start_exponent : 0.0;
    if (e0 <= -1.0) throw IntegrabilityError("fractional_integral_left: start exponent <= -1");
    const std::vector<Vec> v = regular_part(f);
    const double rg = reciprocal_gamma(alpha);
    const TimeGrid& grid = f.grid;

    GridFn out(grid, f.dim);
    for (int i = 1; i < grid.count(); ++i) {
        const double t = grid.node(i);
        Vec acc = Vec::Zero(f.dim);
        for (int j = 0; j < i; ++j) {
            PanelWeights w = panel_weights(e0, alpha - 1.0, t, grid.node(j), grid.node(j + 1));
            acc += w.left * v[static_cast<size_t>(j)] + w.right * v[static_cast<size_t>(j + 1)];
        }
        out.at(i) = rg * acc;
    }
    // t -> 0 limit of I^alpha f.
    double p = alpha + e0;
    if (p > 1e-12) {
        out.at(0).setZero();
    } else {
        Vec coeff = v[0] * (gamma_fn(e0 + 1.0) * reciprocal_gamma(e0 + 1.0 + alpha));
        if (std::abs(p) <= 1e-12)
            out.at(0) = coeff;
        else
            out.mark_singular_start(p, coeff);
    }
    return out;
}

GridFn fractional_integral_right(double alpha, const GridFn& f) {
    if (alpha < 0.0) throw DomainError("fractional_integral_right: alpha must be >= 0");
    if (f.singular_start || f.singular_end)
        throw DomainError("fractional_integral_right: flagged samples not supported");
    if (alpha == 0.0) return f;
    f.check_finite("fractional_integral_right");

    const TimeGrid& grid = f.grid;
    const double rg = reciprocal_gamma(alpha);
    const int n = grid.intervals;
    GridFn out(grid, f.dim);
    for (int i = 0; i < n; ++i) {
        const double t = grid.node(i);
        Vec acc = Vec::Zero(f.dim);
        // Mirror of the left quadrature: weight (tau - t)^{alpha-1} on [t, T].
        for (int j = i; j < n; ++j) {
            double a = grid.node(j), b = grid.node(j + 1);
            double sa = a - t, sb = b - t;
            double m0 = (std::pow(sb, alpha) - std::pow(sa, alpha)) / alpha;
            double m1 =
                t * m0 + (std::pow(sb, alpha + 1.0) - std::pow(sa, alpha + 1.0)) / (alpha + 1.0);
            double theta = (m1 - a * m0) / (b - a);
            acc += (m0 - theta) * f.at(j) + theta * f.at(j + 1);
        }
        out.at(i) = rg * acc;
    }
    out.at(n).setZero();
    return out;
}

GridFn rl_derivative(double alpha, const GridFn& f) {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw DomainError("rl_derivative: alpha must lie in (0, 1]");
    if (f.singular_end) throw DomainError("rl_derivative: singular-end samples not supported");
    f.check_finite("rl_derivative");

    if (!f.singular_start) {
        GridFn out = gl_apply(alpha, f);
        if (f.at(0).norm() > 0.0) {
            // d/dt I^{1-alpha} of the jump f(0) contributes f(0) t^{-alpha}/Gamma(1-alpha).
            out.mark_singular_start(-alpha, f.at(0) * reciprocal_gamma(1.0 - alpha));
        } else {
            out.at(0).setZero();
        }
        return out;
    }

    // f = t^{e0} v with v regular: differentiate the leading algebraic term
    // analytically and apply the scheme to the remainder, which vanishes at 0.
    const double e0 = f.start_exponent;
    if (e0 <= -1.0) throw IntegrabilityError("rl_derivative: start exponent <= -1");
    const std::vector<Vec> v = regular_part(f);
    const Vec v0 = v[0];
    const double lead = gamma_fn(e0 + 1.0) * reciprocal_gamma(e0 + 1.0 - alpha);

    GridFn remainder(f.grid, f.dim);
    remainder.at(0).setZero();
    for (int j = 1; j < f.grid.count(); ++j)
        remainder.at(j) = f.at(j) - v0 * std::pow(f.grid.node(j), e0);
    GridFn out = gl_apply(alpha, remainder);
    const Vec lead_coeff = lead * v0;
    for (int i = 1; i < f.grid.count(); ++i)
        out.at(i) += lead_coeff * std::pow(f.grid.node(i), e0 - alpha);
    if (lead_coeff.norm() > 0.0)
        out.mark_singular_start(e0 - alpha, lead_coeff);
    else
        out.at(0).setZero();
    return out;
}

GridFn rl_derivative_iterated(double alpha, int count, const GridFn& f) {
    if (count < 0) throw DomainError("rl_derivative_iterated: count must be >= 0");
    GridFn out = f;
    for (int j = 0; j < count; ++j) out = rl_derivative(alpha, out);
    return out;
}

GridFn convolve_singular(const SingularKernel& kernel, const GridFn& f, DensityMode mode) {
    check_conv_inputs(kernel, f);
    const TimeGrid& grid = f.grid;
    const double mu = kernel.exponent;
    const double e0 = f.singular_start ? f.start_exponent : 0.0;
    const std::vector<Mat> rtab = kernel_table(kernel, grid);
    const std::vector<Vec> v = regular_part(f);

    GridFn out(grid, kernel.rows);
    const int last = grid.intervals;
    for (int i = 1; i <= last; ++i) {
        if (i == last && f.singular_end) {
            out.at(i) = convolve_singular_final(kernel, f, mode);
            continue;
        }
        out.at(i) = conv_row(i, mu, e0, rtab, v, grid, mode, 0.0);
    }
    set_start_node(out, mu, e0, rtab[0], v[0]);
    return out;
}

Vec convolve_singular_final(const SingularKernel& kernel, const GridFn& f, DensityMode mode) {
    check_conv_inputs(kernel, f);
    const TimeGrid& grid = f.grid;
    const int n = grid.intervals;
    const double e0 = f.singular_start ? f.start_exponent : 0.0;
    const std::vector<Mat> rtab = kernel_table(kernel, grid);
    std::vector<Vec> v = regular_part(f);

    double fold = 0.0;
    if (f.singular_end) {
        fold = f.end_exponent;
        if (kernel.exponent + fold <= 0.0)
            throw IntegrabilityError(
                "convolve_singular_final: end singularity not compensated by the kernel");
        // De-singularize against (T - tau)^{fold}. The final value is
        // reconstructed from the last two interior samples so that a control
        // reloaded from its emitted samples verifies to the same result.
        const double T = grid.horizon;
        for (int j = (f.singular_start ? 1 : 0); j < n; ++j)
            v[static_cast<size_t>(j)] =
                f.at(j) * std::pow(f.grid.node(j), -e0) * std::pow(T - grid.node(j), -fold);
        if (f.singular_start) v[0] *= std::pow(T, -fold);
        v[static_cast<size_t>(n)] =
            2.0 * v[static_cast<size_t>(n - 1)] - v[static_cast<size_t>(n - 2)];
    }
    return conv_row(n, kernel.exponent, e0, rtab, v, grid, mode, fold);
}

}  // namespace fracmem
