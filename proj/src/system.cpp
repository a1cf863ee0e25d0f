#include "fracmem/system.hpp"

#include "fracmem/specfun.hpp"

#include <cmath>
#include <limits>

namespace fracmem {

namespace {

// Kernel of the trajectory integral: s^{alpha-1} E_{alpha,alpha}(A s^alpha).
SingularKernel state_kernel(const FracSystem& sys) {
    const Mat A = sys.A;
    const double alpha = sys.alpha;
    int n = sys.state_dim();
    return SingularKernel(alpha, n, n,
                          [A, alpha](double s) { return mittag_leffler_matrix(alpha, alpha, A, s); });
}

SingularKernel memory_kernel_of(const FracSystem& sys, double beta) {
    const Mat A = sys.A;
    const double alpha = sys.alpha;
    const double mu = alpha + beta;
    int n = sys.state_dim();
    return SingularKernel(mu, n, n,
                          [A, alpha, mu](double s) { return mittag_leffler_matrix(alpha, mu, A, s); });
}

GridFn control_density(const FracSystem& sys, const Control& u, const TimeGrid& grid) {
    if (!same_grid(u.samples.grid, grid))
        throw DomainError("control grid does not match the problem grid");
    if (u.samples.dim != sys.input_dim())
        throw DomainError("control dimension does not match the system input");
    GridFn d(grid, sys.state_dim());
    for (int i = 0; i < grid.count(); ++i)
        d.at(i) = u.samples.defined(i) ? Vec(sys.B * u.samples.at(i))
                                       : Vec::Constant(sys.state_dim(),
                                                       std::numeric_limits<double>::quiet_NaN());
    if (u.samples.singular_start)
        d.mark_singular_start(u.samples.start_exponent,
                              u.samples.start_coeff.size() ? Vec(sys.B * u.samples.start_coeff)
                                                           : Vec());
    if (u.samples.singular_end)
        d.mark_singular_end(u.samples.end_exponent,
                            u.samples.end_coeff.size() ? Vec(sys.B * u.samples.end_coeff)
                                                       : Vec());
    return d;
}

void check_beta(const FracSystem& sys, double beta, const MemoryOptions& opts) {
    if (beta < 0.0) throw DomainError("memory: beta must be >= 0");
    if (!opts.allow_low_beta && beta < 1.0 - sys.alpha - 1e-12)
        throw DomainError("memory: beta < 1 - alpha requires the explicit low-beta override");
}

}  // namespace

FracSystem::FracSystem(Mat A_, Mat B_, double alpha_, History history_)
    : A(std::move(A_)), B(std::move(B_)), alpha(alpha_), history(std::move(history_)) {
    if (A.rows() != A.cols()) throw DomainError("FracSystem: A must be square");
    if (B.rows() != A.rows()) throw DomainError("FracSystem: B row count must match A");
    if (B.cols() < 1) throw DomainError("FracSystem: B needs at least one column");
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw DomainError("FracSystem: alpha must lie in (0, 1]");
    if (!A.allFinite() || !B.allFinite()) throw DomainError("FracSystem: non-finite matrix entry");
    if (history.is_constant()) {
        if (history.constant_vector().size() != A.rows())
            throw DomainError("FracSystem: history vector dimension mismatch");
    } else {
        if (history.sampled_trace().dim != A.rows())
            throw DomainError("FracSystem: history trace dimension mismatch");
    }
}

Vec initialization_trace(const FracSystem& sys, double t) {
    if (sys.history.is_constant()) {
        const Vec& a = sys.history.constant_vector();
        double rg = reciprocal_gamma(1.0 - sys.alpha);  // 0 at alpha = 1
        if (t <= 0.0) {
            if (a.norm() * rg == 0.0) return Vec::Zero(a.size());
            throw DomainError("initialization_trace: singular at t = 0");
        }
        return -std::pow(t, -sys.alpha) * rg * a;
    }
    const GridFn& trace = sys.history.sampled_trace();
    double h = trace.grid.step();
    int i = static_cast<int>(std::lround(t / h));
    if (i < 0 || i >= trace.grid.count() || std::abs(trace.grid.node(i) - t) > 1e-9 * trace.grid.horizon)
        throw DomainError("initialization_trace: t is not a grid node");
    if (!trace.defined(i))
        throw DomainError("initialization_trace: sample undefined at requested node");
    return trace.at(i);
}

GridFn history_grid_fn(const FracSystem& sys, const TimeGrid& grid) {
    if (sys.history.is_constant()) {
        const Vec& a = sys.history.constant_vector();
        double rg = reciprocal_gamma(1.0 - sys.alpha);
        GridFn psi(grid, sys.state_dim());
        for (int i = 1; i < grid.count(); ++i)
            psi.at(i) = -std::pow(grid.node(i), -sys.alpha) * rg * a;
        if (sys.alpha < 1.0 && a.norm() * rg != 0.0)
            psi.mark_singular_start(-sys.alpha, -rg * a);
        return psi;
    }
    const GridFn& trace = sys.history.sampled_trace();
    if (!same_grid(trace.grid, grid))
        throw DomainError("history_grid_fn: sampled trace lives on a different grid");
    return trace;
}

GridFn trajectory(const FracSystem& sys, const Control& u, const TimeGrid& grid) {
    GridFn bu = control_density(sys, u, grid);
    SingularKernel S = state_kernel(sys);
    GridFn out = convolve_singular(S, bu, u.mode);

    if (sys.history.is_constant()) {
        const Vec& a = sys.history.constant_vector();
        for (int i = 0; i < grid.count(); ++i)
            out.at(i) += mittag_leffler_matrix(sys.alpha, 1.0, sys.A, grid.node(i)) * a;
    } else {
        GridFn psi = history_grid_fn(sys, grid);
        GridFn hist = convolve_singular(S, psi, DensityMode::piecewise_linear);
        for (int i = 0; i < grid.count(); ++i)
            if (out.defined(i) && hist.defined(i)) out.at(i) -= hist.at(i);
    }
    return out;
}

GridFn memory(const FracSystem& sys, double beta, const Control& u, const TimeGrid& grid,
              const MemoryOptions& opts) {
    check_beta(sys, beta, opts);
    GridFn bu = control_density(sys, u, grid);
    SingularKernel K = memory_kernel_of(sys, beta);
    GridFn out = convolve_singular(K, bu, u.mode);

    if (sys.history.is_constant() && !opts.force_history_convolution) {
        // Closed form of -int Phi_beta(t-tau) psi(tau) dtau for the constant
        // trace: t^beta E_{alpha,beta+1}(A t^alpha) a. At t = 0 this is the
        // limit of the memory: 0 for beta > 0 and a for beta = 0.
        const Vec& a = sys.history.constant_vector();
        for (int i = 0; i < grid.count(); ++i) {
            double t = grid.node(i);
            double tb = (t == 0.0 && beta == 0.0) ? 1.0 : std::pow(t, beta);
            out.at(i) += tb * (mittag_leffler_matrix(sys.alpha, beta + 1.0, sys.A, t) * a);
        }
    } else {
        GridFn psi = history_grid_fn(sys, grid);
        GridFn hist = convolve_singular(K, psi, DensityMode::piecewise_linear);
        for (int i = 0; i < grid.count(); ++i)
            if (out.defined(i) && hist.defined(i)) out.at(i) -= hist.at(i);
    }
    return out;
}

Vec memory_final(const FracSystem& sys, double beta, const Control& u, const TimeGrid& grid,
                 const MemoryOptions& opts) {
    check_beta(sys, beta, opts);
    GridFn bu = control_density(sys, u, grid);
    SingularKernel K = memory_kernel_of(sys, beta);
    Vec out = convolve_singular_final(K, bu, u.mode);

    if (sys.history.is_constant() && !opts.force_history_convolution) {
        const Vec& a = sys.history.constant_vector();
        double T = grid.horizon;
        out += std::pow(T, beta) * (mittag_leffler_matrix(sys.alpha, beta + 1.0, sys.A, T) * a);
    } else {
        GridFn psi = history_grid_fn(sys, grid);
        out -= convolve_singular_final(K, psi, DensityMode::piecewise_linear);
    }
    return out;
}

}  // namespace fracmem
