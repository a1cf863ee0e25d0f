#pragma once

#include "fracmem/fraccalc.hpp"
#include "fracmem/types.hpp"

#include <optional>
#include <variant>

namespace fracmem {

/// Forward trace of the system's pre-history. A constant pre-history a
/// induces the trace -a t^{-alpha}/Gamma(1-alpha) on (0, T]; a sampled
/// history supplies the trace directly (a flagged singular start with a
/// known exponent is allowed).
struct History {
    struct Constant {
        Vec a;
    };
    struct Sampled {
        GridFn trace;
    };
    std::variant<Constant, Sampled> value;

    static History constant(Vec a) { return History{Constant{std::move(a)}}; }
    static History sampled(GridFn trace) { return History{Sampled{std::move(trace)}}; }

    bool is_constant() const { return std::holds_alternative<Constant>(value); }
    const Vec& constant_vector() const { return std::get<Constant>(value).a; }
    const GridFn& sampled_trace() const { return std::get<Sampled>(value).trace; }
};

/// Fractional linear time-invariant system D^alpha x = A x + B u with
/// initialization trace psi. Immutable after construction.
struct FracSystem {
    Mat A;
    Mat B;
    double alpha;
    History history;

    FracSystem(Mat A_, Mat B_, double alpha_, History history_);

    int state_dim() const { return static_cast<int>(A.rows()); }
    int input_dim() const { return static_cast<int>(B.cols()); }
};

/// Sampled control with a reconstruction mode. Steering laws additionally
/// attach an exact evaluator (used by the high-accuracy energy and
/// orthogonality quadratures); the sampled representation remains the one
/// all residual simulations consume.
struct Control {
    GridFn samples;
    DensityMode mode = DensityMode::piecewise_constant;
    std::function<Vec(double)> analytic;  // optional, defined on [0, T)

    Control(GridFn s, DensityMode m) : samples(std::move(s)), mode(m) {}

    static Control zero(const TimeGrid& grid, int dim) {
        return Control(GridFn::zeros(grid, dim), DensityMode::piecewise_constant);
    }
};

/// psi(t). Constant histories are singular at t = 0 (DomainError when a != 0);
/// for alpha = 1 the pointwise trace vanishes identically.
Vec initialization_trace(const FracSystem& sys, double t);

/// History trace as a GridFn with singular-start metadata, suitable for the
/// direct convolution path.
GridFn history_grid_fn(const FracSystem& sys, const TimeGrid& grid);

struct MemoryOptions {
    bool allow_low_beta = false;          // permit beta < 1 - alpha
    bool force_history_convolution = false;  // skip the constant-history closed form
};

/// Forward trajectory gamma(t, psi, u) at the grid nodes. Constant history
/// uses the closed form E_alpha(A t^alpha) a + int s(t-tau) B u dtau.
GridFn trajectory(const FracSystem& sys, const Control& u, const TimeGrid& grid);

/// Order-beta memory of the trajectory at the grid nodes,
/// M_beta(t) = int_0^t Phi_beta(t-tau) (B u(tau) - psi(tau)) dtau.
/// Constant history uses the closed form t^beta E_{alpha,beta+1}(A t^alpha) a
/// for the history contribution. The value at t = 0 is the limit: 0 for
/// beta > 0 and a for beta = 0 (which requires alpha = 1).
GridFn memory(const FracSystem& sys, double beta, const Control& u, const TimeGrid& grid,
              const MemoryOptions& opts = {});

/// M_beta at the final node only.
Vec memory_final(const FracSystem& sys, double beta, const Control& u, const TimeGrid& grid,
                 const MemoryOptions& opts = {});

}  // namespace fracmem
