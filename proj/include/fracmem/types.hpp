#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracmem {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Error taxonomy. The CLI maps these onto its exit codes, so keep the
// hierarchy flat and the messages self-contained.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularGramianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RankDeficiencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pair of fractional orders (alpha, beta) with alpha in (0,1] and beta >= 0.
/// Memory semantics require beta >= 1 - alpha; constructing an Order below
/// that threshold is legal (the Kalman-matrix steering law permits it) but
/// the order is flagged so callers can refuse where the tighter bound holds.
struct Order {
    double alpha;
    double beta;

    Order(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
        if (!(alpha > 0.0) || !(alpha <= 1.0) || !std::isfinite(alpha))
            throw DomainError("Order: alpha must lie in (0, 1], got " + std::to_string(alpha_));
        if (!(beta >= 0.0) || !std::isfinite(beta))
            throw DomainError("Order: beta must be >= 0, got " + std::to_string(beta_));
    }

    /// True when beta >= 1 - alpha, the range where the order-beta memory
    /// of the trajectory is defined.
    bool memory_semantics() const { return beta >= 1.0 - alpha - 1e-12; }

    /// Exponent of the memory kernel's algebraic factor t^{alpha+beta-1}.
    double kernel_exponent() const { return alpha + beta; }
};

/// Uniform grid on [0, T] with N intervals; nodes t_i = i*T/N.
struct TimeGrid {
    double horizon;
    int intervals;

    TimeGrid(double horizon_, int intervals_) : horizon(horizon_), intervals(intervals_) {
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw DomainError("TimeGrid: horizon must be positive");
        if (intervals < 8)
            throw DomainError("TimeGrid: need at least 8 intervals, got " +
                              std::to_string(intervals_));
    }

    double step() const { return horizon / intervals; }
    // i/N form so that node(N) == horizon exactly.
    double node(int i) const { return horizon * (static_cast<double>(i) / intervals); }
    int count() const { return intervals + 1; }
};

inline bool same_grid(const TimeGrid& a, const TimeGrid& b) {
    return a.intervals == b.intervals &&
           std::abs(a.horizon - b.horizon) <= 1e-12 * std::max(a.horizon, b.horizon);
}

/// Vector-valued samples on a TimeGrid. Endpoint samples may be undefined
/// when the function behaves like an algebraic power there: a flagged end
/// stores the exponent e and (optionally) the coefficient c of the local
/// model f(t) ~ c * t^e (at 0) or f(t) ~ c * (T-t)^e (at T). Undefined
/// samples are stored as NaN.
struct GridFn {
    TimeGrid grid;
    int dim = 0;
    std::vector<Vec> values;

    bool singular_start = false;
    double start_exponent = 0.0;
    Vec start_coeff;  // empty when unknown

    bool singular_end = false;
    double end_exponent = 0.0;
    Vec end_coeff;  // empty when unknown

    GridFn(const TimeGrid& g, int dim_)
        : grid(g), dim(dim_), values(static_cast<size_t>(g.count()), Vec::Zero(dim_)) {
        if (dim_ < 1) throw DomainError("GridFn: dim must be positive");
    }

    static GridFn zeros(const TimeGrid& g, int dim) { return GridFn(g, dim); }

    static GridFn sample(const TimeGrid& g, int dim, const std::function<Vec(double)>& fn) {
        GridFn out(g, dim);
        for (int i = 0; i < g.count(); ++i) out.values[static_cast<size_t>(i)] = fn(g.node(i));
        return out;
    }

    static GridFn sample_scalar(const TimeGrid& g, const std::function<double(double)>& fn) {
        GridFn out(g, 1);
        for (int i = 0; i < g.count(); ++i) out.values[static_cast<size_t>(i)](0) = fn(g.node(i));
        return out;
    }

    Vec& at(int i) { return values[static_cast<size_t>(i)]; }
    const Vec& at(int i) const { return values[static_cast<size_t>(i)]; }

    bool defined(int i) const {
        if (i == 0 && singular_start) return false;
        if (i == grid.intervals && singular_end) return false;
        return true;
    }

    void mark_singular_start(double exponent, Vec coeff = Vec()) {
        singular_start = true;
        start_exponent = exponent;
        start_coeff = std::move(coeff);
        values.front().setConstant(std::numeric_limits<double>::quiet_NaN());
    }

    void mark_singular_end(double exponent, Vec coeff = Vec()) {
        singular_end = true;
        end_exponent = exponent;
        end_coeff = std::move(coeff);
        values.back().setConstant(std::numeric_limits<double>::quiet_NaN());
    }

    void check_finite(const char* what) const {
        for (int i = 0; i < grid.count(); ++i) {
            if (!defined(i)) continue;
            if (!at(i).allFinite())
                throw DomainError(std::string(what) + ": non-finite sample at node " +
                                  std::to_string(i));
        }
    }
};

/// Weakly singular convolution kernel K(s) = s^{exponent-1} * smooth_part(s).
/// exponent > 0 keeps the kernel integrable at s = 0; smooth_part must be
/// finite on [0, T] (including 0).
struct SingularKernel {
    double exponent;  // mu
    int rows = 1;
    int cols = 1;
    std::function<Mat(double)> smooth_part;

    SingularKernel(double mu, int rows_, int cols_, std::function<Mat(double)> smooth)
        : exponent(mu), rows(rows_), cols(cols_), smooth_part(std::move(smooth)) {
        // The memory kernel reaches exponent alpha+beta = 2 at (alpha,beta)=(1,1),
        // so only integrability at 0 is enforced here.
        if (!(exponent > 0.0))
            throw DomainError("SingularKernel: exponent must be positive for integrability");
    }
};

}  // namespace fracmem
