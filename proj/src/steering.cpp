#include "fracmem/steering.hpp"

#include "fracmem/parallel.hpp"
#include "fracmem/quadrature.hpp"
#include "fracmem/specfun.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace fracmem {

namespace {

constexpr double kHuge = std::numeric_limits<double>::max();

double auto_grading(double alpha, double requested) {
    if (requested > 0.0) return requested;
    return std::max(1.0, std::ceil(2.0 / alpha));
}

void require_memory_semantics(const SteeringProblem& p, const char* who) {
    if (!p.order().memory_semantics())
        throw DomainError(std::string(who) + ": beta < 1 - alpha is only valid for the "
                                             "Kalman-matrix steering law");
}

Vec eval_control(const Control& u, double t) {
    if (u.analytic) return u.analytic(t);
    const TimeGrid& g = u.samples.grid;
    double x = std::clamp(t / g.step(), 0.0, static_cast<double>(g.intervals));
    int j = std::min(static_cast<int>(x), g.intervals - 1);
    if (u.mode == DensityMode::piecewise_constant) return u.samples.at(j);
    double w = x - j;
    return (1.0 - w) * u.samples.at(j) + w * u.samples.at(j + 1);
}

// int over [a,b] of (T-t)^q (t-a)^k dt for k = 0, 1, 2.
struct WeightMoments {
    double i0, i1, i2;
};

WeightMoments weight_moments(double q, double T, double a, double b) {
    double s_hi = T - a, s_lo = T - b;
    auto prim = [&](double p) {
        return (std::pow(s_hi, p + 1.0) - std::pow(s_lo, p + 1.0)) / (p + 1.0);
    };
    double j0 = prim(q), j1 = prim(q + 1.0), j2 = prim(q + 2.0);
    return {j0, s_hi * j0 - j1, s_hi * s_hi * j0 - 2.0 * s_hi * j1 + j2};
}

double sampled_energy(const Order& ord, double T, const Control& u) {
    const TimeGrid& grid = u.samples.grid;
    const int n = grid.intervals;
    const double efold = u.samples.singular_end ? u.samples.end_exponent : 0.0;
    const double q = 2.0 * (ord.kernel_exponent() - 1.0) + 2.0 * efold;

    if (u.mode == DensityMode::piecewise_constant) {
        double acc = 0.0;
        double qc = 2.0 * (ord.kernel_exponent() - 1.0);
        for (int j = 0; j < n; ++j) {
            double a = grid.node(j), b = grid.node(j + 1);
            double dens = u.samples.at(j).squaredNorm();
            if (j == n - 1 && qc <= -1.0 + 1e-12) {
                if (dens > 0.0)
                    throw IntegrabilityError("modified_energy: weight not integrable "
                                             "against a non-vanishing control");
                continue;
            }
            acc += dens * weight_moments(qc, T, a, b).i0;
        }
        return acc;
    }

    // De-singularized nodal values v = u * (T-t)^{-efold}, final node by the
    // same extrapolation the residual simulation uses.
    std::vector<Vec> v(static_cast<size_t>(n) + 1);
    for (int j = 0; j < n; ++j)
        v[static_cast<size_t>(j)] = u.samples.at(j) * std::pow(T - grid.node(j), -efold);
    v[static_cast<size_t>(n)] =
        u.samples.singular_end
            ? Vec(2.0 * v[static_cast<size_t>(n - 1)] - v[static_cast<size_t>(n - 2)])
            : u.samples.at(n);

    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        double a = grid.node(j), b = grid.node(j + 1);
        const Vec& va = v[static_cast<size_t>(j)];
        Vec dv = (v[static_cast<size_t>(j + 1)] - va) / (b - a);
        if (j == n - 1 && q <= -1.0 + 1e-12) {
            if (va.norm() + v[static_cast<size_t>(n)].norm() > 0.0)
                throw IntegrabilityError("modified_energy: weight not integrable "
                                         "against a non-vanishing control");
            continue;
        }
        WeightMoments w = weight_moments(q, T, a, b);
        acc += va.squaredNorm() * w.i0 + 2.0 * va.dot(dv) * w.i1 + dv.squaredNorm() * w.i2;
    }
    return acc;
}

double analytic_energy(const Order& ord, double T, const Control& u) {
    const double we = ord.kernel_exponent() - 1.0;
    const GaussRule& rule = gauss_legendre(16);
    std::vector<double> breaks = graded_breakpoints(T, 64, auto_grading(ord.alpha, 0.0));
    double acc = 0.0;
    for (size_t j = 0; j + 1 < breaks.size(); ++j)
        acc += gauss_panel(
            [&](double s) {
                Vec val = std::pow(s, we) * u.analytic(T - s);
                return val.squaredNorm();
            },
            breaks[j], breaks[j + 1], rule);
    return acc;
}

Mat kernel_inverse_times(const Mat& A, double alpha, double mu, double s, const Vec& c,
                         const char* who) {
    Mat E = mittag_leffler_matrix(alpha, mu, A, s);
    Eigen::FullPivLU<Mat> lu(E);
    if (!lu.isInvertible())
        throw DomainError(std::string(who) + ": memory kernel not invertible (s = " +
                          std::to_string(s) + ")");
    return lu.solve(c);
}

}  // namespace

SteeringProblem::SteeringProblem(FracSystem sys_, double beta_, Vec target_, TimeGrid grid_)
    : sys(std::move(sys_)), beta(beta_), target(std::move(target_)), grid(grid_) {
    if (beta < 0.0 || !std::isfinite(beta)) throw DomainError("SteeringProblem: beta must be >= 0");
    if (target.size() != sys.state_dim())
        throw DomainError("SteeringProblem: target dimension mismatch");
    if (!target.allFinite()) throw DomainError("SteeringProblem: non-finite target");
    if (!sys.history.is_constant() && !same_grid(sys.history.sampled_trace().grid, grid))
        throw DomainError("SteeringProblem: sampled history grid mismatch");
}

GramianResult gramian(const SteeringProblem& p, const GramianOptions& opts) {
    require_memory_semantics(p, "gramian");
    const Mat& A = p.sys.A;
    const Mat& B = p.sys.B;
    const double alpha = p.sys.alpha;
    const double mu = alpha + p.beta;
    const int n = p.sys.state_dim();

    std::vector<double> breaks =
        graded_breakpoints(p.horizon(), opts.panels, auto_grading(alpha, opts.grading));
    const GaussRule& rule = gauss_legendre(opts.points);

    std::vector<Mat> partials(static_cast<size_t>(opts.panels), Mat::Zero(n, n));
    parallel_for(opts.panels, [&](int j) {
        double a = breaks[static_cast<size_t>(j)], b = breaks[static_cast<size_t>(j) + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        Mat acc = Mat::Zero(n, n);
        for (size_t k = 0; k < rule.nodes.size(); ++k) {
            double s = mid + half * rule.nodes[k];
            Mat EB = mittag_leffler_matrix(alpha, mu, A, s) * B;
            acc += rule.weights[k] * (EB * EB.transpose());
        }
        partials[static_cast<size_t>(j)] = half * acc;
    });
    Mat Q = Mat::Zero(n, n);
    for (const Mat& part : partials) Q += part;  // fixed order: bitwise reproducible
    Q = 0.5 * (Q + Q.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Mat> es(Q);
    double lo = es.eigenvalues()(0);
    double hi = es.eigenvalues()(n - 1);
    GramianResult out;
    out.Q = Q;
    out.min_eigenvalue_estimate = lo;
    out.condition_estimate = (lo > 0.0 && hi > 0.0) ? hi / lo : kHuge;
    return out;
}

Vec target_offset(const SteeringProblem& p) {
    const double T = p.horizon();
    if (p.sys.history.is_constant()) {
        const Vec& a = p.sys.history.constant_vector();
        return -p.target +
               std::pow(T, p.beta) *
                   (mittag_leffler_matrix(p.sys.alpha, p.beta + 1.0, p.sys.A, T) * a);
    }
    const double mu = p.sys.alpha + p.beta;
    const Mat A = p.sys.A;
    const double alpha = p.sys.alpha;
    SingularKernel K(mu, p.sys.state_dim(), p.sys.state_dim(),
                     [A, alpha, mu](double s) { return mittag_leffler_matrix(alpha, mu, A, s); });
    GridFn psi = history_grid_fn(p.sys, p.grid);
    return -p.target - convolve_singular_final(K, psi, DensityMode::piecewise_linear);
}

SteeringResult optimal_control(const SteeringProblem& p, const GramianOptions& opts,
                               double condition_limit) {
    require_memory_semantics(p, "optimal_control");
    GramianResult G = gramian(p, opts);
    if (!(G.condition_estimate <= condition_limit))
        throw SingularGramianError("optimal_control: gramian condition estimate " +
                                   std::to_string(G.condition_estimate) + " exceeds limit " +
                                   std::to_string(condition_limit));
    const Vec f = target_offset(p);
    const Vec q = G.Q.ldlt().solve(f);

    const Mat A = p.sys.A;
    const Mat B = p.sys.B;
    const double alpha = p.sys.alpha;
    const double mu = alpha + p.beta;
    const double pe = 1.0 - mu;  // control exponent in (T - t)
    const double T = p.horizon();
    const int nn = p.grid.count();

    GridFn samples(p.grid, p.sys.input_dim());
    parallel_for(nn - 1, [&](int i) {
        double s = T - p.grid.node(i);
        samples.at(i) =
            -std::pow(s, pe) * (B.transpose() * (mittag_leffler_matrix(alpha, mu, A, s).transpose() * q));
    });
    Vec end_coeff = -reciprocal_gamma(mu) * (B.transpose() * q);
    if (pe > 1e-12)
        samples.at(nn - 1).setZero();
    else if (pe >= -1e-12)
        samples.at(nn - 1) = end_coeff;
    else
        samples.mark_singular_end(pe, end_coeff);

    Control u(std::move(samples), DensityMode::piecewise_linear);
    u.analytic = [A, B, q, T, alpha, mu, pe](double t) -> Vec {
        double s = T - t;
        return -std::pow(s, pe) *
               (B.transpose() * (mittag_leffler_matrix(alpha, mu, A, s).transpose() * q));
    };

    SteeringResult r{std::move(u), "gramian-optimal"};
    r.energy = std::max(0.0, q.dot(f));
    r.achieved = memory_final(p.sys, p.beta, r.control, p.grid);
    r.residual = (r.achieved - p.target).lpNorm<Eigen::Infinity>();
    r.gramian_condition = G.condition_estimate;
    return r;
}

double modified_energy(const Order& ord, double T, const Control& u) {
    if (std::abs(u.samples.grid.horizon - T) > 1e-12 * T)
        throw DomainError("modified_energy: horizon does not match the control grid");
    if (u.analytic) return analytic_energy(ord, T, u);
    return sampled_energy(ord, T, u);
}

SteeringResult rank_steering(const SteeringProblem& p) {
    require_memory_semantics(p, "rank_steering");
    const Mat& A = p.sys.A;
    const Mat& B = p.sys.B;
    const int n = p.sys.state_dim();

    Eigen::ColPivHouseholderQR<Mat> qr(B);
    if (qr.rank() < n)
        throw RankDeficiencyError("rank_steering: rank B = " + std::to_string(qr.rank()) +
                                  " < n = " + std::to_string(n));
    Mat W = B * B.transpose();
    Mat Bplus = W.ldlt().solve(B).transpose();  // B^T (B B^T)^{-1}

    const Vec c = -target_offset(p);  // b + int Phi psi
    const double alpha = p.sys.alpha;
    const double mu = alpha + p.beta;
    const double pe = 1.0 - mu;
    const double T = p.horizon();
    const int nn = p.grid.count();

    GridFn samples(p.grid, p.sys.input_dim());
    for (int i = 0; i < nn - 1; ++i) {
        double s = T - p.grid.node(i);
        Vec x = kernel_inverse_times(A, alpha, mu, s, c, "rank_steering");
        samples.at(i) = (std::pow(s, pe) / T) * (Bplus * x);
    }
    Vec end_coeff = (gamma_fn(mu) / T) * (Bplus * c);
    if (pe > 1e-12)
        samples.at(nn - 1).setZero();
    else if (pe >= -1e-12)
        samples.at(nn - 1) = end_coeff;
    else
        samples.mark_singular_end(pe, end_coeff);

    Control u(std::move(samples), DensityMode::piecewise_linear);
    u.analytic = [A, Bplus, c, T, alpha, mu, pe](double t) -> Vec {
        double s = T - t;
        Vec x = kernel_inverse_times(A, alpha, mu, s, c, "rank_steering");
        return (std::pow(s, pe) / T) * (Bplus * x);
    };

    SteeringResult r{std::move(u), "rank"};
    r.achieved = memory_final(p.sys, p.beta, r.control, p.grid);
    r.residual = (r.achieved - p.target).lpNorm<Eigen::Infinity>();
    r.energy = modified_energy(p.order(), T, r.control);
    return r;
}

std::vector<Mat> kalman_matrices(const Eigen::Ref<const Mat>& A,
                                 const Eigen::Ref<const Mat>& B) {
    if (A.rows() != A.cols() || B.rows() != A.rows())
        throw DomainError("kalman_matrices: dimension mismatch");
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    Mat C(n, n * m);
    C.leftCols(m) = B;
    for (int j = 1; j < n; ++j)
        C.middleCols(j * m, m) = A * C.middleCols((j - 1) * m, m);

    Eigen::ColPivHouseholderQR<Mat> qr(C);
    if (qr.rank() < n)
        throw RankDeficiencyError("kalman_matrices: controllability matrix rank " +
                                  std::to_string(qr.rank()) + " < n = " + std::to_string(n));
    Mat K = C.completeOrthogonalDecomposition().pseudoInverse();  // minimum-norm solution
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) blocks.push_back(K.middleRows(j * m, m));
    return blocks;
}

SteeringResult kalman_steering(const SteeringProblem& p, int bump_order) {
    const int n = p.sys.state_dim();
    std::vector<Mat> K = kalman_matrices(p.sys.A, p.sys.B);

    const int bp = bump_order < 0 ? n + 2 : bump_order;
    if (bp == 0 && n > 1)
        throw DomainError("kalman_steering: bump order 0 is only valid for n = 1");
    const double alpha = p.sys.alpha;
    const double mu = alpha + p.beta;
    if (bp == 0 && mu > 1.0 + 1e-12)
        throw DomainError("kalman_steering: bump order 0 needs alpha + beta <= 1");
    if (bp > 60) throw DomainError("kalman_steering: bump order too large");

    const double T = p.horizon();
    const Vec c = -target_offset(p);
    const double norm = 1.0 / (T * gamma_fn(bp + 1.0) * gamma_fn(bp + 1.0) * reciprocal_gamma(2.0 * bp + 2.0));

    GridFn muf(p.grid, n);
    for (int i = 0; i < p.grid.count(); ++i) {
        double t = p.grid.node(i);
        double x = t / T;
        double phi = norm * std::pow(x, bp) * std::pow(1.0 - x, bp);
        if (phi == 0.0) {
            muf.at(i).setZero();
            continue;
        }
        double s = T - t;
        Vec ginv = (s == 0.0) ? Vec(gamma_fn(mu) * c)
                              : Vec(kernel_inverse_times(p.sys.A, alpha, mu, s, c, "kalman_steering"));
        muf.at(i) = phi * std::pow(s, 1.0 - mu) * ginv;
    }

    GridFn usamples(p.grid, p.sys.input_dim());
    GridFn chain = muf;
    for (int j = 0; j < n; ++j) {
        if (j > 0) chain = rl_derivative(alpha, chain);
        if (chain.singular_start)
            throw ConvergenceError("kalman_steering: derivative chain became singular at t = 0");
        for (int i = 0; i < p.grid.count(); ++i)
            usamples.at(i) += K[static_cast<size_t>(j)] * chain.at(i);
    }

    SteeringResult r{Control(std::move(usamples), DensityMode::piecewise_linear), "kalman"};
    MemoryOptions mo;
    mo.allow_low_beta = true;
    r.achieved = memory_final(p.sys, p.beta, r.control, p.grid, mo);
    r.residual = (r.achieved - p.target).lpNorm<Eigen::Infinity>();
    r.energy = modified_energy(p.order(), T, r.control);
    return r;
}

VerifyReport verify_steering(const SteeringProblem& p, const SteeringResult& r) {
    MemoryOptions mo;
    mo.allow_low_beta = true;
    VerifyReport rep;
    rep.achieved = memory_final(p.sys, p.beta, r.control, p.grid, mo);
    rep.residual = (rep.achieved - p.target).lpNorm<Eigen::Infinity>();
    rep.energy = modified_energy(p.order(), p.horizon(), r.control);
    if (r.method == "gramian-optimal") {
        GramianResult G = gramian(p);
        Vec f = target_offset(p);
        double ref = std::max(0.0, f.dot(G.Q.ldlt().solve(f)));
        rep.energy_reference = ref;
        rep.energy_gap_rel = std::abs(rep.energy - ref) / std::max(ref, 1e-300);
    }
    return rep;
}

double steering_orthogonality_residual(const SteeringProblem& p, const SteeringResult& u,
                                       const SteeringResult& v) {
    if (!v.control.analytic)
        throw DomainError("steering_orthogonality_residual: reference control must carry "
                          "an exact evaluator");
    if (!u.control.analytic && u.control.samples.singular_end)
        throw DomainError("steering_orthogonality_residual: sampled control with a singular "
                          "end is not interpolable");
    const Order ord = p.order();
    const double T = p.horizon();
    const double we = ord.kernel_exponent() - 1.0;
    const GaussRule& rule = gauss_legendre(16);
    std::vector<double> breaks = graded_breakpoints(T, 64, auto_grading(ord.alpha, 0.0));
    double acc = 0.0;
    for (size_t j = 0; j + 1 < breaks.size(); ++j)
        acc += gauss_panel(
            [&](double s) {
                double t = T - s;
                double w = std::pow(s, we);
                Vec vv = w * v.control.analytic(t);
                Vec uu = w * eval_control(u.control, t);
                return (uu - vv).dot(vv);
            },
            breaks[j], breaks[j + 1], rule);
    return acc;
}

}  // namespace fracmem
