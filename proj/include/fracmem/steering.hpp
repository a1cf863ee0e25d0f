#pragma once

#include "fracmem/system.hpp"
#include "fracmem/types.hpp"

#include <string>
#include <vector>

namespace fracmem {

/// Steering task: drive the order-beta memory of the system to the target
/// at the grid horizon.
struct SteeringProblem {
    FracSystem sys;
    double beta;
    Vec target;
    TimeGrid grid;

    SteeringProblem(FracSystem sys_, double beta_, Vec target_, TimeGrid grid_);

    double horizon() const { return grid.horizon; }
    Order order() const { return Order(sys.alpha, beta); }
};

struct GramianOptions {
    int panels = 64;
    int points = 16;
    double grading = 0.0;  // 0 selects max(1, ceil(2/alpha))
};

struct GramianResult {
    Mat Q;                            // symmetrized
    double condition_estimate;        // lambda_max / lambda_min, DBL_MAX when not positive
    double min_eigenvalue_estimate;
};

/// Memory controllability Gramian
///   Q_T = int_0^T (T-t)^{2(1-alpha-beta)} Phi_beta(T-t) B B* Phi_beta*(T-t) dt.
/// The algebraic weight cancels the kernel's algebraic factor exactly, so
/// the integrand reduces to E(A s^alpha) B B* E(A s^alpha)* with s = T-t and
/// composite Gauss-Legendre over panels graded toward s = 0 applies cleanly.
GramianResult gramian(const SteeringProblem& p, const GramianOptions& opts = {});

/// Offset f_T = -b - int_0^T Phi_beta(T-tau) psi(tau) dtau. Constant
/// histories use the closed form f_T = -b + T^beta E_{alpha,beta+1}(A T^alpha) a.
Vec target_offset(const SteeringProblem& p);

struct SteeringResult {
    Control control;
    std::string method;  // "gramian-optimal" | "rank" | "kalman" | "external"
    double energy = 0.0;
    Vec achieved;
    double residual = 0.0;
    double gramian_condition = std::numeric_limits<double>::quiet_NaN();
};

/// Minimum-modified-energy steering law
///   u(t) = -(T-t)^{1-alpha-beta} B* E(A(T-t)^alpha)* Q_T^{-1} f_T,
/// with reported energy <Q_T^{-1} f_T, f_T>. Refuses (SingularGramianError)
/// when the Gramian condition estimate exceeds condition_limit. The residual
/// is recomputed by simulating the memory of the sampled control.
SteeringResult optimal_control(const SteeringProblem& p, const GramianOptions& opts = {},
                               double condition_limit = 1e12);

/// Modified energy int_0^T |(T-t)^{alpha+beta-1} u(t)|^2 dt. Controls with
/// an exact evaluator are integrated by graded Gauss panels; sampled
/// controls by exact moment integration of the algebraic weight against the
/// interpolated |u|^2.
double modified_energy(const Order& ord, double T, const Control& u);

/// Steering law for full-row-rank B (B B^+ = I):
///   u(t) = (1/T) B^+ g(T-t) (b + int Phi_beta(T-tau) psi(tau) dtau),
/// where g is the exact inverse of the memory kernel,
/// g(s) = s^{1-alpha-beta} [E(A s^alpha)]^{-1}. For A = 0 this is the
/// familiar Gamma(alpha+beta)/T * (T-t)^{1-alpha-beta} law.
SteeringResult rank_steering(const SteeringProblem& p);

/// Matrices K_1..K_n (each m x n) with B K_1 + A B K_2 + ... + A^{n-1} B K_n = I,
/// chosen as the minimum-Frobenius-norm solution through the pseudoinverse
/// of the controllability matrix. Throws RankDeficiencyError (reporting the
/// numerical rank) when [B, AB, ..., A^{n-1}B] is rank deficient.
std::vector<Mat> kalman_matrices(const Eigen::Ref<const Mat>& A,
                                 const Eigen::Ref<const Mat>& B);

/// Kalman-matrix steering law
///   u(t) = K_1 mu(t) + K_2 D^alpha mu(t) + ... + K_n D^{alpha,(n-1)} mu(t),
///   mu(t) = g(t) (b + int Phi psi) phi(t),  g(t) = [Phi_beta(T-t)]^{-1},
/// with the polynomial bump phi(t) = (t/T)^p (1-t/T)^p / (T B(p+1, p+1)) of
/// unit integral. bump_order < 0 selects the default p = n + 2; p = 0
/// (constant phi) is accepted only for n = 1. Valid for any beta >= 0.
SteeringResult kalman_steering(const SteeringProblem& p, int bump_order = -1);

struct VerifyReport {
    Vec achieved;
    double residual;
    double energy;
    double energy_reference = std::numeric_limits<double>::quiet_NaN();
    double energy_gap_rel = std::numeric_limits<double>::quiet_NaN();
};

/// Recomputes the achieved memory (by simulation from the sampled control)
/// and the modified energy; when the result came from the Gramian law the
/// inner-product energy reference and its relative gap are included.
VerifyReport verify_steering(const SteeringProblem& p, const SteeringResult& r);

/// Weighted alignment integral int_0^T (T-t)^{2(alpha+beta-1)} <u - v, v> dt
/// evaluated by graded Gauss panels; v must carry an exact evaluator.
/// Vanishes when u and v both steer the memory to the same target and v is
/// the minimum-energy law.
double steering_orthogonality_residual(const SteeringProblem& p, const SteeringResult& u,
                                       const SteeringResult& v);

}  // namespace fracmem
