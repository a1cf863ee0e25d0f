#pragma once

#include "fracmem/types.hpp"

namespace fracmem {

/// Gamma function for x > 0, relative error <= 1e-13 on (0, 170].
/// Throws DomainError for x <= 0 and OverflowError past ~171.62.
double gamma_fn(double x);

/// log(Gamma(x)) for x > 0.
double log_gamma(double x);

/// 1/Gamma(x) for any real x; exactly 0 at the poles x = 0, -1, -2, ...
double reciprocal_gamma(double x);

/// Two-parameter Mittag-Leffler function: sum_{k>=0} z^k / Gamma(k*alpha + beta).
/// Direct series with compensated summation; the sum is truncated once the
/// next term falls below 1e-14 * (1 + |partial sum|) and terms are
/// decreasing. Throws ConvergenceError when 10000 terms do not reach the
/// stopping rule, or when cancellation has destroyed the result (possible
/// for strongly negative z at small alpha).
double mittag_leffler(double alpha, double beta, double z);

/// Matrix extension: sum_{k>=0} A^k t^{k*alpha} / Gamma(k*alpha + beta).
/// Truncation by a geometric tail bound in the Frobenius norm; nilpotent A
/// terminates the series exactly.
Mat mittag_leffler_matrix(double alpha, double beta, const Eigen::Ref<const Mat>& A, double t);

/// Alpha-exponential matrix t^{alpha-1} * E_{alpha,alpha}(A t^alpha), t > 0.
Mat alpha_exponential(double alpha, const Eigen::Ref<const Mat>& A, double t);

/// Memory kernel Phi_beta(t) = t^{alpha+beta-1} * E_{alpha,alpha+beta}(A t^alpha).
/// At t = 0 the value is 0 for alpha+beta > 1 and I for alpha+beta = 1;
/// alpha+beta < 1 is singular there (DomainError).
Mat memory_kernel(const Order& ord, const Eigen::Ref<const Mat>& A, double t);

}  // namespace fracmem
