#pragma once

#include "fracmem/types.hpp"

namespace fracmem {

/// How sampled densities are reconstructed between nodes inside the
/// product-integration quadratures.
enum class DensityMode { piecewise_linear, piecewise_constant };

/// Left Riemann-Liouville integral I^alpha_{0+} f on the grid, by
/// product-trapezoidal quadrature: the algebraic kernel (t-tau)^{alpha-1}
/// is integrated exactly against the piecewise-linear interpolant of f.
/// alpha = 0 returns f unchanged. A flagged singular start of f (samples
/// behaving like t^e, e > -1) is handled by exact moment integration of
/// the combined algebraic factor.
GridFn fractional_integral_left(double alpha, const GridFn& f);

/// Right Riemann-Liouville integral I^alpha_{T-} f (kernel (tau-t)^{alpha-1}
/// integrated from t to T). Regular samples only.
GridFn fractional_integral_right(double alpha, const GridFn& f);

/// Left Riemann-Liouville derivative of order alpha in (0, 1] via the
/// Gruenwald-Letnikov scheme h^{-alpha} sum w_k f(t_{i-k}),
/// w_0 = 1, w_k = w_{k-1} (1 - (alpha+1)/k). First-order accurate when
/// f(0) = 0; with f(0) != 0 the node t = 0 is flagged undefined. A flagged
/// singular start with known local model c*t^e is differentiated
/// analytically, with the scheme applied to the remainder.
GridFn rl_derivative(double alpha, const GridFn& f);

/// count-fold application of rl_derivative; count = 0 is the identity.
GridFn rl_derivative_iterated(double alpha, int count, const GridFn& f);

/// (K * f)(t_i) = int_0^{t_i} s^{mu-1} r(s) f(t_i - s) ds for all nodes.
/// The algebraic kernel factor (and a flagged algebraic start of f) is
/// integrated exactly per panel against interpolants of r(t-tau)*v(tau),
/// where v is the regular part of f.
GridFn convolve_singular(const SingularKernel& kernel, const GridFn& f,
                         DensityMode mode = DensityMode::piecewise_linear);

/// Final-node value of the convolution only (O(N) instead of O(N^2)).
/// A flagged singular end of f (density like (T-tau)^e) is folded into the
/// kernel exponent here, which is where it coincides with the kernel's
/// own singular point.
Vec convolve_singular_final(const SingularKernel& kernel, const GridFn& f,
                            DensityMode mode = DensityMode::piecewise_linear);

}  // namespace fracmem
