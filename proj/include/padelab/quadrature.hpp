#pragma once

#include "padelab/complex.hpp"
#include "padelab/context.hpp"
#include "padelab/errors.hpp"

#include <functional>
#include <vector>

namespace padelab {

using Integrand = std::function<Complex(const Complex &)>;

/// (1/2pi i) times the contour integral of f over the circle |s-center|=radius,
/// counterclockwise. N-node trapezoid, N doubled from 64 until two successive
/// estimates differ by less than tol (absolute, scaled by max(1,|I|)); spectral
/// accuracy for f analytic in an annulus around the circle.
Complex quad_trapezoid_periodic(const Integrand &f, const Complex &center, const Real &radius,
                                const PrecisionContext &ctx);
Complex quad_trapezoid_periodic(const Integrand &f, const Complex &center, const Real &radius,
                                const PrecisionContext &ctx, const Real &tol);

/// Integral of g(s) ds / sqrt((s-p)(q-s)) over the segment [p,q], by the
/// substitution s = (p+q)/2 + ((q-p)/2) cos(theta) and periodic trapezoid in
/// theta (node doubling to tol). The square root is the branch positive on the
/// open segment when p < q are real.
Complex quad_cheb_segment(const Integrand &g, const Complex &p, const Complex &q,
                          const PrecisionContext &ctx);
Complex quad_cheb_segment(const Integrand &g, const Complex &p, const Complex &q,
                          const PrecisionContext &ctx, const Real &tol);

/// Integral of f(s) ds along the straight segment [p,q] by tanh-sinh (double
/// exponential) quadrature with level doubling; tolerates integrable endpoint
/// singularities (inverse square roots, logs).
Complex quad_tanh_sinh(const Integrand &f, const Complex &p, const Complex &q,
                       const PrecisionContext &ctx, const Real &tol, int max_level = 12);
Complex quad_tanh_sinh(const Integrand &f, const Complex &p, const Complex &q,
                       const PrecisionContext &ctx);

/// Tanh-sinh that returns the deepest estimate when level doubling stalls
/// above tol (integrands analytic up to a near-endpoint singularity stall at
/// accuracy far below any sampling tolerance in use).
Complex quad_tanh_sinh_soft(const Integrand &f, const Complex &p, const Complex &q,
                            const PrecisionContext &ctx, const Real &tol, int max_level = 12);

/// Fixed-level tanh-sinh sum without a convergence demand; for merely
/// continuous integrands (normalization scales and similar).
Complex quad_tanh_sinh_fixed(const Integrand &f, const Complex &p, const Complex &q,
                             const PrecisionContext &ctx, int level = 7);

/// Fixed tanh-sinh rule on [-1,1]: abscissas in (-1,1) and weights, step 2^-level.
struct TanhSinhRule {
    std::vector<Real> x;  // abscissas, symmetric, x[0] = 0
    std::vector<Real> w;  // weights (for |x|, used on both sides)
    static const TanhSinhRule &get(int level, long bits);
};

/// Gauss-Legendre nodes/weights on [-1,1] at working precision, cached per order.
struct GaussLegendreRule {
    std::vector<Real> x;
    std::vector<Real> w;
    static const GaussLegendreRule &get(int order, long bits);
};

}  // namespace padelab
