#pragma once

#include "padelab/complex.hpp"
#include "padelab/context.hpp"
#include "padelab/errors.hpp"

#include <functional>
#include <vector>

namespace padelab {

/// Dense row-major complex matrix.
struct Matrix {
    size_t rows = 0, cols = 0;
    std::vector<Complex> a;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), a(r * c) {}
    Complex &operator()(size_t i, size_t j) { return a[i * cols + j]; }
    const Complex &operator()(size_t i, size_t j) const { return a[i * cols + j]; }
};

/// Largest row-sum norm (infinity norm).
Real matrix_norm_inf(const Matrix &A);

struct NullspaceResult {
    std::vector<Complex> v;   // kernel vector, largest-modulus entry normalized to 1
    Real residual;            // ||A v|| / (||A|| ||v||)
    size_t kernel_dimension;  // detected kernel dimension
};

/// Kernel vector of A (rows = cols-1, or rank-deficient square), by
/// column-pivoted Gaussian elimination at full precision. Throws
/// DegenerateSystemError when the kernel dimension exceeds one.
NullspaceResult solve_nullspace(const Matrix &A, const PrecisionContext &ctx);

/// Same elimination but returns a basis of the detected kernel (dimension >= 1)
/// without throwing; used where rank-deficient systems are expected data.
std::vector<std::vector<Complex>> nullspace_basis(const Matrix &A, const PrecisionContext &ctx,
                                                  size_t max_dim = 8);

/// solve_nullspace with a reversed column-pivot preference; used by the
/// uniqueness-of-ratio checks.
NullspaceResult solve_nullspace_alt_pivot(const Matrix &A, const PrecisionContext &ctx);

/// Solve the k-by-k real system J x = b in place (partial pivoting).
std::vector<Real> solve_real_system(std::vector<std::vector<Real>> J, std::vector<Real> b);

using RealMap = std::function<std::vector<Real>(const std::vector<Real> &)>;

struct NewtonOptions {
    int max_iterations = 100;
    int max_damping = 40;
};

/// Damped Newton for F(x) = 0, F: R^k -> R^k. Jacobian by central finite
/// differences with step 2^(-bits/3); steps halved while the residual does not
/// decrease. Converges when ||F||_inf < tol.
std::vector<Real> newton_system(const RealMap &F, std::vector<Real> x0, const PrecisionContext &ctx,
                                const NewtonOptions &opt = {});

}  // namespace padelab
