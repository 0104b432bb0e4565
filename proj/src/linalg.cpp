#include "padelab/linalg.hpp"

#include <algorithm>

namespace padelab {

Real matrix_norm_inf(const Matrix &A) {
    Real best(0L);
    for (size_t i = 0; i < A.rows; ++i) {
        Real s(0L);
        for (size_t j = 0; j < A.cols; ++j) s += abs(A(i, j));
        best = max(best, s);
    }
    return best;
}

namespace {

struct Elimination {
    Matrix U;                     // reduced matrix
    std::vector<size_t> pivot_col;  // pivot column per pivot row
    std::vector<bool> is_pivot;     // per column
    size_t rank = 0;
};

// Gaussian elimination with full pivoting (or reversed column preference),
// row-equilibrated first. Rank cut at eps * scale.
Elimination eliminate(Matrix A, const PrecisionContext &ctx, bool reverse_cols) {
    const size_t m = A.rows, n = A.cols;
    for (size_t i = 0; i < m; ++i) {
        Real s(0L);
        for (size_t j = 0; j < n; ++j) s = max(s, abs(A(i, j)));
        if (s.is_zero()) continue;
        Real inv = 1.0 / s;
        for (size_t j = 0; j < n; ++j) A(i, j) *= inv;
    }

    Elimination E;
    E.is_pivot.assign(n, false);
    Real cutoff = ctx.tol;  // entries are equilibrated to O(1)

    size_t row = 0;
    while (row < m) {
        // Largest remaining entry; ties resolved by column scan order.
        Real best(-1.0);
        size_t bi = row, bj = n;
        for (size_t i = row; i < m; ++i) {
            for (size_t jj = 0; jj < n; ++jj) {
                size_t j = reverse_cols ? n - 1 - jj : jj;
                if (E.is_pivot[j]) continue;
                Real v = abs(A(i, j));
                if (v > best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bj == n || best <= cutoff) break;
        if (bi != row)
            for (size_t j = 0; j < n; ++j) std::swap(A(row, j), A(bi, j));
        E.is_pivot[bj] = true;
        E.pivot_col.push_back(bj);
        Complex inv = Complex(1L) / A(row, bj);
        for (size_t i = row + 1; i < m; ++i) {
            if (A(i, bj).is_zero()) continue;
            Complex factor = A(i, bj) * inv;
            for (size_t j = 0; j < n; ++j)
                if (!E.is_pivot[j] || j == bj) A(i, j) -= factor * A(row, j);
            A(i, bj) = Complex(0L);
        }
        ++row;
    }
    E.rank = E.pivot_col.size();
    E.U = std::move(A);
    return E;
}

std::vector<Complex> back_substitute(const Elimination &E, size_t free_col) {
    const size_t n = E.U.cols;
    std::vector<Complex> v(n);
    v[free_col] = Complex(1L);
    for (size_t r = E.rank; r-- > 0;) {
        size_t pc = E.pivot_col[r];
        Complex s(0L);
        for (size_t j = 0; j < n; ++j) {
            if (j == pc) continue;
            if (!v[j].is_zero()) s += E.U(r, j) * v[j];
        }
        v[pc] = -s / E.U(r, pc);
    }
    return v;
}

void normalize_largest(std::vector<Complex> &v) {
    size_t best = 0;
    Real bm(-1.0);
    for (size_t k = 0; k < v.size(); ++k) {
        Real m = abs(v[k]);
        if (m > bm) {
            bm = m;
            best = k;
        }
    }
    Complex inv = Complex(1L) / v[best];
    for (Complex &c : v) c *= inv;
    v[best] = Complex(1L);
}

Real kernel_residual(const Matrix &A, const std::vector<Complex> &v) {
    Real vmax(0L);
    for (const Complex &c : v) vmax = max(vmax, abs(c));
    Real anorm = matrix_norm_inf(A);
    if (anorm.is_zero() || vmax.is_zero()) return Real(0L);
    Real worst(0L);
    for (size_t i = 0; i < A.rows; ++i) {
        Complex s(0L);
        for (size_t j = 0; j < A.cols; ++j) s += A(i, j) * v[j];
        worst = max(worst, abs(s));
    }
    return worst / (anorm * vmax);
}

NullspaceResult solve_impl(const Matrix &A, const PrecisionContext &ctx, bool reverse_cols) {
    if (A.cols == 0) throw DomainError("solve_nullspace: empty matrix");
    Elimination E = eliminate(A, ctx, reverse_cols);
    size_t kdim = A.cols - E.rank;
    if (kdim == 0)
        throw DegenerateSystemError("solve_nullspace: no kernel detected (full column rank)");
    if (kdim > 1)
        throw DegenerateSystemError("solve_nullspace: kernel dimension " + std::to_string(kdim) +
                                    " > 1 (multiple solutions)");
    size_t free_col = 0;
    for (size_t j = 0; j < A.cols; ++j)
        if (!E.is_pivot[j]) free_col = j;
    NullspaceResult out;
    out.v = back_substitute(E, free_col);
    normalize_largest(out.v);
    out.kernel_dimension = 1;
    out.residual = kernel_residual(A, out.v);
    if (out.residual >= ctx.tol)
        throw DegenerateSystemError("solve_nullspace: residual " + out.residual.str(6) +
                                    " exceeds tolerance");
    return out;
}

}  // namespace

NullspaceResult solve_nullspace(const Matrix &A, const PrecisionContext &ctx) {
    return solve_impl(A, ctx, false);
}

NullspaceResult solve_nullspace_alt_pivot(const Matrix &A, const PrecisionContext &ctx) {
    return solve_impl(A, ctx, true);
}

std::vector<std::vector<Complex>> nullspace_basis(const Matrix &A, const PrecisionContext &ctx,
                                                  size_t max_dim) {
    Elimination E = eliminate(A, ctx, false);
    std::vector<std::vector<Complex>> basis;
    for (size_t j = 0; j < A.cols && basis.size() < max_dim; ++j) {
        if (E.is_pivot[j]) continue;
        std::vector<Complex> v = back_substitute(E, j);
        normalize_largest(v);
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<Real> solve_real_system(std::vector<std::vector<Real>> J, std::vector<Real> b) {
    const size_t k = b.size();
    for (size_t col = 0; col < k; ++col) {
        size_t piv = col;
        Real best = abs(J[col][col]);
        for (size_t i = col + 1; i < k; ++i) {
            Real v = abs(J[i][col]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best.is_zero()) throw SingularJacobianError("solve_real_system: zero pivot");
        if (piv != col) {
            std::swap(J[piv], J[col]);
            std::swap(b[piv], b[col]);
        }
        for (size_t i = col + 1; i < k; ++i) {
            Real f = J[i][col] / J[col][col];
            if (f.is_zero()) continue;
            for (size_t j = col; j < k; ++j) J[i][j] -= f * J[col][j];
            b[i] -= f * b[col];
        }
    }
    std::vector<Real> x(k, Real(0L));
    for (size_t i = k; i-- > 0;) {
        Real s = b[i];
        for (size_t j = i + 1; j < k; ++j) s -= J[i][j] * x[j];
        x[i] = s / J[i][i];
    }
    return x;
}

std::vector<Real> newton_system(const RealMap &F, std::vector<Real> x0, const PrecisionContext &ctx,
                                const NewtonOptions &opt) {
    const size_t k = x0.size();
    Real step = ctx.fd_step();

    auto norm_inf = [](const std::vector<Real> &v) {
        Real m(0L);
        for (const Real &x : v) m = max(m, abs(x));
        return m;
    };

    std::vector<Real> fx = F(x0);
    if (fx.size() != k) throw DomainError("newton_system: F must map R^k to R^k");
    Real res = norm_inf(fx);

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        if (res < ctx.tol) return x0;
        // Central-difference Jacobian.
        std::vector<std::vector<Real>> J(k, std::vector<Real>(k, Real(0L)));
        for (size_t j = 0; j < k; ++j) {
            Real h = step * max(Real(1L), abs(x0[j]));
            std::vector<Real> xp = x0, xm = x0;
            xp[j] += h;
            xm[j] -= h;
            std::vector<Real> fp = F(xp), fm = F(xm);
            for (size_t i = 0; i < k; ++i) J[i][j] = (fp[i] - fm[i]) / (h * 2.0);
        }
        std::vector<Real> dx = solve_real_system(J, fx);
        // Damp by halving while the residual fails to decrease.
        Real lambda(1L);
        bool moved = false;
        for (int d = 0; d < opt.max_damping; ++d) {
            std::vector<Real> trial = x0;
            for (size_t j = 0; j < k; ++j) trial[j] -= lambda * dx[j];
            std::vector<Real> ft = F(trial);
            Real rt = norm_inf(ft);
            if (rt < res) {
                x0 = std::move(trial);
                fx = std::move(ft);
                res = rt;
                moved = true;
                break;
            }
            lambda /= 2L;
        }
        if (!moved)
            throw ConvergenceError("newton_system: damping stalled, residual " + res.str(6));
    }
    if (res < ctx.tol) return x0;
    throw ConvergenceError("newton_system: max iterations, residual " + res.str(6));
}

}  // namespace padelab
