#include "padelab/pade.hpp"

#include "padelab/linalg.hpp"

#include "json.hpp"

namespace padelab {

namespace {

// System rows: coefficients of z^0..z^{n1-1} of Q f0 - P, then coefficients of
// z^n..z^{n-n2+1} of Q finf - P. Unknowns [q_0..q_n, p_0..p_n].
Matrix assemble_system(const PowerSeriesPair &pair, long n, long n1, long n2) {
    const long rows = n1 + n2;
    const long cols = 2 * (n + 1);
    Matrix A(rows, cols);
    for (long i = 0; i < n1; ++i) {
        for (long j = 0; j <= n; ++j) A(i, j) = pair.c0(i - j);
        if (i <= n) A(i, n + 1 + i) = Complex(-1.0);
    }
    for (long r = 0; r < n2; ++r) {
        long m = n - r;  // coefficient of z^m
        for (long j = 0; j <= n; ++j)
            if (j - m >= 0) A(n1 + r, j) = pair.cinf(j - m);
        if (m >= 0) A(n1 + r, n + 1 + m) = Complex(-1.0);
    }
    return A;
}

Real system_residual(const Matrix &A, const std::vector<Complex> &v) {
    Real worst(0L);
    Real vmax(0L);
    for (const Complex &c : v) vmax = max(vmax, abs(c));
    for (size_t i = 0; i < A.rows; ++i) {
        Complex s(0L);
        Real scale(0L);
        for (size_t j = 0; j < A.cols; ++j) {
            s += A(i, j) * v[j];
            scale += abs(A(i, j));
        }
        if (scale.is_zero()) continue;
        worst = max(worst, abs(s) / (scale * vmax));
    }
    return worst;
}

long vector_degree(const std::vector<Complex> &v, long lo, long hi, const Real &cut) {
    for (long j = hi; j >= lo; --j)
        if (abs(v[j]) > cut) return j - lo;
    return -1;
}

}  // namespace

PadeApproximant pade_solve(const PowerSeriesPair &pair, long n1, long n2,
                           const PrecisionContext &ctx) {
    if ((n1 + n2) % 2 == 0) throw DomainError("pade_solve: n1 + n2 must be odd");
    const long n = (n1 + n2 - 1) / 2;
    if (pair.order() < 2 * n + 1)
        throw DomainError("pade_solve: pair order " + std::to_string(pair.order()) +
                          " insufficient for n = " + std::to_string(n));

    Matrix A = assemble_system(pair, n, n1, n2);
    std::vector<Complex> v;
    size_t kdim = 1;
    try {
        NullspaceResult r = solve_nullspace(A, ctx);
        v = std::move(r.v);
    } catch (const DegenerateSystemError &) {
        // expected data for degenerate instances: take the minimal-degree
        // representative of the kernel, provided all ratios agree
        auto basis = nullspace_basis(A, ctx);
        if (basis.empty()) throw;
        kdim = basis.size();
        // column-reduce on the q-part from the top degree down
        for (long col = n; col >= 0 && basis.size() > 1; --col) {
            size_t piv = basis.size();
            Real best(0L);
            for (size_t i = 0; i < basis.size(); ++i) {
                Real m = abs(basis[i][col]);
                if (m > best) {
                    best = m;
                    piv = i;
                }
            }
            if (piv == basis.size() || best < ctx.tol) continue;
            for (size_t i = 0; i < basis.size(); ++i) {
                if (i == piv) continue;
                Complex f = basis[i][col] / basis[piv][col];
                for (size_t j = 0; j < basis[i].size(); ++j) basis[i][j] -= f * basis[piv][j];
            }
            std::swap(basis[piv], basis.back());
            basis.pop_back();
        }
        v = basis.front();
        // uniqueness of the ratio: all kernel vectors must give the same P/Q
        auto ratio_at = [&](const std::vector<Complex> &u, const Complex &z) {
            Complex q(0L), p(0L);
            for (long j = n; j >= 0; --j) q = q * z + u[j];
            for (long j = n; j >= 0; --j) p = p * z + u[n + 1 + j];
            return p / q;
        };
        auto basis2 = nullspace_basis(A, ctx);
        for (size_t i = 1; i < basis2.size(); ++i) {
            Complex z(0.731, 0.442);
            Complex d = ratio_at(basis2[0], z) - ratio_at(basis2[i], z);
            if (abs(d) > sqrt(ctx.tol) * (abs(ratio_at(basis2[0], z)) + 1.0))
                throw DegenerateSystemError(
                    "pade_solve: kernel vectors with distinct ratios (internal inconsistency)");
        }
    }

    Real vmax(0L);
    for (const Complex &c : v) vmax = max(vmax, abs(c));
    Real cut = sqrt(ctx.tol) * vmax;

    PadeApproximant out;
    out.n = n;
    out.n1 = n1;
    out.n2 = n2;
    out.interp_residual = system_residual(A, v);

    long degQ = vector_degree(v, 0, n, cut);
    if (degQ < 0) throw DegenerateSystemError("pade_solve: Q vanished identically");
    std::vector<Complex> qc(v.begin(), v.begin() + degQ + 1);
    long degP = vector_degree(v, n + 1, 2 * n + 1, cut);
    std::vector<Complex> pc(v.begin() + n + 1, v.begin() + n + 1 + std::max(degP + 1, 0L));

    out.Q = Polynomial(std::move(qc)).trimmed(sqrt(ctx.tol));
    out.P = Polynomial(std::move(pc)).trimmed(sqrt(ctx.tol));
    out.degenerate = (out.Q.degree() < n) || kdim > 1;
    if (!out.degenerate) {
        Complex lead = out.Q.leading();
        Complex inv = Complex(1L) / lead;
        out.Q *= inv;
        out.P *= inv;
        out.monic = true;
    }
    return out;
}

PadeApproximant pade_star(const PowerSeriesPair &pair, long n, const PrecisionContext &ctx) {
    return pade_solve(pair, n, n - 1, ctx);
}

Complex linearized_error_eval(const LinearizedError &err, const Complex &z,
                              const WeightOnCompact &w, const PrecisionContext &ctx) {
    (void)ctx;
    const PadeApproximant &ap = *err.owner;
    Complex f = w.cauchy_transform(z);
    Complex val = ap.Q.eval(z) * f - ap.P.eval(z);
    return val * pow(z, -err.n);
}

AnResult a_n_compute(const PadeApproximant &star, const WeightOnCompact &w,
                     const PrecisionContext &ctx) {
    Complex tpi(Real(0L), Real::pi() * 2.0);
    Complex integral = w.polynomial_moment(star.Q, -1) / tpi;
    Real scale = w.polynomial_abs_scale(star.Q, -1) / (Real::pi() * 2.0);
    AnResult r;
    Complex inv_an = -integral;
    if (abs(inv_an) < ctx.tol * max(scale, Real(1L))) {
        r.infinite = true;
        r.value = Complex(0L);
    } else {
        r.infinite = false;
        r.value = Complex(1L) / inv_an;
    }
    return r;
}

Real orthogonality_check(const Polynomial &Q, long n, const WeightOnCompact &w,
                         const PrecisionContext &ctx, long kmax) {
    (void)ctx;
    Real worst(0L);
    for (long k = 0; k <= kmax; ++k) {
        Complex integral = w.polynomial_moment(Q, k - n);
        Real scale = w.polynomial_abs_scale(Q, k - n);
        if (scale.is_zero()) continue;
        worst = max(worst, abs(integral) / scale);
    }
    return worst;
}

std::string PadeApproximant::to_json(const Complex *a_n) const {
    nlohmann::json j;
    j["n"] = n;
    j["n1"] = n1;
    j["n2"] = n2;
    j["monic"] = monic;
    j["degenerate"] = degenerate;
    j["interp_residual"] = interp_residual.str(8);
    auto poly_json = [](const Polynomial &p) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Complex &c : p.coeffs())
            arr.push_back(nlohmann::json::array({c.re.str(40), c.im.str(40)}));
        return arr;
    };
    j["Q"] = poly_json(Q);
    j["P"] = poly_json(P);
    if (a_n) j["a_n"] = nlohmann::json::array({a_n->re.str(40), a_n->im.str(40)});
    return j.dump(1);
}

}  // namespace padelab
