#include "padelab/roots.hpp"

#include "padelab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <numeric>

namespace padelab {

namespace {

// Double-precision companion-matrix eigenvalues as refinement seeds.
std::vector<Complex> companion_seeds(const Polynomial &p) {
    const long n = p.degree();
    Real lead = abs(p.leading());
    std::vector<std::complex<double>> c(static_cast<size_t>(n) + 1);
    // Scale by the max coefficient to keep doubles in range.
    Real scale = p.max_coeff_abs();
    for (long k = 0; k <= n; ++k) {
        Complex ck = p.coeff(k) / scale;
        c[static_cast<size_t>(k)] = {ck.re.to_double(), ck.im.to_double()};
    }
    (void)lead;
    std::complex<double> cn = c[static_cast<size_t>(n)];
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    for (long i = 1; i < n; ++i) M(i, i - 1) = 1.0;
    for (long i = 0; i < n; ++i) M(i, n - 1) = -c[static_cast<size_t>(i)] / cn;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
    std::vector<Complex> seeds;
    seeds.reserve(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) {
        std::complex<double> ev = es.eigenvalues()(i);
        seeds.emplace_back(ev.real(), ev.imag());
    }
    return seeds;
}

Real residual_scale(const Polynomial &p, const Complex &z) {
    Real m = max(Real(1L), abs(z));
    return p.max_coeff_abs() * pow(m, p.degree());
}

}  // namespace

std::vector<RootEstimate> poly_roots(const Polynomial &p, const PrecisionContext &ctx) {
    if (p.degree() < 1) throw DomainError("poly_roots: degree must be >= 1");
    const size_t n = static_cast<size_t>(p.degree());

    std::vector<Complex> z = companion_seeds(p);

    // Aberth-Ehrlich simultaneous refinement at full precision.
    const int max_iters = 120;
    std::vector<bool> done(n, false);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool all_done = true;
        for (size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            Complex pval, dval;
            p.eval2(z[i], pval, dval);
            if (abs(pval) < ctx.tol * residual_scale(p, z[i])) {
                done[i] = true;
                continue;
            }
            all_done = false;
            if (dval.is_zero()) {
                // Nudge off an exact critical point.
                z[i] += Complex(ctx.tol, ctx.tol);
                continue;
            }
            Complex newton = pval / dval;
            Complex repulsion(0L);
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                Complex d = z[i] - z[j];
                if (d.is_zero()) d = Complex(ctx.tol);
                repulsion += Complex(1L) / d;
            }
            Complex denom = Complex(1L) - newton * repulsion;
            Complex step = denom.is_zero() ? newton : newton / denom;
            z[i] -= step;
        }
        if (all_done) break;
    }

    // Two Newton polish steps per root; quadratic convergence squeezes simple
    // roots down to working precision.
    for (size_t i = 0; i < n; ++i) {
        for (int s = 0; s < 2; ++s) {
            Complex pval, dval;
            p.eval2(z[i], pval, dval);
            if (dval.is_zero()) break;
            Complex step = pval / dval;
            if (!step.is_finite()) break;
            z[i] -= step;
        }
    }

    std::vector<RootEstimate> out(n);
    for (size_t i = 0; i < n; ++i) {
        out[i].z = z[i];
        out[i].residual = abs(p.eval(z[i])) / residual_scale(p, z[i]);
        out[i].converged = out[i].residual < ctx.tol * 16.0;
        out[i].multiplicity = 1;
    }

    // Multiplicity by cluster radius tol^(1/m): union at radius tol^(1/2),
    // then widen to tol^(1/m) for the cluster sizes found.
    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<size_t(size_t)> find = [&](size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    auto cluster_pass = [&](const Real &radius) {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                if (abs(z[i] - z[j]) < radius) parent[find(i)] = find(j);
    };
    cluster_pass(pow(ctx.tol, Real(0.5)));
    std::vector<size_t> size(n, 0);
    for (size_t i = 0; i < n; ++i) ++size[find(i)];
    size_t largest = *std::max_element(size.begin(), size.end());
    if (largest > 2) cluster_pass(pow(ctx.tol, 1.0 / Real(static_cast<long>(largest))));
    std::fill(size.begin(), size.end(), 0);
    for (size_t i = 0; i < n; ++i) ++size[find(i)];
    for (size_t i = 0; i < n; ++i) out[i].multiplicity = static_cast<int>(size[find(i)]);

    std::sort(out.begin(), out.end(), [](const RootEstimate &a, const RootEstimate &b) {
        if (a.z.re != b.z.re) return a.z.re < b.z.re;
        return a.z.im < b.z.im;
    });
    return out;
}

}  // namespace padelab
