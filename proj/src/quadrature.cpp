#include "padelab/quadrature.hpp"

#include <map>
#include <mutex>

namespace padelab {

namespace {

Real two_pi() { return Real::pi() * 2.0; }

bool close_enough(const Complex &a, const Complex &b, const Real &tol) {
    return abs(a - b) < tol * max(Real(1L), abs(b));
}

}  // namespace

Complex quad_trapezoid_periodic(const Integrand &f, const Complex &center, const Real &radius,
                                const PrecisionContext &ctx, const Real &tol) {
    const long n_start = 64, n_cap = 1 << 20;
    Real tau = two_pi();

    // Unnormalized running sum of f(z_k) e^{i theta_k}; doubling only adds the
    // odd-index nodes of the finer grid.
    Complex sum(0L);
    long n = 0;
    Complex prev, current;
    bool have_prev = false;

    auto add_nodes = [&](long fine_n, bool odd_only) {
        long step = odd_only ? 2 : 1;
        long start = odd_only ? 1 : 0;
        for (long k = start; k < fine_n; k += step) {
            Real theta = tau * Real(k) / Real(fine_n);
            Complex dir = polar(Real(1L), theta);
            Complex z = center + radius * dir;
            sum += f(z) * dir;
        }
    };

    add_nodes(n_start, false);
    n = n_start;
    current = sum * (radius / Real(n));
    while (true) {
        add_nodes(2 * n, true);
        n *= 2;
        prev = current;
        have_prev = true;
        current = sum * (radius / Real(n));
        if (close_enough(current, prev, tol)) return current;
        if (n >= n_cap) break;
    }
    (void)have_prev;
    throw QuadratureError("quad_trapezoid_periodic: no convergence at N=2^20", current.str(20),
                          prev.str(20));
}

Complex quad_trapezoid_periodic(const Integrand &f, const Complex &center, const Real &radius,
                                const PrecisionContext &ctx) {
    return quad_trapezoid_periodic(f, center, radius, ctx, ctx.tol);
}

Complex quad_cheb_segment(const Integrand &g, const Complex &p, const Complex &q,
                          const PrecisionContext &ctx, const Real &tol) {
    const long n_start = 64, n_cap = 1 << 20;
    Real tau = two_pi();
    Complex mid = (p + q) * 0.5;
    Complex half = (q - p) * 0.5;

    Complex sum(0L);
    long n = 0;

    auto add_nodes = [&](long fine_n, bool odd_only) {
        long step = odd_only ? 2 : 1;
        long start = odd_only ? 1 : 0;
        for (long k = start; k < fine_n; k += step) {
            Real theta = tau * Real(k) / Real(fine_n);
            sum += g(mid + half * cos(theta));
        }
    };

    add_nodes(n_start, false);
    n = n_start;
    // Integrand in theta is even and 2pi-periodic: int_0^pi = (1/2) int_0^{2pi}.
    Complex current = sum * (Real::pi() / Real(n));
    Complex prev;
    while (true) {
        add_nodes(2 * n, true);
        n *= 2;
        prev = current;
        current = sum * (Real::pi() / Real(n));
        if (close_enough(current, prev, tol)) return current;
        if (n >= n_cap) break;
    }
    throw QuadratureError("quad_cheb_segment: no convergence at N=2^20", current.str(20),
                          prev.str(20));
}

Complex quad_cheb_segment(const Integrand &g, const Complex &p, const Complex &q,
                          const PrecisionContext &ctx) {
    return quad_cheb_segment(g, p, q, ctx, ctx.tol);
}

const TanhSinhRule &TanhSinhRule::get(int level, long bits) {
    static std::map<std::pair<int, long>, TanhSinhRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({level, bits});
    if (it != cache.end()) return it->second;

    TanhSinhRule rule;
    Real h = Real::pow2(-level);
    Real half_pi = Real::pi() * 0.5;
    // Depth cap: stop once 1-|x| reaches 2^-(bits-4), the representability
    // limit of the abscissas. At that depth the tail mass is ~2^-(bits/2) even
    // for inverse-square-root endpoint singularities.
    Real dm_min = Real::pow2(-(bits - 4));
    for (long k = 0;; ++k) {
        Real t = h * Real(k);
        Real v = half_pi * sinh(t);
        Real ch = cosh(v);
        Real w = half_pi * cosh(t) / (ch * ch);
        Real e2v = exp(v * (-2.0));
        Real dm = 2.0 * e2v / (1.0 + e2v);  // 1 - tanh(v)
        if (dm < dm_min || !w.is_finite()) break;
        rule.x.push_back(tanh(v));
        rule.w.push_back(w);
        if (k > (200L << level)) break;
    }
    auto res = cache.emplace(std::make_pair(level, bits), std::move(rule));
    return res.first->second;
}

namespace {
Complex tanh_sinh_impl(const Integrand &f, const Complex &p, const Complex &q,
                       const PrecisionContext &ctx, const Real &tol, int max_level,
                       bool allow_partial);
}

Complex quad_tanh_sinh(const Integrand &f, const Complex &p, const Complex &q,
                       const PrecisionContext &ctx, const Real &tol, int max_level) {
    return tanh_sinh_impl(f, p, q, ctx, tol, max_level, false);
}

Complex quad_tanh_sinh_soft(const Integrand &f, const Complex &p, const Complex &q,
                            const PrecisionContext &ctx, const Real &tol, int max_level) {
    return tanh_sinh_impl(f, p, q, ctx, tol, max_level, true);
}

namespace {
Complex tanh_sinh_impl(const Integrand &f, const Complex &p, const Complex &q,
                       const PrecisionContext &ctx, const Real &tol, int max_level,
                       bool allow_partial) {
    Complex mid = (p + q) * 0.5;
    Complex half = (q - p) * 0.5;

    // Level doubling reuses all previously evaluated nodes: at level L the new
    // abscissas are the odd multiples of 2^-L.
    Complex sum(0L);
    Complex current, prev;
    int level0 = 2;
    for (int level = level0; level <= max_level; ++level) {
        const TanhSinhRule &rule = TanhSinhRule::get(level, ctx.bits);
        long stride = (level == level0) ? 1 : 2;
        long start = (level == level0) ? 0 : 1;
        for (size_t k = start; k < rule.x.size(); k += stride) {
            // Nodes whose offset underflows against an endpoint are skipped;
            // their contribution is below the truncation mass of the rule.
            Complex zp = mid + half * rule.x[k];
            if (!(zp == q)) sum += f(zp) * rule.w[k];
            if (k > 0) {
                Complex zm = mid - half * rule.x[k];
                if (!(zm == p)) sum += f(zm) * rule.w[k];
            }
        }
        prev = current;
        current = sum * half * Real::pow2(-level);
        if (level > level0 + 1 && close_enough(current, prev, tol)) return current;
    }
    if (allow_partial) return current;
    throw QuadratureError("quad_tanh_sinh: no convergence at max level", current.str(20),
                          prev.str(20));
}
}  // namespace

Complex quad_tanh_sinh(const Integrand &f, const Complex &p, const Complex &q,
                       const PrecisionContext &ctx) {
    return quad_tanh_sinh(f, p, q, ctx, ctx.tol);
}

Complex quad_tanh_sinh_fixed(const Integrand &f, const Complex &p, const Complex &q,
                             const PrecisionContext &ctx, int level) {
    const TanhSinhRule &rule = TanhSinhRule::get(level, ctx.bits);
    Complex mid = (p + q) * 0.5;
    Complex half = (q - p) * 0.5;
    Complex sum(0L);
    for (size_t k = 0; k < rule.x.size(); ++k) {
        Complex zp = mid + half * rule.x[k];
        if (!(zp == q)) sum += f(zp) * rule.w[k];
        if (k > 0) {
            Complex zm = mid - half * rule.x[k];
            if (!(zm == p)) sum += f(zm) * rule.w[k];
        }
    }
    return sum * half * Real::pow2(-level);
}

const GaussLegendreRule &GaussLegendreRule::get(int order, long bits) {
    static std::map<std::pair<int, long>, GaussLegendreRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({order, bits});
    if (it != cache.end()) return it->second;

    GaussLegendreRule rule;
    rule.x.resize(order);
    rule.w.resize(order);
    Real pi = Real::pi();
    for (int i = 0; i < order; ++i) {
        // Chebyshev-angle seed, Newton on P_n.
        Real x = cos(pi * (Real(i) + 0.75) / (Real(order) + 0.5));
        for (int iter = 0; iter < 80; ++iter) {
            // Legendre recurrence for P_n(x) and P_n'(x).
            Real p0(1L), p1 = x;
            for (int k = 2; k <= order; ++k) {
                Real p2 = ((2 * k - 1) * x * p1 - Real(k - 1) * p0) / Real(k);
                p0 = p1;
                p1 = p2;
            }
            Real dp = Real(order) * (x * p1 - p0) / (x * x - 1.0);
            Real dx = p1 / dp;
            x -= dx;
            if (abs(dx) < Real::pow2(-bits + 8)) break;
        }
        Real p0(1L), p1 = x;
        for (int k = 2; k <= order; ++k) {
            Real p2 = ((2 * k - 1) * x * p1 - Real(k - 1) * p0) / Real(k);
            p0 = p1;
            p1 = p2;
        }
        Real dp = Real(order) * (x * p1 - p0) / (x * x - 1.0);
        rule.x[i] = x;
        rule.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    auto res = cache.emplace(std::make_pair(order, bits), std::move(rule));
    return res.first->second;
}

}  // namespace padelab
