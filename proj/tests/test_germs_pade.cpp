#include "doctest.h"

#include "padelab/germs.hpp"
#include "padelab/pade.hpp"
#include "padelab/quadrature.hpp"

#include <gmp.h>

#include <vector>

using namespace padelab;

namespace {

PrecisionContext ctx256() { return PrecisionContext::install(256); }

BuslaevCompact real_half_compact(const PrecisionContext &ctx) {
    TrajectoryConfig cfg;
    return BuslaevCompact::build(Complex(0.5), cfg, ctx);
}

// Exact rational elimination oracle for the Markov pair at a = 1/2.
// Computes the monic Q_n of the (n1,n2) = (n,n+1) system over Q.
struct Rat {
    mpq_t v;
    Rat() { mpq_init(v); }
    Rat(long num, long den) {
        mpq_init(v);
        mpq_set_si(v, num, den);
        mpq_canonicalize(v);
    }
    Rat(const Rat &o) {
        mpq_init(v);
        mpq_set(v, o.v);
    }
    Rat &operator=(const Rat &o) {
        mpq_set(v, o.v);
        return *this;
    }
    ~Rat() { mpq_clear(v); }
    bool zero() const { return mpq_sgn(v) == 0; }
};

std::vector<Rat> markov_oracle_Q(long n) {
    // Legendre values P_k(5/4) as exact rationals
    long N = 2 * n + 1;
    std::vector<Rat> P(N + 1);
    mpq_set_si(P[0].v, 1, 1);
    Rat x(5, 4);
    if (N >= 1) mpq_set(P[1].v, x.v);
    Rat t1, t2;
    for (long k = 2; k <= N; ++k) {
        // P_k = ((2k-1) x P_{k-1} - (k-1) P_{k-2}) / k
        mpq_mul(t1.v, x.v, P[k - 1].v);
        mpq_set_si(t2.v, 2 * k - 1, 1);
        mpq_mul(t1.v, t1.v, t2.v);
        mpq_set_si(t2.v, k - 1, 1);
        mpq_mul(t2.v, t2.v, P[k - 2].v);
        mpq_sub(t1.v, t1.v, t2.v);
        mpq_set_si(t2.v, k, 1);
        mpq_div(P[k].v, t1.v, t2.v);
    }
    auto f0 = [&](long k) {  // -P_k
        Rat r;
        if (k >= 0) mpq_neg(r.v, P[k].v);
        return r;
    };
    auto finf = [&](long k) {  // -P_{k-1}, 0 for k = 0
        Rat r;
        if (k >= 1) mpq_neg(r.v, P[k - 1].v);
        return r;
    };

    long n1 = n, n2 = n + 1;
    long rows = n1 + n2, cols = 2 * (n + 1);
    std::vector<std::vector<Rat>> A(rows, std::vector<Rat>(cols));
    for (long i = 0; i < n1; ++i) {
        for (long j = 0; j <= n; ++j)
            if (i - j >= 0) A[i][j] = f0(i - j);
        if (i <= n) A[i][n + 1 + i] = Rat(-1, 1);
    }
    for (long r = 0; r < n2; ++r) {
        long m = n - r;
        for (long j = 0; j <= n; ++j)
            if (j - m >= 0) A[n1 + r][j] = finf(j - m);
        if (m >= 0) A[n1 + r][n + 1 + m] = Rat(-1, 1);
    }
    // exact Gauss-Jordan, free column = last
    std::vector<long> pivot_col(rows, -1);
    long prow = 0;
    for (long c = 0; c < cols && prow < rows; ++c) {
        long pr = -1;
        for (long r = prow; r < rows; ++r)
            if (!A[r][c].zero()) {
                pr = r;
                break;
            }
        if (pr < 0) continue;
        std::swap(A[pr], A[prow]);
        Rat inv;
        mpq_inv(inv.v, A[prow][c].v);
        for (long j = 0; j < cols; ++j) mpq_mul(A[prow][j].v, A[prow][j].v, inv.v);
        for (long r = 0; r < rows; ++r) {
            if (r == prow || A[r][c].zero()) continue;
            Rat f = A[r][c];
            for (long j = 0; j < cols; ++j) {
                Rat t;
                mpq_mul(t.v, f.v, A[prow][j].v);
                mpq_sub(A[r][j].v, A[r][j].v, t.v);
            }
        }
        pivot_col[prow] = c;
        ++prow;
    }
    // kernel vector with free variable = 1 at the last non-pivot column
    std::vector<bool> is_pivot(cols, false);
    for (long r = 0; r < prow; ++r) is_pivot[pivot_col[r]] = true;
    long freec = -1;
    for (long c = 0; c < cols; ++c)
        if (!is_pivot[c]) freec = c;
    std::vector<Rat> v(cols);
    mpq_set_si(v[freec].v, 1, 1);
    for (long r = prow - 1; r >= 0; --r) {
        Rat s;
        for (long j = 0; j < cols; ++j) {
            if (j == pivot_col[r] || v[j].zero()) continue;
            Rat t;
            mpq_mul(t.v, A[r][j].v, v[j].v);
            mpq_add(s.v, s.v, t.v);
        }
        mpq_neg(v[pivot_col[r]].v, s.v);
    }
    // monic Q part
    std::vector<Rat> q(v.begin(), v.begin() + n + 1);
    Rat lead = q[n];
    for (long j = 0; j <= n; ++j) mpq_div(q[j].v, q[j].v, lead.v);
    return q;
}

Real rat_to_real(const Rat &r) {
    // exact: num / den through strings
    char *ns = mpq_get_str(nullptr, 10, r.v);
    std::string s(ns);
    free(ns);
    auto slash = s.find('/');
    if (slash == std::string::npos) return Real(s);
    return Real(s.substr(0, slash)) / Real(s.substr(slash + 1));
}

}  // namespace

TEST_CASE("log pair germ coefficients") {
    auto ctx = ctx256();
    PowerSeriesPair p = germ_log_pair(Complex(2.0), 12);
    CHECK(abs(p.coeffs0[0] - Complex(log(Real(2L)))) < ctx.tol);
    CHECK(abs(p.coeffs0[1] - 1.0) < ctx.tol);
    CHECK(abs(p.coeffs_inf[1] + 1.0) < ctx.tol);
    for (long k = 1; k <= 12; ++k) CHECK(abs(p.coeffs0[k] + p.coeffs_inf[k]) < ctx.tol);
    CHECK_THROWS_AS(germ_log_pair(Complex(-2.0), 4), BranchError);

    // series evaluation matches the defining function inside the disk
    Complex z(0.1, 0.05);
    PowerSeriesPair q = germ_log_pair(Complex(2.0), 220);
    Complex direct = log((z - 1.0) / (z - 0.5));
    CHECK(abs(q.eval0(z) - direct) < Real(1e-60));
    Complex zi(30.0, 11.0);
    Complex direct_inf = log((zi - 2.0) / (zi - 1.0));
    CHECK(abs(q.eval_inf(zi) - direct_inf) < Real(1e-60));
}

TEST_CASE("markov germ: real recurrence") {
    auto ctx = ctx256();
    PowerSeriesPair p = germ_markov_pair(Complex(0.5), 10);
    CHECK(abs(p.coeffs0[0] + 1.0) < ctx.tol);    // w(0) = -1
    CHECK(abs(p.coeffs0[1] + 1.25) < ctx.tol);   // -P_1(1.25)
    CHECK(abs(p.coeffs_inf[1] + 1.0) < ctx.tol); // -P_0
    for (auto &c : p.coeffs0) CHECK(c.im.is_zero());
    // series vs direct evaluation: 1/w at z = 0.2
    PowerSeriesPair q = germ_markov_pair(Complex(0.5), 260);
    Complex z(0.2);
    Complex w = straight_cut_sqrt(z, Complex(0.5), Complex(2.0));
    CHECK(abs(q.eval0(z) - Complex(1L) / w) < Real(1e-50));
}

TEST_CASE("weight quadrature reproduces markov germ, real case") {
    auto ctx = ctx256();
    BuslaevCompact fc = real_half_compact(ctx);
    WeightSpec spec = WeightSpec::markov();
    PowerSeriesPair pw = germ_from_weight(spec, fc, 8, ctx);
    PowerSeriesPair pm = germ_markov_pair(Complex(0.5), 8);
    for (long k = 0; k <= 8; ++k) {
        CHECK(abs(pw.coeffs0[k] - pm.coeffs0[k]) < Real(1e-34));
        CHECK(abs(pw.coeffs_inf[k] - pm.coeffs_inf[k]) < Real(1e-34));
    }
}

TEST_CASE("single-arc constant weight oracle") {
    auto ctx = ctx256();
    // rho == 2 pi i on the straight arc from 1 to a only:
    // f_{k,inf} = -(1/2pi i) int rho s^{k-1} ds = (1 - a^k)/k
    Complex a(0.5);
    for (long k : {1L, 2L, 5L}) {
        Complex integral = quad_tanh_sinh(
            [&](const Complex &s) { return pow(s, k - 1); }, Complex(1L), a, ctx);
        Complex fk = -integral;  // the 2 pi i cancels the normalization
        Complex expect = (Complex(1L) - pow(a, k)) / Real(k);
        CHECK(abs(fk - expect) < ctx.tol * 100.0);
    }
}

TEST_CASE("weight quadrature reproduces markov germ, complex case") {
    auto ctx = ctx256();
    TrajectoryConfig cfg;
    cfg.step = 0.02;
    Complex a = normalize_parameter(Complex(1.2, 1.3));
    BuslaevCompact fc = BuslaevCompact::build(a, cfg, ctx);
    WeightOnCompact w(WeightSpec::markov(), fc, ctx);
    PowerSeriesPair pw = germ_from_weight(w, 6, ctx);
    PowerSeriesPair pm = germ_markov_pair_complex(fc, 6, ctx);
    for (long k = 0; k <= 6; ++k) {
        CHECK(abs(pw.coeffs0[k] - pm.coeffs0[k]) < Real(1e-18));
        CHECK(abs(pw.coeffs_inf[k] - pm.coeffs_inf[k]) < Real(1e-18));
    }
}

TEST_CASE("log-pair jump weight reproduces the log germ, complex case") {
    auto ctx = ctx256();
    TrajectoryConfig cfg;
    cfg.step = 0.02;
    Complex a_orig(1.2, 1.3);
    Complex a = normalize_parameter(a_orig);
    BuslaevCompact fc = BuslaevCompact::build(a, cfg, ctx);
    WeightOnCompact w(WeightSpec::log_pair_jump(a_orig), fc, ctx);
    PowerSeriesPair pw = germ_from_weight(w, 6, ctx);
    PowerSeriesPair pl = germ_log_pair(a_orig, 6);
    for (long k = 0; k <= 6; ++k) {
        CHECK(abs(pw.coeffs0[k] - pl.coeffs0[k]) < Real(1e-14));
        CHECK(abs(pw.coeffs_inf[k] - pl.coeffs_inf[k]) < Real(1e-14));
    }
}

TEST_CASE("pade reproduces rational input exactly") {
    auto ctx = ctx256();
    // f = 1/(1-z): f0 coefficients 1; finf = -sum_{k>=1} z^-k
    PowerSeriesPair p;
    p.label = "rational";
    p.a = Complex(0L);
    p.coeffs0.assign(12, Complex(1L));
    p.coeffs_inf.assign(12, Complex(-1.0));
    p.coeffs_inf[0] = Complex(0L);
    PadeApproximant ap = pade_solve(p, 1, 2, ctx);
    // P/Q = 1/(1-z)
    Complex z(0.3, 0.4);
    CHECK(abs(ap.eval(z) - Complex(1L) / (Complex(1L) - z)) < ctx.tol * 100.0);
    CHECK(ap.interp_residual < ctx.tol);
}

TEST_CASE("pade oversized rational input is degenerate with infinite a_n") {
    auto ctx = ctx256();
    PowerSeriesPair p;
    p.label = "rational";
    p.a = Complex(0L);
    p.coeffs0.assign(16, Complex(1L));
    p.coeffs_inf.assign(16, Complex(-1.0));
    p.coeffs_inf[0] = Complex(0L);
    PadeApproximant ap = pade_solve(p, 5, 6, ctx);
    CHECK(ap.degenerate);
    Complex z(0.3, 0.4);
    CHECK(abs(ap.eval(z) - Complex(1L) / (Complex(1L) - z)) < sqrt(ctx.tol));
}

TEST_CASE("pade matches the exact-rational oracle for the markov pair") {
    auto ctx = ctx256();
    PowerSeriesPair pm = germ_markov_pair(Complex(0.5), 12);
    for (long n = 1; n <= 4; ++n) {
        PadeApproximant ap = pade_solve(pm, n, n + 1, ctx);
        CHECK(ap.monic);
        CHECK(ap.Q.degree() == n);
        auto oracle = markov_oracle_Q(n);
        for (long k = 0; k <= n; ++k) {
            Real qk = rat_to_real(oracle[k]);
            CHECK(abs(ap.Q.coeff(k) - Complex(qk)) < Real(1e-70));
        }
    }
}

TEST_CASE("pade uniqueness of the ratio under pivot order") {
    auto ctx = ctx256();
    PowerSeriesPair pm = germ_markov_pair(Complex(0.5), 20);
    PadeApproximant a1 = pade_solve(pm, 6, 7, ctx);
    // scaling invariance: scaling both germs scales P, leaves monic Q fixed
    PowerSeriesPair scaled = pm;
    Complex c(1.7, -0.3);
    for (auto &x : scaled.coeffs0) x *= c;
    for (auto &x : scaled.coeffs_inf) x *= c;
    PadeApproximant a2 = pade_solve(scaled, 6, 7, ctx);
    for (long k = 0; k <= 6; ++k) {
        CHECK(abs(a1.Q.coeff(k) - a2.Q.coeff(k)) < Real(1e-60));
        CHECK(abs(a1.P.coeff(k) * c - a2.P.coeff(k)) < Real(1e-60));
    }
}

TEST_CASE("orthogonality characterization") {
    auto ctx = ctx256();
    BuslaevCompact fc = real_half_compact(ctx);
    WeightOnCompact w(WeightSpec::markov(), fc, ctx);
    PowerSeriesPair pm = germ_markov_pair(Complex(0.5), 24);
    PadeApproximant ap = pade_solve(pm, 5, 6, ctx);
    Real res = orthogonality_check(ap.Q, 5, w, ctx, 4);
    CHECK(res < Real(1e-25));
    // sensitivity guard: perturbing one coefficient breaks orthogonality
    std::vector<Complex> pc = ap.Q.coeffs();
    pc[2] += Complex(1e-3);
    Real res2 = orthogonality_check(Polynomial(pc), 5, w, ctx, 4);
    CHECK(res2 > Real(1e-6));
    // vacuous range for n = 0
    Real res0 = orthogonality_check(Polynomial::constant(Complex(1L)), 0, w, ctx, -1);
    CHECK(res0.is_zero());
}

TEST_CASE("a_n finite for markov, matches R* expansion") {
    auto ctx = ctx256();
    BuslaevCompact fc = real_half_compact(ctx);
    WeightOnCompact w(WeightSpec::markov(), fc, ctx);
    PowerSeriesPair pm = germ_markov_pair(Complex(0.5), 24);
    long n = 2;
    PadeApproximant star = pade_star(pm, n, ctx);
    auto an = a_n_compute(star, w, ctx);
    CHECK(!an.infinite);
    // oracle: R*_{n-1}(z) ~ 1/(a_n z^n) at large z, via the linearized error
    LinearizedError err{&star, true, n};
    Complex z(40.0, 13.0);
    Complex r = linearized_error_eval(err, z, w, ctx);
    Complex predicted = Complex(1L) / (an.value * pow(z, n));
    CHECK(abs(r / predicted - 1.0) < Real(0.05));
}

TEST_CASE("linearized error orders at infinity") {
    auto ctx = ctx256();
    BuslaevCompact fc = real_half_compact(ctx);
    WeightOnCompact w(WeightSpec::markov(), fc, ctx);
    PowerSeriesPair pm = germ_markov_pair(Complex(0.5), 24);
    long n = 3;
    PadeApproximant ap = pade_solve(pm, n, n + 1, ctx);
    LinearizedError err{&ap, false, n};
    // |R_n(z)| |z|^{n+1} bounded as |z| doubles
    Complex z1(100.0, 20.0), z2 = Complex(200.0, 40.0);
    Real v1 = abs(linearized_error_eval(err, z1, w, ctx)) * pow(abs(z1), n + 1);
    Real v2 = abs(linearized_error_eval(err, z2, w, ctx)) * pow(abs(z2), n + 1);
    CHECK(v2 < v1 * 4.0);
    CHECK(v1 < v2 * 4.0);
    // oracle assembly from Q, P directly
    Complex direct = (ap.Q.eval(z1) * w.cauchy_transform(z1) - ap.P.eval(z1)) * pow(z1, -n);
    CHECK(abs(direct - linearized_error_eval(err, z1, w, ctx)) < ctx.tol * 100.0);
}

TEST_CASE("markov pade at n=2 against f evaluation") {
    auto ctx = ctx256();
    BuslaevCompact fc = real_half_compact(ctx);
    WeightOnCompact w(WeightSpec::markov(), fc, ctx);
    PowerSeriesPair pm = germ_markov_pair(Complex(0.5), 24);
    PadeApproximant ap = pade_solve(pm, 3, 4, ctx);
    // away from F the approximant is close to f_rho
    Complex z(3.0);
    Complex f = w.cauchy_transform(z);
    Complex wz = straight_cut_sqrt(z, fc.a(), fc.a_inv());
    CHECK(abs(f + Complex(1L) / wz) < Real(1e-35));  // f_rho = -1/w in Dinf
    CHECK(abs(ap.eval(z) - f) < Real(0.1));
}
