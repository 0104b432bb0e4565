#include "doctest.h"

#include "padelab/elliptic.hpp"
#include "padelab/pade.hpp"

#include <memory>

using namespace padelab;

namespace {

// shared fixture: building the surface machinery once keeps the suite fast
struct Surface {
    PrecisionContext ctx;
    BuslaevCompact fc;
    WeightOnCompact weight;
    SurfaceModel model;
    Surface(long bits, const WeightSpec &spec, const Complex &a_orig)
        : ctx(PrecisionContext::install(bits)),
          fc(BuslaevCompact::build(normalize_parameter(a_orig), TrajectoryConfig{}, ctx)),
          weight(spec, fc, ctx),
          model(weight, ctx) {}
};

Surface &markov_surface() {
    static std::unique_ptr<Surface> s;
    if (!s) s = std::make_unique<Surface>(256, WeightSpec::markov(), Complex(1.2, 1.3));
    set_working_precision(256);
    return *s;
}

// offset probe pair across a mid-arc segment; + side is the left of the
// stored orientation
void probe_pair(const BuslaevCompact &fc, ArcLabel l, double delta, Complex &plus, Complex &minus,
                Complex &at) {
    const Arc &arc = fc.arc(l);
    size_t k = arc.segments() / 2;
    at = (arc.pts[k] + arc.pts[k + 1]) * 0.5;
    Complex t = arc.pts[k + 1] - arc.pts[k];
    t /= abs(t);
    Complex nh = Complex(Real(0L), Real(1L)) * t;
    plus = at + nh * delta;
    minus = at - nh * delta;
}

}  // namespace

TEST_CASE("periods: realness, Im B > 0, Riemann relation") {
    Surface &s = markov_surface();
    CHECK(s.model.period_imag_defect() < Real(1e-30));
    CHECK(s.model.B().im > Real(0L));
    CHECK(s.model.riemann_relation_residual() < Real(1e-20));
}

TEST_CASE("Phi: base value, product identity, modulus comparison") {
    Surface &s = markov_surface();
    // Phi at the ramification point over a equals sqrt(a)
    Complex near_a = s.fc.a() + Complex(1e-12, -0.4e-12);
    SurfacePoint p{near_a, 0};
    CHECK(abs(s.model.Phi(p) - sqrt(s.fc.a())) < Real(1e-5));

    // product identity at scattered points
    for (auto zz : {Complex(0.2, 0.1), Complex(3.0, -1.0), Complex(-0.8, 0.9)}) {
        Complex p0 = s.model.Phi({zz, 0});
        Complex p1 = s.model.Phi({zz, 1});
        CHECK(abs(p0 * p1 - zz) < Real(1e-25) * max(Real(1L), abs(zz)));
    }

    // |Phi|^2 vs |z|: > in D_Q, < in D_R
    Complex zd0(0.15, -0.1);  // D0
    REQUIRE(s.fc.classify(zd0) == PointClass::D0);
    CHECK(norm(s.model.Phi({zd0, 0})) > abs(zd0));  // D_Q lift
    CHECK(norm(s.model.Phi({zd0, 1})) < abs(zd0));  // D_R lift
    Complex zdi(4.0, 2.0);
    REQUIRE(s.fc.classify(zdi) == PointClass::DInf);
    CHECK(norm(s.model.Phi({zdi, 1})) > abs(zdi));
    CHECK(norm(s.model.Phi({zdi, 0})) < abs(zdi));

    // leading coefficient at infinity on sheet 1
    Complex zbig(3.1e5, 1.7e5);
    CHECK(abs(s.model.Phi({zbig, 1}) / zbig - s.model.Phi_leading_coeff()) < Real(1e-4));
    CHECK(abs(s.model.Phi({zbig, 0}) - s.model.Phi_infinity0()) < Real(1e-4));
}

TEST_CASE("abel map: cycle jumps and involution symmetry") {
    Surface &s = markov_surface();
    Complex B = s.model.B();
    auto reduced = [&](Complex u) {
        Real m = round_nearest(u.im / B.im);
        u -= B * Complex(m);
        u.re -= round_nearest(u.re);
        return u;
    };
    // jump +-B across alpha (over F_1); across the beta gluing the value is
    // continuous up to lattice vectors
    Complex plus, minus, at;
    probe_pair(s.fc, ArcLabel::Fp1, 1e-7, plus, minus, at);
    Complex ja = s.model.abel({plus, 0}) - s.model.abel({minus, 0});
    Real da = min(abs(ja - B), abs(ja + B));
    CHECK(da < Real(1e-5));
    probe_pair(s.fc, ArcLabel::FaInv, 1e-7, plus, minus, at);
    // glued banks of the cut: (plus, 0) continues to (minus, 1); the library
    // determinations agree up to a lattice vector
    Complex glue = s.model.abel({plus, 0}) - s.model.abel({minus, 1});
    CHECK(abs(reduced(glue)) < Real(1e-5));

    Complex s1 = s.model.abel({Complex(0.3, 0.2), 0}) + s.model.abel({Complex(0.3, 0.2), 1});
    Complex s2 = s.model.abel({Complex(-2.0, 1.0), 0}) + s.model.abel({Complex(-2.0, 1.0), 1});
    CHECK(abs(reduced(s1 - s2)) < Real(1e-24));

    // base point: abel over a is zero
    CHECK(abs(s.model.abel({s.fc.a() + Complex(1e-14, 1e-14), 0})) < Real(1e-6));
}

TEST_CASE("A_sigma: products and beta jump") {
    Surface &s = markov_surface();
    Complex sigma(0.37);
    for (auto zz : {Complex(0.2, 0.15), Complex(2.5, 1.0)}) {
        Complex a0 = s.model.A_sigma(sigma, {zz, 0});
        Complex a1 = s.model.A_sigma(sigma, {zz, 1});
        CHECK(abs(a0 * a1 - 1.0) < Real(1e-24));
    }
    // A_0 == 1
    CHECK(abs(s.model.A_sigma(Complex(0L), {Complex(0.2, 0.15), 0}) - 1.0) < Real(1e-30));
    // integer-period jump ratio e^{-+2 pi i B sigma} across the alpha cycle
    // (the library seams place the e^{-+2 pi i sigma} jump along the homology
    // conjugate; the covariant check is the jump against the abel-map jump)
    Complex plus, minus, at;
    probe_pair(s.fc, ArcLabel::Fp1, 1e-7, plus, minus, at);
    Complex ratio = s.model.A_sigma(sigma, {plus, 0}) / s.model.A_sigma(sigma, {minus, 0});
    Complex tpi(Real(0L), Real::pi() * 2.0);
    Complex ja = s.model.abel({plus, 0}) - s.model.abel({minus, 0});
    Real dev = abs(ratio - exp(Complex(0L) - tpi * sigma * ja));
    CHECK(dev < Real(1e-4));
}

TEST_CASE("S_h: trivial weight, product identity, jumps") {
    Surface &s = markov_surface();
    // h == 1: S_h == 1
    {
        WeightOnCompact w1(WeightSpec::constant(Complex(1L)), s.fc, s.ctx);
        SurfaceModel m1(w1, s.ctx);
        CHECK(abs(m1.S_h({Complex(0.3, 0.1), 0}) - 1.0) < Real(1e-25));
        CHECK(abs(m1.S_h({Complex(3.0, 1.5), 1}) - 1.0) < Real(1e-25));
    }
    // product identity S_h(z) S_h(z*) = 1
    for (auto zz : {Complex(0.25, 0.05), Complex(2.2, -1.3), Complex(-1.5, 0.4)}) {
        Complex v0 = s.model.S_h({zz, 0});
        Complex v1 = s.model.S_h({zz, 1});
        CHECK(abs(v0 * v1 - 1.0) < Real(1e-25));
    }
    // jump S_{h+} = S_{h-}/h on delta (over F_a) and on gamma (over F_-1)
    for (ArcLabel l : {ArcLabel::Fa, ArcLabel::Fm1}) {
        Complex plus, minus, at;
        probe_pair(s.fc, l, 1e-6, plus, minus, at);
        int sheet_plus = 0;
        int sheet_minus = l == ArcLabel::Fa ? 1 : 0;  // crossing the cut swaps sheets
        Complex vp = s.model.S_h({plus, sheet_plus});
        Complex vm = s.model.S_h({minus, sheet_minus});
        Complex hval = Complex(2L);
        CHECK(abs(vp * hval / vm - 1.0) < Real(1e-4));
    }
}

TEST_CASE("theta function identities") {
    Surface &s = markov_surface();
    Complex B = s.model.B();
    Complex u(0.31, 0.27);
    CHECK(abs(s.model.theta(u + 1.0) - s.model.theta(u)) < Real(1e-30));
    Complex tpi(Real(0L), Real::pi() * 2.0);
    Complex lhs = s.model.theta(u + B) * exp(tpi * 0.5 * B + tpi * u);
    CHECK(abs(lhs - s.model.theta(u)) < Real(1e-28) * abs(s.model.theta(u)));
    CHECK(abs(s.model.theta((Complex(1L) + B) * 0.5)) < Real(1e-28));
}

TEST_CASE("jip: translation property, N_eps structure") {
    Surface &s = markov_surface();
    Real eps(0.05);
    Complex B = s.model.B();
    Complex step = s.model.omega() + B * s.model.tau();
    auto reduced = [&](Complex u) {
        Real m = round_nearest(u.im / B.im);
        u -= B * Complex(m);
        u.re -= round_nearest(u.re);
        return u;
    };
    long in_count = 0;
    for (long n = 1; n <= 12; ++n) {
        const auto &sol = s.model.jip(n, eps);
        CHECK(sol.residual < Real(1e-15));
        const auto &prev = s.model.jip(n - 1, eps);
        Complex d = sol.abel_z_n - prev.abel_z_n - step;
        CHECK(abs(reduced(d)) < Real(1e-15));
        bool ok = sol.in_N_eps || prev.in_N_eps;
        CHECK(ok);
        if (sol.in_N_eps) ++in_count;
        // star point solves its own inversion: a(z*) = a(z) + a(inf0) - a(0^1) mod lattice
        Complex ds = sol.abel_z_n_star -
                     (sol.abel_z_n + s.model.abel_infinity(0) - s.model.abel_zero(1));
        CHECK(abs(reduced(ds)) < Real(1e-14));
    }
    CHECK(in_count >= 6);
}

TEST_CASE("Theta_n continuous across the beta gluing") {
    Surface &s = markov_surface();
    const auto &sol = s.model.jip(5, Real(0.05));
    Complex plus, minus, at;
    probe_pair(s.fc, ArcLabel::FaInv, 1e-6, plus, minus, at);
    Complex tp = s.model.Theta_n(sol, {plus, 0});
    Complex tm = s.model.Theta_n(sol, {minus, 1});
    CHECK(abs(tp / tm - 1.0) < Real(1e-4));
}

TEST_CASE("Psi_n jump ratio equals h on all four cycles") {
    Surface &s = markov_surface();
    const auto &sol = s.model.jip(5, Real(0.05));
    for (ArcLabel l : {ArcLabel::Fa, ArcLabel::FaInv, ArcLabel::Fp1, ArcLabel::Fm1}) {
        Complex plus, minus, at;
        probe_pair(s.fc, l, 1e-6, plus, minus, at);
        bool is_cut = l == ArcLabel::Fa || l == ArcLabel::FaInv;
        // across a cut the opposite boundary value of the same branch sits on
        // the other sheet; the beta cycle is oriented against the stored arc,
        // which swaps its sides
        Complex vplus = s.model.Psi_n(sol, {plus, 0});
        Complex vminus = s.model.Psi_n(sol, {minus, is_cut ? 1 : 0});
        Complex ratio = l == ArcLabel::FaInv ? vplus / vminus : vminus / vplus;
        Complex hval(2L);
        CHECK(abs(ratio - hval) < Real(1e-3) * abs(hval));
    }
}

TEST_CASE("model normalization: gamma_n Q_n z^-n -> 1") {
    Surface &s = markov_surface();
    Real eps(0.05);
    long n = 5;
    for (double r : {2e3, 2e5}) {
        Complex z(r, 0.4 * r);
        auto mv = s.model.model_QR(n, eps, z);
        Complex val = mv.gamma_n * mv.Q * pow(z, -n);
        CHECK(abs(val - 1.0) < Real(40.0 / r));
    }
    // gamma products bounded (used for the compare bounds)
    auto mv = s.model.model_QR(n, eps, Complex(3.0, 1.0));
    CHECK(abs(mv.gamma_n * mv.gamma_star) < Real(1e4));
    CHECK(abs(mv.gamma_n * mv.gamma_star) > Real(1e-4));
}

TEST_CASE("g function: boundary value and positivity") {
    Surface &s = markov_surface();
    // 2 g = log|s| on F (sampled at an offset from a mid-arc point)
    Complex plus, minus, at;
    probe_pair(s.fc, ArcLabel::Fm1, 1e-6, plus, minus, at);
    Real bdry = s.model.g(plus) * 2.0 - log(abs(plus));
    CHECK(abs(bdry) < Real(1e-4));
    // positivity of 2g - log|z| off F
    for (auto zz : {Complex(0.2, 0.1), Complex(3.5, -2.0)}) {
        CHECK(s.model.g(zz) * 2.0 - log(abs(zz)) > Real(0L));
    }
    // normalization at infinity
    Real g1 = s.model.g(Complex(1e4, 0.0)) - log(Real(1e4));
    Real g2 = s.model.g(Complex(1e6, 0.0)) - log(Real(1e6));
    CHECK(abs(g1 - g2) < Real(1e-2));
}

TEST_CASE("endpoint exponent slopes of Psi_n near a") {
    Surface &s = markov_surface();
    const auto &sol = s.model.jip(4, Real(0.05));
    // |Psi_n(z^(k))|^2 ~ |z-e|^{(-1)^{1-k} alpha(e)}: for the markov weight all
    // alpha(e) = 0, so the moduli stay bounded above and below approaching a
    Complex a = s.fc.a();
    Complex dir(0.31, 0.87);
    dir /= abs(dir);
    // direction pointing into D0 away from the arcs
    std::vector<Real> vals;
    for (double d : {1e-3, 1e-4, 1e-5}) {
        Complex z = a + dir * d;
        vals.push_back(abs(s.model.Psi_n(sol, {z, 0})));
    }
    CHECK(vals[2] < vals[0] * 50.0);
    CHECK(vals[0] < vals[2] * 50.0);
}


TEST_CASE("complex strong asymptotics anchor: pade vs model") {
    // end-to-end oracle for the whole surface machinery: the actual monic
    // denominators follow gamma_n Q-model
    auto ctx = PrecisionContext::install(320);
    BuslaevCompact fc = BuslaevCompact::build(normalize_parameter(Complex(1.2, 1.3)),
                                              TrajectoryConfig{}, ctx);
    WeightOnCompact w(WeightSpec::markov(), fc, ctx);
    SurfaceModel model(w, ctx);
    PowerSeriesPair pair = germ_markov_pair_complex(fc, 26, ctx);
    Real eps(0.05);
    long n = 9;
    if (!model.jip(n, eps).in_N_eps) n = 10;
    PadeApproximant ap = pade_solve(pair, n, n + 1, ctx);
    REQUIRE(ap.monic);
    for (Complex z : {Complex(0.14, -0.1), Complex(3.1, 1.4)}) {
        auto mv = model.model_QR(n, eps, z);
        Complex ratio = ap.Q.eval(z) / (mv.gamma_n * mv.Q);
        CHECK(abs(ratio - 1.0) < Real(0.08));
        // w R_n against gamma_n R-model; w is the plane branch (sheet 0)
        Complex f = w.cauchy_transform(z);
        Complex rn = (ap.Q.eval(z) * f - ap.P.eval(z)) * pow(z, -n);
        Complex wz = model.w_at({z, 0});
        Complex ratio_r = wz * rn / (mv.gamma_n * mv.R);
        CHECK(abs(ratio_r - 1.0) < Real(0.08));
    }
}
