#include "doctest.h"

#include "padelab/continuation.hpp"
#include "padelab/geometry.hpp"
#include "padelab/quadrature.hpp"

#include <complex>

using namespace padelab;

namespace {

PrecisionContext ctx256() { return PrecisionContext::install(256); }

const Complex kFigA(0.383386581469648562300319488817891373801916932907348242811501597444089456869,
                    -0.415335463258785942492012779552715654952076677316293929712460063897763578275);
// (1.2+1.3i)^{-1} = (1.2-1.3i)/3.13

Complex fig_a() { return Complex(1.2, 1.3); }

}  // namespace

TEST_CASE("jukovski basics") {
    auto ctx = ctx256();
    CHECK(abs(jukovski(Complex(1L)) - 1.0) < ctx.tol);
    CHECK(abs(jukovski(Complex(0.0, 1.0))) < ctx.tol);
    CHECK(abs(jukovski(Complex(2.0)) - 1.25) < ctx.tol);
    CHECK_THROWS_AS(jukovski(Complex(0L)), DomainError);
}

TEST_CASE("parameter normalization") {
    auto ctx = ctx256();
    (void)ctx;
    Complex a = normalize_parameter(Complex(2.0));
    CHECK(abs(a - 0.5) < Real(1e-70));
    CHECK_THROWS_AS(normalize_parameter(Complex(0L)), DomainError);
    CHECK_THROWS_AS(normalize_parameter(Complex(0.6, 0.8)), DomainError);  // |a| = 1
}

TEST_CASE("chebotarev center: real and symmetry") {
    auto ctx = ctx256();
    CHECK(abs(chebotarev_center(Complex(0.5), ctx) - 1.0) < ctx.tol);
    CHECK(abs(chebotarev_center(Complex(-0.5), ctx) + 1.0) < ctx.tol);

    // purely imaginary a -> purely imaginary b
    Complex b = chebotarev_center(Complex(0.0, 0.55), ctx);
    CHECK(abs(b.re) < Real(1e-40));
    CHECK(abs(b) < Real(1L));

    // conjugation symmetry
    Complex a = fig_a();
    Complex b1 = chebotarev_center(a, ctx);
    Complex b2 = chebotarev_center(conj(a), ctx);
    CHECK(abs(b1 - conj(b2)) < Real(1e-40));
}

TEST_CASE("chebotarev center: figure parameter with residual oracle") {
    auto ctx = ctx256();
    Complex a = normalize_parameter(fig_a());
    Complex b = chebotarev_center(a, ctx);
    CHECK(abs(b) < Real(1L));
    // independent residual recomputation: both defining conditions along
    // slightly perturbed paths via a fresh quadrature
    Complex ainv = Complex(1L) / a;
    Complex binv = Complex(1L) / b;
    auto vref = [&](const Complex &t) {
        return straight_cut_sqrt(t, b, binv) / (straight_cut_sqrt(t, a, ainv) * t);
    };
    // path a -> b bowed through a midpoint offset
    Complex mid = (a + b) * 0.5 + Complex(0.013, 0.007);
    Complex i1 = quad_tanh_sinh(vref, a, mid, ctx) + quad_tanh_sinh(vref, mid, b, ctx);
    CHECK(abs(i1.re) < Real(1e-35));
    Complex mid2 = (b + Complex(1L)) * 0.5 + Complex(-0.009, 0.011);
    Complex i2 = quad_tanh_sinh(vref, b, mid2, ctx) + quad_tanh_sinh(vref, mid2, Complex(1L), ctx);
    CHECK(abs(i2.re) < Real(1e-35));
}

TEST_CASE("real compact: circle plus segment") {
    auto ctx = ctx256();
    TrajectoryConfig cfg;
    BuslaevCompact fc = BuslaevCompact::build(Complex(0.5), cfg, ctx);
    CHECK(fc.real_case());
    CHECK(abs(fc.b() - 1.0) < ctx.tol);
    CHECK(fc.arc(ArcLabel::Fp1).empty());
    CHECK(!fc.arc(ArcLabel::Fm1).empty());
    // classification
    CHECK(fc.classify(Complex(0L)) == PointClass::D0);
    CHECK(fc.classify(Complex(1e6)) == PointClass::DInf);
    CHECK(fc.classify(fc.arc(ArcLabel::Fm1).pts[3]) == PointClass::OnF);
    CHECK(fc.classify(Complex(0.7)) == PointClass::OnF);   // on the segment
    CHECK(fc.classify(Complex(0.3)) == PointClass::D0);
    CHECK(fc.classify(Complex(0.7, 0.4)) == PointClass::D0);
    CHECK(fc.distance(Complex(3.0)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("complex compact: topology, symmetry and trajectory property") {
    auto ctx = ctx256();
    TrajectoryConfig cfg;
    Complex a = normalize_parameter(fig_a());
    BuslaevCompact fc = BuslaevCompact::build(a, cfg, ctx);
    CHECK(!fc.real_case());
    for (int i = 0; i < 4; ++i) CHECK(!fc.arcs()[i].empty());

    // stored orientations: Fa b->a, FaInv 1/a->1/b; F1 u F-1 counterclockwise
    CHECK(abs(fc.arc(ArcLabel::Fa).pts.front() - fc.b()) < Real(1e-28));
    CHECK(abs(fc.arc(ArcLabel::Fa).pts.back() - fc.a()) < Real(1e-28));
    CHECK(abs(fc.arc(ArcLabel::FaInv).pts.front() - fc.a_inv()) < Real(1e-28));
    CHECK(abs(fc.arc(ArcLabel::FaInv).pts.back() - fc.b_inv()) < Real(1e-28));
    // the loop arcs connect b and 1/b head-to-tail with positive winding
    {
        const Arc &f1 = fc.arc(ArcLabel::Fp1);
        const Arc &fm1 = fc.arc(ArcLabel::Fm1);
        CHECK(abs(f1.pts.back() - fm1.pts.front()) < Real(1e-28));
        CHECK(abs(fm1.pts.back() - f1.pts.front()) < Real(1e-28));
        double total = 0.0;
        auto add = [&](const Arc &arc) {
            for (size_t k = 0; k + 1 < arc.pts.size(); ++k) {
                std::complex<double> u(arc.pts[k].re.to_double(), arc.pts[k].im.to_double());
                std::complex<double> v(arc.pts[k + 1].re.to_double(), arc.pts[k + 1].im.to_double());
                total += std::arg(v / u);
            }
        };
        add(f1);
        add(fm1);
        CHECK(total > 6.0);  // ~ +2 pi
    }

    // +-1 are exact nodes
    double d1 = 1e300, dm1 = 1e300;
    for (const Complex &p : fc.arc(ArcLabel::Fp1).pts)
        d1 = std::min(d1, std::abs(std::complex<double>((p - Complex(1L)).re.to_double(),
                                                        (p - Complex(1L)).im.to_double())));
    for (const Complex &p : fc.arc(ArcLabel::Fm1).pts)
        dm1 = std::min(dm1, std::abs(std::complex<double>((p + Complex(1L)).re.to_double(),
                                                          (p + Complex(1L)).im.to_double())));
    CHECK(d1 == 0.0);
    CHECK(dm1 == 0.0);

    // z -> 1/z invariance: image of Fa nodes lies on FaInv
    double hmax = 0.0;
    for (const Complex &p : fc.arc(ArcLabel::Fa).pts) {
        Complex ip = Complex(1L) / p;
        hmax = std::max(hmax, fc.distance(ip));
    }
    CHECK(hmax < 10.0 * cfg.matchtol);

    // defining trajectory property: Re int v dt/t along sampled subarcs
    QuarticBranch br(fc);
    const Arc &f1 = fc.arc(ArcLabel::Fp1);
    size_t n = f1.pts.size();
    Complex acc(0L);
    double worst = 0.0;
    for (size_t k = n / 4; k < 3 * n / 4; ++k) {
        const Complex &p = f1.pts[k];
        const Complex &q = f1.pts[k + 1];
        Complex mid = (p + q) * 0.5;
        Complex vm = br.v0(mid) / mid;
        acc += vm * (q - p);
        worst = std::max(worst, std::abs(acc.re.to_double()));
    }
    CHECK(worst < 10.0 * cfg.matchtol);

    // j(F) within the Chebotarev set: j(Fa) and j(FaInv) overlay
    double hd = 0.0;
    const Arc &fa = fc.arc(ArcLabel::Fa);
    const Arc &fainv = fc.arc(ArcLabel::FaInv);
    for (const Complex &p : fa.pts) {
        Complex jp = jukovski(p);
        double best = 1e300;
        for (const Complex &q : fainv.pts) {
            Complex d = jp - jukovski(q);
            best = std::min(best, std::abs(std::complex<double>(d.re.to_double(), d.im.to_double())));
        }
        hd = std::max(hd, best);
    }
    CHECK(hd < 10.0 * cfg.matchtol);

    // classification separates 0 and infinity
    CHECK(fc.classify(Complex(0L)) == PointClass::D0);
    CHECK(fc.classify(Complex(10.0, 3.0)) == PointClass::DInf);
}

TEST_CASE("quartic branch: asymptotics, traces, jump across cut") {
    auto ctx = ctx256();
    TrajectoryConfig cfg;
    Complex a = normalize_parameter(fig_a());
    BuslaevCompact fc = BuslaevCompact::build(a, cfg, ctx);
    QuarticBranch br(fc);

    // w0 ~ z^2 at infinity
    Complex zbig(747.0, 311.0);
    CHECK(abs(br.w0(zbig) / (zbig * zbig) - 1.0) < Real(0.01));

    // w0^2 = q(z)
    Complex z(0.3, 0.7);
    Complex q = (z - fc.a()) * (z - fc.a_inv()) * (z - fc.b()) * (z - fc.b_inv());
    CHECK(abs(br.w0(z) * br.w0(z) - q) < Real(1e-70));

    // trace consistency: offset evaluation matches the trace helpers
    const Arc &fa = fc.arc(ArcLabel::Fa);
    size_t seg = fa.pts.size() / 2;
    Complex p = fa.pts[seg], qq = fa.pts[seg + 1];
    Complex mid = (p + qq) * 0.5;
    Complex t = (qq - p) / abs(qq - p);
    Complex nh = Complex(Real(0L), Real(1L)) * t;
    Complex wp = br.w0(mid + nh * 1e-9);
    Complex wm = br.w0(mid - nh * 1e-9);
    CHECK(abs(wp + wm) < Real(1e-6) * abs(wp));  // opposite traces
    CHECK(abs(br.w0_trace(ArcLabel::Fa, seg, mid, +1) - wp) < Real(1e-6) * abs(wp));
    CHECK(abs(br.w0_trace(ArcLabel::Fa, seg, mid, -1) - wm) < Real(1e-6) * abs(wp));
}

TEST_CASE("real-case w traces on the cut") {
    auto ctx = ctx256();
    (void)ctx;
    // a = 1/2: w = sqrt((z-1/2)(z-2)), w ~ z at infinity, w(0) = -1,
    // w_+(1.3) = -i sqrt(0.56) (the + side of [2 -> 1/2] is below the axis)
    Complex a(0.5);
    Complex w0 = straight_cut_sqrt(Complex(0L), a, Complex(2.0));
    CHECK(abs(w0 + 1.0) < Real(1e-70));
    Complex wp = straight_cut_sqrt(Complex(1.3, -1e-30), a, Complex(2.0));
    Complex expect(Real(0L), -sqrt((Real(1.3) - 0.5) * (Real(2.0) - 1.3)));
    CHECK(abs(wp - expect) < Real(1e-25));
}

TEST_CASE("route_avoiding crosses only permitted arcs") {
    auto ctx = ctx256();
    TrajectoryConfig cfg;
    Complex a = normalize_parameter(fig_a());
    BuslaevCompact fc = BuslaevCompact::build(a, cfg, ctx);
    // from origin (D0) to far field (Dinf) crossing only Fm1
    std::array<bool, 4> may{false, true, false, false};
    auto path = route_avoiding(fc, Complex(0L), Complex(4.0, 0.5), may);
    int fm1 = 0, others = 0;
    for (size_t k = 0; k + 1 < path.size(); ++k) {
        fm1 += fc.crossings(path[k], path[k + 1], ArcLabel::Fm1);
        others += fc.crossings(path[k], path[k + 1], ArcLabel::Fp1) +
                  fc.crossings(path[k], path[k + 1], ArcLabel::Fa) +
                  fc.crossings(path[k], path[k + 1], ArcLabel::FaInv);
    }
    CHECK(others == 0);
    CHECK(fm1 % 2 == 1);
}
