#include "doctest.h"

#include "padelab/pade.hpp"
#include "padelab/szego_real.hpp"

using namespace padelab;

namespace {

PrecisionContext ctx256() { return PrecisionContext::install(256); }

struct Setup {
    PrecisionContext ctx;
    BuslaevCompact fc;
    RealModel model;
    Setup(const WeightSpec &spec, double a, long bits = 256)
        : ctx(PrecisionContext::install(bits)),
          fc(BuslaevCompact::build(Complex(a), TrajectoryConfig{}, ctx)),
          model(spec, fc, ctx) {}
};

}  // namespace

TEST_CASE("real model: w branch and phi basics") {
    Setup s(WeightSpec::markov(), 0.5);
    auto &m = s.model;
    CHECK(abs(m.w(Complex(0.5))) < Real(1e-70));
    CHECK(abs(m.w(Complex(0L)) + 1.0) < Real(1e-70));
    Complex zbig(1e6, 3e5);
    CHECK(abs(m.w(zbig) / zbig - 1.0) < Real(1e-5));
    CHECK(abs(m.phi(Complex(0L))) < Real(1e-70));
    // |phi| = 1 on the unit circle, sampled at 64 points
    Real worst(0L);
    for (int k = 0; k < 64; ++k) {
        Real theta = Real::pi() * 2.0 * Real(k) / Real(64L);
        worst = max(worst, abs(abs(m.phi(polar(Real(1L), theta))) - 1.0));
    }
    CHECK(worst < Real(1e-70));
    // trace products phi_+ phi_- = s and phi-hat likewise on the cut
    for (double x : {0.8, 1.3, 1.9}) {
        Complex s1 = m.phi_trace(Complex(x), +1) * m.phi_trace(Complex(x), -1);
        CHECK(abs(s1 - x) < Real(1e-70));
        Complex s2 = m.phi_hat_trace(Complex(x), +1) * m.phi_hat_trace(Complex(x), -1);
        CHECK(abs(s2 - x) < Real(1e-70));
    }
    CHECK(abs(m.phi_hat(Complex(0L))) < Real(1e-70));
}

TEST_CASE("szego D: constants, jump, normalization") {
    Setup s(WeightSpec::markov(), 0.5);
    auto &m = s.model;
    // h == 2: D = 2 inside, 1 outside
    CHECK(abs(m.D(Complex(0.2, 0.1)) - 2.0) < Real(1e-35));
    CHECK(abs(m.D(Complex(3.0, 1.0)) - 1.0) < Real(1e-35));
    CHECK(abs(m.D(Complex(1e8, 0.0)) - 1.0) < Real(1e-30));

    // h(s) = s + 3: D_+/D_- = h at s = 1, offset limits
    Setup sp(WeightSpec::polynomial(Polynomial({Complex(3L), Complex(1L)})), 0.5);
    Complex s1(1.0);
    Complex inward = sp.model.D(s1 * (1.0 - 1e-6));
    Complex outward = sp.model.D(s1 * (1.0 + 1e-6));
    CHECK(abs(inward / outward - sp.model.h(s1)) < Real(1e-4));
    CHECK(abs(sp.model.D(Complex(1e9, 0.0)) - 1.0) < Real(1e-25));
}

TEST_CASE("szego S: markov constant and trace product") {
    Setup s(WeightSpec::markov(), 0.5);
    auto &m = s.model;
    // h-hat == 2, S == sqrt 2 on both sides
    Real r2 = sqrt(Real(2L));
    CHECK(abs(m.S(Complex(0.2, 0.3)) - Complex(r2)) < Real(1e-35));
    CHECK(abs(m.S(Complex(4.0, -1.0)) - Complex(r2)) < Real(1e-35));
    CHECK(abs(m.S_infinity() - Complex(r2)) < Real(1e-35));
    CHECK(abs(m.h_hat(Complex(1.3)) - 2.0) < Real(1e-35));
    CHECK(abs(m.h_hat(Complex(0.8)) - 2.0) < Real(1e-35));

    // S_+ S_- = h-hat at s = 1.3 within 1e-4 (offset limits)
    Complex sp = m.S(Complex(1.3, 1e-6));
    Complex sm = m.S(Complex(1.3, -1e-6));
    CHECK(abs(sp * sm - m.h_hat(Complex(1.3))) < Real(1e-4));
}

TEST_CASE("szego S for the W1 sample weight") {
    Setup s(WeightSpec::sqrt_ratio(), 0.5);
    auto &m = s.model;
    // finite nonvanishing at infinity
    Complex si = m.S_infinity();
    CHECK(abs(si) > Real(0.1));
    CHECK(abs(si) < Real(10.0));
    // trace product S_+ S_- = h-hat on the cut
    Complex sp = m.S(Complex(1.42, 1e-6));
    Complex sm = m.S(Complex(1.42, -1e-6));
    CHECK(abs(sp * sm - m.h_hat(Complex(1.42))) < Real(1e-4) * abs(m.h_hat(Complex(1.42))));
    // D jump against h on the circle
    Real theta(2.1);
    Complex scirc = polar(Real(1L), theta);
    Complex din = m.D(scirc * (1.0 - 1e-7));
    Complex dout = m.D(scirc * (1.0 + 1e-7));
    CHECK(abs(din / dout - m.h(scirc)) < Real(1e-4) * abs(m.h(scirc)));
}

TEST_CASE("model jump relations on all arcs") {
    Setup s(WeightSpec::markov(), 0.5);
    auto &m = s.model;
    long n = 4;
    // Q_{n,+-}(s) = [s^n/h] R_{n,-+}(s) * {1 on Fa, -1 on Fainv, -+1 on F_{-b}}
    auto check_seg = [&](double x, Real factor) {
        Complex up(x, 1e-7), dn(x, -1e-7);
        // + side of the segment (oriented 1/a -> a, i.e. rightward-to-left) is
        // below the axis for a > 0
        Complex qplus = m.Q_model(n, dn), qminus = m.Q_model(n, up);
        Complex rplus = m.R_model(n, dn), rminus = m.R_model(n, up);
        Complex sn = pow(Complex(x), n);
        Complex hv = m.h(Complex(x));
        CHECK(abs(qplus - sn / hv * rminus * factor) < Real(1e-4) * abs(qplus));
        CHECK(abs(qminus - sn / hv * rplus * factor) < Real(1e-4) * abs(qminus));
    };
    check_seg(0.77, Real(1L));   // F_a (inside the disk)
    check_seg(1.55, Real(-1.0)); // F_{a^-1}
    // circle: Q_{n,+-} = [s^n/h] R_{n,-+} * (-+1); + side is the inside
    {
        Real theta(2.3);
        Complex ed = polar(Real(1L), theta);
        Complex zin = ed * (1.0 - 1e-7), zout = ed * (1.0 + 1e-7);
        Complex sn = pow(ed, n);
        Complex hv = m.h(ed);
        Complex lhs_plus = m.Q_model(n, zin);            // Q_+
        Complex rhs_plus = sn / hv * m.R_model(n, zout); // R_- with factor -1
        CHECK(abs(lhs_plus + rhs_plus) < Real(1e-4) * abs(lhs_plus));
        Complex lhs_minus = m.Q_model(n, zout);
        Complex rhs_minus = sn / hv * m.R_model(n, zin);
        CHECK(abs(lhs_minus - rhs_minus) < Real(1e-4) * abs(lhs_minus));
    }
    // starred models satisfy the same jumps
    {
        double x = 0.77;
        Complex up(x, 1e-7), dn(x, -1e-7);
        Complex sn = pow(Complex(x), n);
        Complex hv = m.h(Complex(x));
        Complex qsp = m.Qstar_model(n - 1, dn);
        Complex rsm = m.Rstar_model(n - 1, up);
        CHECK(abs(qsp - sn / hv * rsm) < Real(1e-4) * abs(qsp));
    }
}

TEST_CASE("gamma normalization against the infinity limits") {
    Setup s(WeightSpec::markov(), 0.5);
    auto &m = s.model;
    for (long n : {3L, 8L}) {
        auto g = m.normalize_gammas(n);
        // gamma_n Q_n(z) z^-n -> 1
        for (double r : {1e3, 1e6}) {
            Complex z(r, 0.3 * r);
            Complex q = g.gamma_n * m.Q_model(n, z) * pow(z, -n);
            CHECK(abs(q - 1.0) < Real(20.0 / r));
            Complex rs = g.gamma_star * pow(z, n - 1) * m.Rstar_model(n - 1, z);
            CHECK(abs(rs - 1.0) < Real(20.0 / r));
        }
    }
    // gamma ratio reflects the leading coefficient of phi
    auto g8 = m.normalize_gammas(8);
    auto g9 = m.normalize_gammas(9);
    Complex ratio = g9.gamma_n / g8.gamma_n;
    Complex kappa_inv = (sqrt(Real(0.5)) + sqrt(Real(2L))) / 2.0;
    CHECK(abs(ratio - kappa_inv) < Real(1e-60));
}

TEST_CASE("determinant of the model matrix is constant in z") {
    Setup s(WeightSpec::markov(), 0.5);
    auto &m = s.model;
    long n = 5;
    auto det_at = [&](const Complex &z) {
        Complex d = m.Q_model(n, z) * m.Rstar_model(n - 1, z) -
                    m.R_model(n, z) * m.Qstar_model(n - 1, z);
        return d / m.w(z);
    };
    Complex d1 = det_at(Complex(3.0, 1.0));
    Complex d2 = det_at(Complex(0.2, -0.1));
    Complex d3 = det_at(Complex(-4.0, 2.0));
    CHECK(abs(d1 - d2) < Real(1e-30) * abs(d1));
    CHECK(abs(d1 - d3) < Real(1e-30) * abs(d1));
    // the constant equals 1/(gamma_n gamma*_{n-1})
    auto g = m.normalize_gammas(n);
    CHECK(abs(d1 * g.gamma_n * g.gamma_star - 1.0) < Real(1e-30));
}

TEST_CASE("strong asymptotics anchor the gamma constants to pade data") {
    // the decisive consistency experiment: Q_n ~ gamma_n Q-model and
    // a_n Q*_{n-1} ~ gamma*_{n-1} Qstar-model
    Setup s(WeightSpec::markov(), 0.5, 320);
    auto &m = s.model;
    WeightOnCompact w(WeightSpec::markov(), s.fc, s.ctx);
    PowerSeriesPair pm = germ_markov_pair(Complex(0.5), 44);
    long n = 12;
    PadeApproximant ap = pade_solve(pm, n, n + 1, s.ctx);
    REQUIRE(ap.monic);
    auto g = m.normalize_gammas(n);
    Complex z(2.6, 1.2);
    Complex ratio_q = ap.Q.eval(z) / (g.gamma_n * m.Q_model(n, z));
    CHECK(abs(ratio_q - 1.0) < Real(1e-3));
    // w R_n / (gamma_n R-model) -> 1
    LinearizedError err{&ap, false, n};
    Complex rn = linearized_error_eval(err, z, w, s.ctx);
    Complex ratio_r = m.w(z) * rn / (g.gamma_n * m.R_model(n, z));
    CHECK(abs(ratio_r - 1.0) < Real(1e-3));
    // starred chain through a_n
    PadeApproximant star = pade_star(pm, n, s.ctx);
    auto an = a_n_compute(star, w, s.ctx);
    REQUIRE(!an.infinite);
    Complex ratio_s = an.value * star.Q.eval(z) / (g.gamma_star * m.Qstar_model(n - 1, z));
    CHECK(abs(ratio_s - 1.0) < Real(4e-3));
}

TEST_CASE("predicted error matches the measured pade error") {
    Setup s(WeightSpec::markov(), 0.5, 320);
    auto &m = s.model;
    WeightOnCompact w(WeightSpec::markov(), s.fc, s.ctx);
    PowerSeriesPair pm = germ_markov_pair(Complex(0.5), 44);
    long n = 10;
    PadeApproximant ap = pade_solve(pm, n, n + 1, s.ctx);
    Complex z(3.0);
    Complex measured = w.cauchy_transform(z) - ap.eval(z);
    Complex predicted = m.predicted_error(n, z);
    CHECK(abs(measured / predicted - 1.0) < Real(0.1));
    // decay factor sanity: |phi^2/z| < 1 in D0, |z/phi^2| < 1 in Dinf
    Complex z0(0.25, 0.2);
    CHECK(abs(m.phi(z0) * m.phi(z0) / z0) < Real(1L));
    Complex zi(4.0, 1.0);
    CHECK(abs(zi / (m.phi(zi) * m.phi(zi))) < Real(1L));
}

TEST_CASE("green function normalization and boundary") {
    Setup s(WeightSpec::markov(), 0.5);
    auto &m = s.model;
    // 2g(s) = log|s| boundary limit on the circle
    Complex sc = polar(Real(1L), Real(1.1)) * (1.0 + 1e-6);
    Real bdry = m.g(sc) * 2.0 - log(abs(sc));
    CHECK(abs(bdry) < Real(1e-4));
    // g - log|z| bounded at infinity
    Real g1 = m.g(Complex(1e3, 0.0)) - log(Real(1e3));
    Real g2 = m.g(Complex(1e6, 0.0)) - log(Real(1e6));
    CHECK(abs(g1 - g2) < Real(1e-2));
    // interior positivity of 2g - log|z|
    CHECK(m.g(Complex(0.3, 0.2)) * 2.0 - log(abs(Complex(0.3, 0.2))) > Real(0L));
    CHECK(m.g(Complex(2.5, 1.0)) * 2.0 - log(abs(Complex(2.5, 1.0))) > Real(0L));
}
