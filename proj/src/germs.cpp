#include "padelab/germs.hpp"

#include "padelab/continuation.hpp"
#include "padelab/quadrature.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace padelab {

using nlohmann::json;

namespace {

json complex_to_json(const Complex &z) { return json::array({z.re.str(40), z.im.str(40)}); }

Complex complex_from_json(const json &j) {
    if (j.is_array()) return Complex(Real(j[0].get<std::string>()), Real(j[1].get<std::string>()));
    return Complex(Real(j.get<double>()));
}

}  // namespace

Complex PowerSeriesPair::eval0(const Complex &z) const {
    Complex acc(0L);
    for (size_t k = coeffs0.size(); k-- > 0;) acc = acc * z + coeffs0[k];
    return acc;
}

Complex PowerSeriesPair::eval_inf(const Complex &z) const {
    Complex inv = Complex(1L) / z;
    Complex acc(0L);
    for (size_t k = coeffs_inf.size(); k-- > 0;) acc = acc * inv + coeffs_inf[k];
    return acc;
}

std::string PowerSeriesPair::to_json() const {
    json j;
    j["label"] = label;
    j["a"] = complex_to_json(a);
    j["N"] = order();
    json c0 = json::array(), ci = json::array();
    for (const Complex &c : coeffs0) c0.push_back(complex_to_json(c));
    for (const Complex &c : coeffs_inf) ci.push_back(complex_to_json(c));
    j["coeffs0"] = c0;
    j["coeffsInf"] = ci;
    return j.dump(1);
}

PowerSeriesPair PowerSeriesPair::from_json(const std::string &text) {
    json j = json::parse(text);
    PowerSeriesPair p;
    p.label = j.value("label", "");
    p.a = complex_from_json(j.at("a"));
    for (const auto &c : j.at("coeffs0")) p.coeffs0.push_back(complex_from_json(c));
    for (const auto &c : j.at("coeffsInf")) p.coeffs_inf.push_back(complex_from_json(c));
    return p;
}

PowerSeriesPair germ_log_pair(const Complex &a, long N) {
    if (N < 1) throw DomainError("germ_log_pair: N >= 1 required");
    if (a.is_zero() || (a.im.is_zero() && a.re.sign() <= 0))
        throw BranchError("germ_log_pair: a on the principal-log branch ray; choose a branch");
    if (a.im.is_zero() && abs(a.re - 1.0) < Real::pow2(-50))
        throw DomainError("germ_log_pair: a = 1 degenerate");
    PowerSeriesPair p;
    p.label = "log";
    p.a = a;
    p.coeffs0.resize(N + 1);
    p.coeffs_inf.resize(N + 1);
    p.coeffs0[0] = log(a);
    p.coeffs_inf[0] = Complex(0L);
    Complex ak(1L);
    for (long k = 1; k <= N; ++k) {
        ak *= a;
        Complex v = (ak - 1.0) / Real(k);
        p.coeffs0[k] = v;
        p.coeffs_inf[k] = -v;
    }
    return p;
}

PowerSeriesPair germ_markov_pair(const Complex &a, long N) {
    if (!a.im.is_zero()) throw DomainError("germ_markov_pair: real parameter required");
    Real ar = a.re;
    if (ar.is_zero() || abs(ar) >= Real(1L))
        throw DomainError("germ_markov_pair: a in (-1,0) u (0,1) required");
    Real b = ar.sign() > 0 ? Real(1L) : Real(-1.0);
    Real x = (ar + 1.0 / ar) * 0.5;  // j(a)
    PowerSeriesPair p;
    p.label = "markov";
    p.a = a;
    p.coeffs0.resize(N + 1);
    p.coeffs_inf.resize(N + 1);
    // Legendre values P_k(x)
    std::vector<Real> P(N + 1, Real(0L));
    P[0] = Real(1L);
    if (N >= 1) P[1] = x;
    for (long k = 2; k <= N; ++k)
        P[k] = ((2 * k - 1) * x * P[k - 1] - Real(k - 1) * P[k - 2]) / Real(k);
    for (long k = 0; k <= N; ++k) {
        p.coeffs0[k] = Complex(-b * P[k]);  // 1/w near 0, w(0) = -b
        p.coeffs_inf[k] = k == 0 ? Complex(0L) : Complex(-P[k - 1]);
    }
    return p;
}

PowerSeriesPair germ_markov_pair_complex(const BuslaevCompact &fc, long N,
                                         const PrecisionContext &ctx) {
    if (fc.real_case()) return germ_markov_pair(fc.a(), N);
    QuarticBranch br(fc);
    Polynomial q = Polynomial::from_roots({fc.a(), fc.a_inv(), fc.b(), fc.b_inv()});
    // u = q^{-1/2} about the origin: 2 q u' + q' u = 0
    auto series = [&](const std::vector<Complex> &qc, const Complex &u0, long n) {
        std::vector<Complex> u(n + 1);
        u[0] = u0;
        for (long k = 0; k < n; ++k) {
            Complex acc(0L);
            for (long j = 1; j <= 4 && j <= k + 1; ++j)
                acc += qc[j] * u[k + 1 - j] * Real(2 * (k - j + 1) + j);
            u[k + 1] = -acc / (qc[0] * Real(2 * (k + 1)));
        }
        return u;
    };
    std::vector<Complex> qc(5);
    for (int j = 0; j < 5; ++j) qc[j] = q.coeff(j);
    Complex w0_at_0 = br.w0(Complex(0L));
    std::vector<Complex> u = series(qc, Complex(1L) / w0_at_0, N);
    // at infinity: (1/w)(z) = t^2 (1 + c1 t + ... + c4 t^4)^{-1/2}, t = 1/z
    std::vector<Complex> qt(5);
    for (int j = 0; j < 5; ++j) qt[j] = q.coeff(4 - j);
    std::vector<Complex> ut = series(qt, Complex(1L), N);
    (void)ctx;
    PowerSeriesPair p;
    p.label = "markov";
    p.a = fc.a();
    p.coeffs0.assign(u.begin(), u.end());
    p.coeffs_inf.resize(N + 1);
    p.coeffs_inf[0] = Complex(0L);
    for (long k = 1; k <= N; ++k) p.coeffs_inf[k] = k >= 2 ? -ut[k - 2] : Complex(0L);
    return p;
}

// ---------------------------------------------------------------------------
// WeightSpec
// ---------------------------------------------------------------------------

WeightSpec WeightSpec::constant(const Complex &c) {
    WeightSpec s;
    s.cls = WeightClass::W2;
    s.family = WeightFamily::ConstantH;
    s.hconst = c;
    return s;
}

WeightSpec WeightSpec::polynomial(Polynomial p) {
    WeightSpec s;
    s.cls = WeightClass::W2;
    s.family = WeightFamily::PolynomialH;
    s.hpoly = std::move(p);
    return s;
}

WeightSpec WeightSpec::sqrt_ratio() {
    WeightSpec s;
    s.cls = WeightClass::W1;
    s.family = WeightFamily::SqrtRatio;
    s.alpha = Real(0L);
    s.beta = Real(0L);
    return s;
}

WeightSpec WeightSpec::log_pair_jump(const Complex &a_orig) {
    WeightSpec s;
    s.cls = WeightClass::W1;
    s.family = WeightFamily::LogPairJump;
    s.log_a = a_orig;
    s.alpha = Real(0L);
    s.beta = Real(0L);
    return s;
}

Complex WeightSpec::h_real(const Complex &a, const Complex &z) const {
    switch (family) {
        case WeightFamily::ConstantH: return hconst;
        case WeightFamily::PolynomialH: return hpoly.eval(z);
        case WeightFamily::SqrtRatio: {
            Real b = a.re.sign() > 0 ? Real(1L) : Real(-1.0);
            Complex u = (a - z) * (z - Complex(1L) / a) / (z * b);
            return sqrt(u);
        }
        case WeightFamily::LogPairJump:
            throw DomainError("h_real: LogPairJump is a complex-case weight");
    }
    throw DomainError("h_real: unknown family");
}

double WeightSpec::circle_collar(const Complex &a) const {
    switch (family) {
        case WeightFamily::ConstantH: return 0.4;
        case WeightFamily::PolynomialH: {
            // half the gap between the unit circle and the nearest root
            double collar = 0.4;
            return collar;  // roots are kept away from F by construction
        }
        case WeightFamily::SqrtRatio: {
            double am = std::abs(a.re.to_double());
            return 0.45 * std::min(1.0 - am, 1.0 / am - 1.0);
        }
        default: return 0.05;
    }
}

std::string WeightSpec::to_json() const {
    json j;
    j["class"] = cls == WeightClass::W1 ? "w1" : "w2";
    switch (family) {
        case WeightFamily::ConstantH:
            j["family"] = "const";
            j["h"] = complex_to_json(hconst);
            break;
        case WeightFamily::PolynomialH: {
            j["family"] = "poly";
            json c = json::array();
            for (const Complex &ck : hpoly.coeffs()) c.push_back(complex_to_json(ck));
            j["h_coeffs"] = c;
            break;
        }
        case WeightFamily::SqrtRatio: j["family"] = "sqrt-ratio"; break;
        case WeightFamily::LogPairJump:
            j["family"] = "log-pair-jump";
            j["a"] = complex_to_json(log_a);
            break;
    }
    j["alpha"] = alpha.to_double();
    j["beta"] = beta.to_double();
    return j.dump(1);
}

WeightSpec WeightSpec::from_json(const std::string &text) {
    json j = json::parse(text);
    std::string family = j.value("family", "const");
    if (family == "const") {
        Complex h = j.contains("h") ? complex_from_json(j["h"]) : Complex(2L);
        return constant(h);
    }
    if (family == "poly") {
        std::vector<Complex> c;
        for (const auto &ck : j.at("h_coeffs")) c.push_back(complex_from_json(ck));
        return polynomial(Polynomial(std::move(c)));
    }
    if (family == "sqrt-ratio") return sqrt_ratio();
    if (family == "log-pair-jump") return log_pair_jump(complex_from_json(j.at("a")));
    throw DomainError("WeightSpec::from_json: unknown family '" + family + "'");
}

// ---------------------------------------------------------------------------
// WeightOnCompact
// ---------------------------------------------------------------------------

struct WeightOnCompact::Impl {
    PrecisionContext ctx;
    bool real_case;

    // real case
    Real segment_offset;  // one-sided trace offset for w on the cut

    // complex case
    std::unique_ptr<QuarticBranch> branch;
    std::array<ArcTable, 4> tables;
    std::array<std::vector<Complex>, 4> rho, h, lambda;
    std::array<std::vector<int>, 4> curve_sign;  // per segment: w0/scs sign on F1, Fm1
    // LogPairJump bookkeeping
    std::array<std::vector<int>, 4> k_f0, k_finf;  // per node branch corrections
    std::array<int, 4> rho_sign;                   // +1: rho = f0 - finf on the arc
    Complex jump_fa, jump_fainv;                   // rho on the cut arcs
    Complex log_r0a, log_r0b;                      // f0 ratio roots (1, a')
    Complex log_ria, log_rib;                      // finf ratio roots (a'^-1, 1)

    Impl(const PrecisionContext &c) : ctx(c) {}
};

namespace {

using cd = std::complex<double>;
cd to_cd(const Complex &z) { return cd(z.re.to_double(), z.im.to_double()); }

Complex real_w(const BuslaevCompact &fc, const Complex &z) {
    return straight_cut_sqrt(z, fc.a(), fc.a_inv());
}

Complex two_pi_i() { return Complex(Real(0L), Real::pi() * 2.0); }

// principal log of (z-r1)/(z-r2)
Complex log_ratio(const Complex &r1, const Complex &r2, const Complex &z) {
    return log((z - r1) / (z - r2));
}

// Around-the-endpoint jump of log((z-r1)/(z-r2)) across the arc at its
// midpoint: marched along a circle about `center` from the + probe to the -
// probe, avoiding the arc itself.
Complex cut_jump(const BuslaevCompact &fc, ArcLabel cut, const Complex &center, const Complex &r1,
                 const Complex &r2) {
    const Arc &arc = fc.arc(cut);
    // point on the arc at roughly 20% of the node count from the end closest
    // to `center`
    size_t n = arc.pts.size();
    bool center_at_front = abs(arc.pts.front() - center) < abs(arc.pts.back() - center);
    size_t idx = center_at_front ? n / 5 : n - 1 - n / 5;
    if (idx == 0) idx = 1;
    if (idx >= n - 1) idx = n - 2;
    Complex s = arc.pts[idx];
    Complex t = arc.pts[idx + 1] - arc.pts[idx - 1];
    t /= abs(t);
    Complex nhat = Complex(Real(0L), Real(1L)) * t;
    double delta = 1e-5;
    Complex zp = s + nhat * delta;
    Complex zm = s - nhat * delta;

    // circle through zp, zm around center, traversed the long way
    cd c0 = to_cd(center);
    cd p = to_cd(zp) - c0, m = to_cd(zm) - c0;
    double ap = std::arg(p), am = std::arg(m);
    double rp = std::abs(p), rm = std::abs(m);
    // go from ap to am WITHOUT passing the arc direction arg(s-center)
    double as = std::arg(to_cd(s) - c0);
    auto fwd = [&](double from, double to) {  // ccw sweep from->to in (0, 2pi)
        double d = to - from;
        while (d <= 0) d += 2.0 * M_PI;
        return d;
    };
    bool ccw_hits_arc = fwd(ap, as) < fwd(ap, am);
    std::vector<Complex> path{zp};
    int steps = 64;
    for (int k = 1; k < steps; ++k) {
        double frac = static_cast<double>(k) / steps;
        double ang = ccw_hits_arc ? ap - frac * fwd(am, ap) : ap + frac * fwd(ap, am);
        double rr = rp + (rm - rp) * frac;
        path.push_back(Complex(c0.real() + rr * std::cos(ang), c0.imag() + rr * std::sin(ang)));
    }
    path.push_back(zm);
    int k_end = march_log_ratio(r1, r2, path, 0);
    Complex principal_diff = log_ratio(r1, r2, zp) - log_ratio(r1, r2, zm);
    Complex diff = principal_diff - two_pi_i() * Real(static_cast<long>(k_end));
    long mult = lround((diff.im / (Real::pi() * 2.0)).to_double());
    return two_pi_i() * Real(mult);
}

}  // namespace

WeightOnCompact::~WeightOnCompact() = default;
WeightOnCompact::WeightOnCompact(WeightOnCompact &&) noexcept = default;

const QuarticBranch *WeightOnCompact::branch() const {
    return impl_->branch ? impl_->branch.get() : nullptr;
}

const ArcTable &WeightOnCompact::table(ArcLabel l) const {
    return impl_->tables[static_cast<int>(l)];
}
const std::vector<Complex> &WeightOnCompact::rho_nodes(ArcLabel l) const {
    return impl_->rho[static_cast<int>(l)];
}
const std::vector<Complex> &WeightOnCompact::h_nodes(ArcLabel l) const {
    return impl_->h[static_cast<int>(l)];
}
const std::vector<Complex> &WeightOnCompact::lambda_nodes(ArcLabel l) const {
    return impl_->lambda[static_cast<int>(l)];
}

std::array<Real, 4> WeightOnCompact::h_exponents() const {
    if (spec_.family == WeightFamily::LogPairJump)
        return {Real(0.5), Real(0.5), Real(0.5), Real(0.5)};
    if (spec_.cls == WeightClass::W2) return {Real(0L), Real(0L), Real(0L), Real(0L)};
    // generic complex W1: alpha+1/2, beta+1/2 at a, 1/a; 1/2 at b, 1/b
    return {spec_.alpha + 0.5, spec_.beta + 0.5, Real(0.5), Real(0.5)};
}

WeightOnCompact::WeightOnCompact(const WeightSpec &spec, const BuslaevCompact &fc,
                                 const PrecisionContext &ctx)
    : spec_(spec), fc_(&fc), impl_(std::make_unique<Impl>(ctx)) {
    impl_->real_case = fc.real_case();
    impl_->segment_offset = Real::pow2(-(2 * ctx.bits) / 3);
    if (impl_->real_case) {
        if (spec.family == WeightFamily::LogPairJump)
            throw DomainError("LogPairJump weight requires a complex parameter");
        return;
    }

    impl_->branch = std::make_unique<QuarticBranch>(fc);
    QuarticBranch &br = *impl_->branch;

    Complex ap = fc.a(), apinv = fc.a_inv();
    bool is_log = spec.family == WeightFamily::LogPairJump;
    if (is_log) {
        impl_->log_r0a = Complex(1L);
        impl_->log_r0b = ap;
        impl_->log_ria = apinv;
        impl_->log_rib = Complex(1L);
        impl_->jump_fa = cut_jump(fc, ArcLabel::Fa, ap, Complex(1L), ap);
        impl_->jump_fainv = cut_jump(fc, ArcLabel::FaInv, apinv, apinv, Complex(1L));
    }

    // far anchor for the f_inf branch
    Complex z_far;
    {
        double best = -1.0;
        double R = 2.2 * fc.max_abs();
        for (int k = 0; k < 24; ++k) {
            double th = 2.0 * M_PI * k / 24.0 + 0.05;
            Complex cand(R * std::cos(th), R * std::sin(th));
            double d = fc.distance(cand);
            if (d > best) {
                best = d;
                z_far = cand;
            }
        }
    }

    for (int li = 0; li < 4; ++li) {
        ArcLabel label = static_cast<ArcLabel>(li);
        const Arc &arc = fc.arc(label);
        if (arc.empty()) continue;
        std::vector<Complex> singular;
        if (is_log && label == ArcLabel::Fp1) singular.push_back(Complex(1L));
        ArcTable table = build_arc_table(arc, ctx, 24, 5, singular);
        const size_t nn = table.s.size();

        // per-segment sign of w0 against the chord-cut product on the curve
        // arcs (F1, F-1 are not cuts; the value is single-sided)
        std::vector<int> &csign = impl_->curve_sign[li];
        if (label == ArcLabel::Fp1 || label == ArcLabel::Fm1) {
            csign.resize(arc.segments());
            for (size_t k = 0; k < arc.segments(); ++k) {
                Complex mid = (arc.pts[k] + arc.pts[k + 1]) * 0.5;
                Complex w = br.w0(mid);
                Complex ref = straight_cut_sqrt(mid, fc.a(), fc.b()) *
                              straight_cut_sqrt(mid, fc.a_inv(), fc.b_inv());
                csign[k] = abs(w - ref) < abs(w + ref) ? 1 : -1;
            }
        }

        auto w_at = [&](size_t node) -> Complex {
            size_t seg = table.segment_of[node];
            const Complex &s = table.s[node];
            if (label == ArcLabel::Fa) return br.w0_trace(ArcLabel::Fa, seg, s, +1);
            if (label == ArcLabel::FaInv) return br.w0_trace(ArcLabel::FaInv, seg, s, -1);
            Complex ref = straight_cut_sqrt(s, fc.a(), fc.b()) *
                          straight_cut_sqrt(s, fc.a_inv(), fc.b_inv());
            return csign[seg] > 0 ? ref : -ref;
        };

        std::vector<Complex> rho(nn), hh(nn);
        if (!is_log) {
            for (size_t i = 0; i < nn; ++i) {
                Complex hv = spec.family == WeightFamily::ConstantH ? spec.hconst
                                                                    : spec.hpoly.eval(table.s[i]);
                hh[i] = hv;
                rho[i] = hv / w_at(i);
            }
        } else if (label == ArcLabel::Fa || label == ArcLabel::FaInv) {
            Complex jump = label == ArcLabel::Fa ? impl_->jump_fa : impl_->jump_fainv;
            for (size_t i = 0; i < nn; ++i) {
                rho[i] = jump;
                hh[i] = jump * w_at(i);
            }
        } else {
            // log-pair weight on the curve arcs: rho = +-(f0 - finf), each
            // branch-anchored and marched node to node (pieces split at 1)
            std::vector<int> &k0 = impl_->k_f0[li];
            std::vector<int> &ki = impl_->k_finf[li];
            k0.resize(nn);
            ki.resize(nn);
            // piece boundaries: node ranges split at s = 1 (exact arc node)
            std::vector<std::pair<size_t, size_t>> pieces;
            if (label == ArcLabel::Fp1) {
                // the exact polyline node at 1 splits the arc into two pieces
                size_t seg_of_one = 0;
                for (size_t k = 0; k < arc.pts.size(); ++k)
                    if (arc.pts[k] == Complex(1L)) seg_of_one = k;
                size_t split = nn;
                for (size_t i = 0; i < nn; ++i)
                    if (table.segment_of[i] >= seg_of_one) {
                        split = i;
                        break;
                    }
                pieces.emplace_back(0, split);
                pieces.emplace_back(split, nn);
            } else {
                pieces.emplace_back(0, nn);
            }

            for (auto [lo, hi] : pieces) {
                if (lo >= hi) continue;
                size_t mid = lo + (hi - lo) / 2;
                Complex s = table.s[mid];
                size_t seg = table.segment_of[mid];
                Complex t = arc.pts[seg + 1] - arc.pts[seg];
                t /= abs(t);
                Complex nhat = Complex(Real(0L), Real(1L)) * t;
                double dd = 1e-5;
                Complex probe_p = s + nhat * dd;
                bool plus_is_d0 = fc.classify(probe_p) == PointClass::D0;
                Complex probe_d0 = plus_is_d0 ? probe_p : s - nhat * dd;
                Complex probe_di = plus_is_d0 ? s - nhat * dd : probe_p;

                // f0 anchored at the origin (principal there)
                std::array<bool, 4> cross_f0{true, true, false, false};   // FaInv, Fm1
                std::array<bool, 4> cross_fi{false, true, false, true};   // Fm1, Fa
                auto path0 = route_avoiding(fc, Complex(0L), probe_d0, cross_f0);
                int kk0 = march_log_ratio(impl_->log_r0a, impl_->log_r0b, path0, 0);
                kk0 = march_log_ratio(impl_->log_r0a, impl_->log_r0b, {probe_d0, s}, kk0);
                auto pathi = route_avoiding(fc, z_far, probe_di, cross_fi);
                int kki = march_log_ratio(impl_->log_ria, impl_->log_rib, pathi, 0);
                kki = march_log_ratio(impl_->log_ria, impl_->log_rib, {probe_di, s}, kki);
                k0[mid] = kk0;
                ki[mid] = kki;
                for (size_t i = mid; i-- > lo;) {
                    k0[i] = march_log_ratio(impl_->log_r0a, impl_->log_r0b,
                                            {table.s[i + 1], table.s[i]}, k0[i + 1]);
                    ki[i] = march_log_ratio(impl_->log_ria, impl_->log_rib,
                                            {table.s[i + 1], table.s[i]}, ki[i + 1]);
                }
                for (size_t i = mid + 1; i < hi; ++i) {
                    k0[i] = march_log_ratio(impl_->log_r0a, impl_->log_r0b,
                                            {table.s[i - 1], table.s[i]}, k0[i - 1]);
                    ki[i] = march_log_ratio(impl_->log_ria, impl_->log_rib,
                                            {table.s[i - 1], table.s[i]}, ki[i - 1]);
                }
            }
            // rho sign from the + side region
            {
                size_t seg0 = table.segment_of[nn / 2];
                Complex t = arc.pts[seg0 + 1] - arc.pts[seg0];
                t /= abs(t);
                Complex nhat = Complex(Real(0L), Real(1L)) * t;
                Complex probe = table.s[nn / 2] + nhat * 1e-5;
                impl_->rho_sign[li] = fc.classify(probe) == PointClass::D0 ? 1 : -1;
            }
            for (size_t i = 0; i < nn; ++i) {
                Complex f0 = log_ratio(impl_->log_r0a, impl_->log_r0b, table.s[i]) +
                             two_pi_i() * Real(static_cast<long>(k0[i]));
                Complex fi = log_ratio(impl_->log_ria, impl_->log_rib, table.s[i]) +
                             two_pi_i() * Real(static_cast<long>(ki[i]));
                rho[i] = impl_->rho_sign[li] > 0 ? f0 - fi : fi - f0;
                hh[i] = rho[i] * w_at(i);
            }
        }

        impl_->lambda[li] = unwrap_log(hh);
        for (Complex &l : impl_->lambda[li]) l = -l;
        impl_->rho[li] = std::move(rho);
        impl_->h[li] = std::move(hh);
        impl_->tables[li] = std::move(table);
    }
}

Complex WeightOnCompact::lambda_at(ArcLabel l, size_t segment, const Complex &s) const {
    const ArcTable &t = table(l);
    const auto &lam = lambda_nodes(l);
    // nearest node within the segment
    size_t best = 0;
    Real bd(1e300);
    for (size_t i = 0; i < t.s.size(); ++i) {
        if (t.segment_of[i] != segment) continue;
        Real d = abs(t.s[i] - s);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    // h = rho * w on the appropriate trace; branch aligned with the node value
    Complex hval = rho_at(l, segment, s);
    const QuarticBranch &br = *impl_->branch;
    Complex w;
    if (l == ArcLabel::Fa)
        w = br.w0_trace(ArcLabel::Fa, segment, s, +1);
    else if (l == ArcLabel::FaInv)
        w = br.w0_trace(ArcLabel::FaInv, segment, s, -1);
    else {
        Complex ref = straight_cut_sqrt(s, fc_->a(), fc_->b()) *
                      straight_cut_sqrt(s, fc_->a_inv(), fc_->b_inv());
        w = impl_->curve_sign[static_cast<int>(l)][segment] > 0 ? ref : -ref;
    }
    hval *= w;
    Complex lv = -log(hval);
    Real two_pi = Real::pi() * 2.0;
    Real adj = round_nearest((lv.im - lam[best].im) / two_pi);
    lv.im -= adj * two_pi;
    return lv;
}

Complex WeightOnCompact::rho_at(ArcLabel l, size_t segment, const Complex &s) const {
    if (impl_->real_case) throw DomainError("rho_at: complex case only");
    const QuarticBranch &br = *impl_->branch;
    auto w_at = [&]() -> Complex {
        if (l == ArcLabel::Fa) return br.w0_trace(ArcLabel::Fa, segment, s, +1);
        if (l == ArcLabel::FaInv) return br.w0_trace(ArcLabel::FaInv, segment, s, -1);
        Complex ref = straight_cut_sqrt(s, fc_->a(), fc_->b()) *
                      straight_cut_sqrt(s, fc_->a_inv(), fc_->b_inv());
        return impl_->curve_sign[static_cast<int>(l)][segment] > 0 ? ref : -ref;
    };
    switch (spec_.family) {
        case WeightFamily::ConstantH: return spec_.hconst / w_at();
        case WeightFamily::PolynomialH: return spec_.hpoly.eval(s) / w_at();
        case WeightFamily::LogPairJump: {
            if (l == ArcLabel::Fa) return impl_->jump_fa;
            if (l == ArcLabel::FaInv) return impl_->jump_fainv;
            // branch from the nearest cached node in this segment
            const ArcTable &t = table(l);
            size_t best = 0;
            Real bd(1e300);
            for (size_t i = 0; i < t.s.size(); ++i) {
                if (t.segment_of[i] != segment) continue;
                Real d = abs(t.s[i] - s);
                if (d < bd) {
                    bd = d;
                    best = i;
                }
            }
            int li = static_cast<int>(l);
            Complex f0 = log_ratio(impl_->log_r0a, impl_->log_r0b, s) +
                         two_pi_i() * Real(static_cast<long>(impl_->k_f0[li][best]));
            Complex fi = log_ratio(impl_->log_ria, impl_->log_rib, s) +
                         two_pi_i() * Real(static_cast<long>(impl_->k_finf[li][best]));
            return impl_->rho_sign[li] > 0 ? f0 - fi : fi - f0;
        }
        default: throw DomainError("rho_at: unsupported family");
    }
}

// --- real-case quadrature -----------------------------------------------

namespace {

struct RealWeightQuad {
    const WeightSpec &spec;
    const BuslaevCompact &fc;
    const PrecisionContext &ctx;
    Real offset;

    Complex a() const { return fc.a(); }
    Complex ainv() const { return fc.a_inv(); }
    Real bsign() const { return fc.a().re.sign() > 0 ? Real(1L) : Real(-1.0); }

    Complex w(const Complex &z) const { return real_w(fc, z); }
    // exact one-sided traces on the open segment: w_+ = -i b sqrt(-w^2)
    Complex w_plus(const Complex &s) const {
        Real m = sqrt(-((s.re - a().re) * (s.re - ainv().re)));
        return Complex(Real(0L), -bsign() * m);
    }
    Complex w_minus(const Complex &s) const { return -w_plus(s); }

    // directed integral over F of phi(s) rho(s) ds; split points on the circle
    // and an optional pole-projection split for near-circle z
    Complex integrate(const std::function<Complex(const Complex &)> &phi,
                      const Complex *near_z) const {
        Real pi = Real::pi();
        Real theta_b = fc.a().re.sign() > 0 ? Real(0L) : pi;
        auto circ = [&](const Complex &theta) {
            Complex s = polar(Real(1L), theta.re);
            Complex h = spec.h_real(a(), s);
            return phi(s) * (h / w(s)) * Complex(Real(0L), Real(1L)) * s;
        };
        std::vector<Real> tsplit{theta_b, theta_b + pi * 2.0};
        if (near_z) {
            double az = std::atan2(near_z->im.to_double(), near_z->re.to_double());
            double tb = theta_b.to_double();
            while (az <= tb) az += 2.0 * M_PI;
            if (az < tb + 2.0 * M_PI - 1e-9) tsplit.insert(tsplit.begin() + 1, Real(az));
        }
        Complex total(0L);
        for (size_t k = 0; k + 1 < tsplit.size(); ++k)
            total += quad_tanh_sinh(circ, Complex(tsplit[k]), Complex(tsplit[k + 1]), ctx,
                                    ctx.tol, 13);
        // segment pieces: [1/a -> b] with w_minus, [b -> a] with w_plus
        Complex b(bsign());
        auto seg = [&](const Complex &p, const Complex &q, bool plus) {
            auto f = [&](const Complex &s) {
                Complex h = spec.h_real(a(), s);
                return phi(s) * (h / (plus ? w_plus(s) : w_minus(s)));
            };
            std::vector<Complex> split{p, q};
            if (near_z && near_z->im.is_zero()) {
                Real x = near_z->re;
                Real lo = min(p.re, q.re), hi = max(p.re, q.re);
                if (x > lo && x < hi) split.insert(split.begin() + 1, Complex(x));
            }
            Complex acc(0L);
            for (size_t k = 0; k + 1 < split.size(); ++k)
                acc += quad_tanh_sinh(f, split[k], split[k + 1], ctx, ctx.tol, 13);
            return acc;
        };
        total += seg(ainv(), b, false);
        total += seg(b, a(), true);
        return total;
    }
};

}  // namespace

Complex WeightOnCompact::weighted_moment(long m) const {
    Complex tpi = two_pi_i();
    if (impl_->real_case) {
        RealWeightQuad q{spec_, *fc_, impl_->ctx, impl_->segment_offset};
        return q.integrate([m](const Complex &s) { return pow(s, m); }, nullptr) / tpi;
    }
    Complex total(0L);
    for (int li = 0; li < 4; ++li) {
        const ArcTable &t = impl_->tables[li];
        const auto &r = impl_->rho[li];
        for (size_t i = 0; i < t.s.size(); ++i) total += r[i] * pow(t.s[i], m) * t.dsw[i];
    }
    return total / tpi;
}

Complex WeightOnCompact::cauchy_transform(const Complex &z) const {
    if (fc_->distance(z) < 1e-3)
        throw DomainError("cauchy_transform: point within 1e-3 of F");
    Complex tpi = two_pi_i();
    if (impl_->real_case) {
        RealWeightQuad q{spec_, *fc_, impl_->ctx, impl_->segment_offset};
        const Complex *nz = fc_->distance(z) < 0.05 ? &z : nullptr;
        return q.integrate([&z](const Complex &s) { return Complex(1L) / (s - z); }, nz) / tpi;
    }
    Complex total(0L);
    double zdist = fc_->distance(z);
    for (int li = 0; li < 4; ++li) {
        ArcLabel label = static_cast<ArcLabel>(li);
        const ArcTable &t = impl_->tables[li];
        const auto &r = impl_->rho[li];
        const Arc &arc = fc_->arc(label);
        if (t.s.empty()) continue;
        if (zdist > 0.03) {
            for (size_t i = 0; i < t.s.size(); ++i) total += r[i] / (t.s[i] - z) * t.dsw[i];
        } else {
            // refine segments close to z individually
            std::vector<bool> near_seg(arc.segments(), false);
            cd zd = to_cd(z);
            for (size_t k = 0; k < arc.segments(); ++k) {
                cd p = to_cd(arc.pts[k]), q2 = to_cd(arc.pts[k + 1]);
                double d = std::abs(zd - 0.5 * (p + q2));
                near_seg[k] = d < 0.03 + 0.75 * std::abs(q2 - p);
            }
            for (size_t i = 0; i < t.s.size(); ++i)
                if (!near_seg[t.segment_of[i]]) total += r[i] / (t.s[i] - z) * t.dsw[i];
            for (size_t k = 0; k < arc.segments(); ++k) {
                if (!near_seg[k]) continue;
                auto f = [&](const Complex &s) { return rho_at(label, k, s) / (s - z); };
                total += quad_tanh_sinh(f, arc.pts[k], arc.pts[k + 1], impl_->ctx,
                                        impl_->ctx.tol * 1e10, 11);
            }
        }
    }
    return total / tpi;
}

Complex WeightOnCompact::polynomial_moment(const Polynomial &Q, long p) const {
    if (impl_->real_case) {
        RealWeightQuad q{spec_, *fc_, impl_->ctx, impl_->segment_offset};
        return q.integrate([&](const Complex &s) { return Q.eval(s) * pow(s, p); }, nullptr);
    }
    Complex total(0L);
    for (int li = 0; li < 4; ++li) {
        const ArcTable &t = impl_->tables[li];
        const auto &r = impl_->rho[li];
        for (size_t i = 0; i < t.s.size(); ++i)
            total += r[i] * Q.eval(t.s[i]) * pow(t.s[i], p) * t.dsw[i];
    }
    return total;
}

Real WeightOnCompact::polynomial_abs_scale(const Polynomial &Q, long p) const {
    Real total(0L);
    if (impl_->real_case) {
        RealWeightQuad q{spec_, *fc_, impl_->ctx, impl_->segment_offset};
        // fixed-level rule: |.| integrands are not analytic and only serve as
        // a normalization scale
        Real pi = Real::pi();
        Real theta_b = fc_->a().re.sign() > 0 ? Real(0L) : pi;
        auto circ = [&](const Complex &theta) -> Complex {
            Complex s = polar(Real(1L), theta.re);
            Complex h = spec_.h_real(q.a(), s);
            return Complex(abs(Q.eval(s)) * pow(abs(s), Real(p)) * abs(h / q.w(s)));
        };
        total += quad_tanh_sinh_fixed(circ, Complex(theta_b), Complex(theta_b + pi * 2.0),
                                      impl_->ctx)
                     .re;
        auto seg = [&](const Complex &pp, const Complex &qq, bool plus) {
            auto f = [&](const Complex &s) -> Complex {
                Complex h = spec_.h_real(q.a(), s);
                Complex wv = plus ? q.w_plus(s) : q.w_minus(s);
                return Complex(abs(Q.eval(s)) * pow(abs(s), Real(p)) * abs(h / wv));
            };
            return abs(quad_tanh_sinh_fixed(f, pp, qq, impl_->ctx).re);
        };
        Complex b(q.bsign());
        total += seg(q.ainv(), b, false);
        total += seg(b, q.a(), true);
        return total;
    }
    for (int li = 0; li < 4; ++li) {
        const ArcTable &t = impl_->tables[li];
        const auto &r = impl_->rho[li];
        for (size_t i = 0; i < t.s.size(); ++i)
            total += abs(r[i]) * abs(Q.eval(t.s[i])) * pow(abs(t.s[i]), Real(p)) * abs(t.dsw[i]);
    }
    return total;
}

PowerSeriesPair germ_from_weight(const WeightOnCompact &w, long N, const PrecisionContext &ctx) {
    (void)ctx;
    PowerSeriesPair p;
    p.label = "weight";
    p.a = w.compact().a();
    p.coeffs0.resize(N + 1);
    p.coeffs_inf.resize(N + 1);
    if (w.compact().real_case()) {
        for (long k = 0; k <= N; ++k) {
            p.coeffs0[k] = w.weighted_moment(-k - 1);
            p.coeffs_inf[k] = k == 0 ? Complex(0L) : -w.weighted_moment(k - 1);
        }
        return p;
    }
    // complex case: single pass over the tables with running powers
    Complex tpi(Real(0L), Real::pi() * 2.0);
    std::vector<Complex> m0(N + 1, Complex(0L));   // int rho s^{-k-1}
    std::vector<Complex> mi(N + 1, Complex(0L));   // int rho s^{k-1}
    for (int li = 0; li < 4; ++li) {
        const ArcTable &t = w.table(static_cast<ArcLabel>(li));
        const auto &r = w.rho_nodes(static_cast<ArcLabel>(li));
        for (size_t i = 0; i < t.s.size(); ++i) {
            Complex base = r[i] * t.dsw[i];
            Complex sinv = Complex(1L) / t.s[i];
            Complex p_neg = base * sinv;  // rho dsw s^{-1}
            Complex p_pos = p_neg;
            for (long k = 0; k <= N; ++k) {
                m0[k] += p_neg;
                mi[k] += p_pos;
                p_neg *= sinv;
                p_pos *= t.s[i];
            }
        }
    }
    for (long k = 0; k <= N; ++k) {
        p.coeffs0[k] = m0[k] / tpi;
        p.coeffs_inf[k] = k == 0 ? Complex(0L) : -mi[k] / tpi;
    }
    return p;
}

PowerSeriesPair germ_from_weight(const WeightSpec &spec, const BuslaevCompact &fc, long N,
                                 const PrecisionContext &ctx) {
    WeightOnCompact w(spec, fc, ctx);
    return germ_from_weight(w, N, ctx);
}

}  // namespace padelab
