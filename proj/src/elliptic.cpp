#include "padelab/elliptic.hpp"

#include "padelab/continuation.hpp"
#include "padelab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

namespace padelab {

namespace {

using cd = std::complex<double>;
cd to_cd(const Complex &z) { return cd(z.re.to_double(), z.im.to_double()); }

Complex two_pi_i() { return Complex(Real(0L), Real::pi() * 2.0); }

}  // namespace

struct SurfaceModel::Impl {
    explicit Impl(const PrecisionContext &c) : ctx(c) {}

    PrecisionContext ctx;
    const WeightOnCompact *wgt = nullptr;
    const BuslaevCompact *fc = nullptr;
    std::unique_ptr<QuarticBranch> branch;

    int flip_alpha = 1, flip_beta = 1;
    Real quad_tol = Real(0L);  // padded: endpoint singularities cap accuracy near 2^-(bits/2)
    Complex omega, tau, Bq, Cnorm;
    Real imag_defect = Real(0L);
    Complex c0_inf;    // C_{inf^1} kernel is (s + c0) ds / w
    Complex lambdaH;   // (1/2pi i) cycle integral of lambda_h H over Delta
    Complex abel_inf_[2], abel_zero_[2];
    Complex phi_inf0, kappa_phi;
    Complex sh_inf1;
    Real riemann_residual = Real(0L);

    // per-arc, per-segment w-sign caches for direct (non-table) evaluation
    std::array<std::vector<int>, 4> seg_sign;

    struct Anchor {
        Complex z;
        Complex IN[2], IH_raw[2];  // per starting sheet; IH_raw excludes C
    };
    Anchor anchor[2];  // region 0 = D0, 1 = Dinf

    // JIP grid
    struct GridNode {
        Complex z;
        int sheet;
        Complex IH_raw;
        bool valid = false;
    };
    std::vector<GridNode> grid;
    bool grid_ready = false;
    long grid_m = 44;
    std::map<long, JIPSolution> jip_cache;
    Real jip_eps = Real(0L);

    // ---- branch on arcs -------------------------------------------------

    Complex scs_pair(const Complex &z) const {
        return straight_cut_sqrt(z, fc->a(), fc->b()) *
               straight_cut_sqrt(z, fc->a_inv(), fc->b_inv());
    }

    void build_seg_signs() {
        for (int li = 0; li < 4; ++li) {
            ArcLabel l = static_cast<ArcLabel>(li);
            const Arc &arc = fc->arc(l);
            auto &sg = seg_sign[li];
            sg.resize(arc.segments());
            for (size_t k = 0; k < arc.segments(); ++k) {
                Complex mid = (arc.pts[k] + arc.pts[k + 1]) * 0.5;
                Complex ref = scs_pair(mid);
                Complex w;
                if (l == ArcLabel::Fa)
                    w = branch->w0_trace(l, k, mid, +1);
                else if (l == ArcLabel::FaInv)
                    w = branch->w0_trace(l, k, mid, +1);
                else
                    w = branch->w0(mid);
                sg[k] = abs(w - ref) < abs(w + ref) ? 1 : -1;
            }
        }
    }

    // cycle value of w on arc segment: + trace on the cut arcs (bank value),
    // sheet-0 value on the curve arcs
    Complex arc_w(ArcLabel l, size_t seg, const Complex &s) const {
        Complex ref = scs_pair(s);
        return seg_sign[static_cast<int>(l)][seg] > 0 ? ref : -ref;
    }

    // ---- cycle integrals over the traced polylines ----------------------

    // integral over the stored arc of g(s, w_arc(s)) ds, adaptive per segment
    Complex arc_integral(ArcLabel l,
                         const std::function<Complex(const Complex &, const Complex &)> &g,
                         const Real &tol) const {
        const Arc &arc = fc->arc(l);
        Complex total(0L);
        for (size_t k = 0; k < arc.segments(); ++k) {
            auto f = [&](const Complex &s) { return g(s, arc_w(l, k, s)); };
            total += quad_tanh_sinh(f, arc.pts[k], arc.pts[k + 1], ctx, tol, 10);
        }
        return total;
    }

    // cycle integral (odd-in-w integrands): alpha/gamma/delta carry +2, beta
    // carries -2 on its + bank; flips for (alpha, beta) applied
    Complex cycle_integral(ArcLabel l,
                           const std::function<Complex(const Complex &, const Complex &)> &g,
                           const Real &tol) const {
        Complex base = arc_integral(l, g, tol) * 2.0;
        if (l == ArcLabel::FaInv) base = -base * Real(static_cast<long>(flip_beta));
        if (l == ArcLabel::Fp1) base = base * Real(static_cast<long>(flip_alpha));
        return base;
    }

    // ---- table-based Delta sums (weight caches) --------------------------

    // sum over all four cycles of lambda_h * K(s) / w ds, with the uniform
    // trace value w = h/rho; K receives the node
    Complex delta_lambda_sum(const std::function<Complex(const Complex &)> &K) const {
        Complex total(0L);
        for (int li = 0; li < 4; ++li) {
            ArcLabel l = static_cast<ArcLabel>(li);
            const ArcTable &t = wgt->table(l);
            const auto &rho = wgt->rho_nodes(l);
            const auto &h = wgt->h_nodes(l);
            const auto &lam = wgt->lambda_nodes(l);
            Complex part(0L);
            for (size_t i = 0; i < t.s.size(); ++i)
                part += lam[i] * K(t.s[i]) * (rho[i] / h[i]) * t.dsw[i];
            part = part * 2.0;
            if (l == ArcLabel::FaInv) part = -part * Real(static_cast<long>(flip_beta));
            if (l == ArcLabel::Fp1) part = part * Real(static_cast<long>(flip_alpha));
            total += part;
        }
        return total;
    }

    // same sum with per-segment refinement near z (for trace evaluations)
    Complex delta_lambda_cauchy(const Complex &z, const Complex &wz) const {
        double zdist = fc->distance(z);
        Complex total(0L);
        for (int li = 0; li < 4; ++li) {
            ArcLabel l = static_cast<ArcLabel>(li);
            const ArcTable &t = wgt->table(l);
            const auto &rho = wgt->rho_nodes(l);
            const auto &h = wgt->h_nodes(l);
            const auto &lam = wgt->lambda_nodes(l);
            const Arc &arc = fc->arc(l);
            Complex part(0L);
            if (zdist > 0.02) {
                for (size_t i = 0; i < t.s.size(); ++i)
                    part += lam[i] * (wz / (t.s[i] - z)) * (rho[i] / h[i]) * t.dsw[i];
            } else {
                std::vector<bool> near_seg(arc.segments(), false);
                cd zd = to_cd(z);
                for (size_t k = 0; k < arc.segments(); ++k) {
                    cd pa = to_cd(arc.pts[k]), pb = to_cd(arc.pts[k + 1]);
                    near_seg[k] = std::abs(zd - 0.5 * (pa + pb)) < 0.02 + 0.75 * std::abs(pb - pa);
                }
                for (size_t i = 0; i < t.s.size(); ++i)
                    if (!near_seg[t.segment_of[i]])
                        part += lam[i] * (wz / (t.s[i] - z)) * (rho[i] / h[i]) * t.dsw[i];
                for (size_t k = 0; k < arc.segments(); ++k) {
                    if (!near_seg[k]) continue;
                    auto f = [&](const Complex &s) {
                        Complex lv = wgt->lambda_at(l, k, s);
                        // h = rho * w_used; the ratio rho/h is 1/w_used
                        return lv * (wz / (s - z)) / arc_w_for_weight(l, k, s);
                    };
                    // split at the projection of z so the near-pole sits at a
                    // piece endpoint
                    const Complex &pa = arc.pts[k];
                    const Complex &pb = arc.pts[k + 1];
                    cd pad = to_cd(pa), pbd = to_cd(pb), zd2 = to_cd(z);
                    cd dd = pbd - pad;
                    double tt = std::clamp(((zd2 - pad).real() * dd.real() +
                                            (zd2 - pad).imag() * dd.imag()) /
                                               std::norm(dd),
                                           0.0, 1.0);
                    if (tt > 1e-6 && tt < 1.0 - 1e-6) {
                        Complex mid = pa + (pb - pa) * Real(tt);
                        part += quad_tanh_sinh_soft(f, pa, mid, ctx, Real(1e-12), 9);
                        part += quad_tanh_sinh_soft(f, mid, pb, ctx, Real(1e-12), 9);
                    } else {
                        part += quad_tanh_sinh_soft(f, pa, pb, ctx, Real(1e-12), 9);
                    }
                }
            }
            part = part * 2.0;
            if (l == ArcLabel::FaInv) part = -part * Real(static_cast<long>(flip_beta));
            if (l == ArcLabel::Fp1) part = part * Real(static_cast<long>(flip_alpha));
            total += part;
        }
        return total;
    }

    // trace value matching the weight's rho convention (w_used = h/rho)
    Complex arc_w_for_weight(ArcLabel l, size_t seg, const Complex &s) const {
        if (l == ArcLabel::Fa) return branch->w0_trace(l, seg, s, +1);
        if (l == ArcLabel::FaInv) return branch->w0_trace(l, seg, s, -1);
        return arc_w(l, seg, s);
    }

    // alpha-period of the Cauchy kernel part for C_z
    Complex alpha_cauchy_period(const Complex &z, const Complex &wz) const {
        const ArcTable &t = wgt->table(ArcLabel::Fp1);
        const auto &rho = wgt->rho_nodes(ArcLabel::Fp1);
        const auto &h = wgt->h_nodes(ArcLabel::Fp1);
        Complex part(0L);
        for (size_t i = 0; i < t.s.size(); ++i)
            part += (wz / (t.s[i] - z)) * (rho[i] / h[i]) * t.dsw[i];
        return part * 2.0 * Real(static_cast<long>(flip_alpha));
    }

    // ---- surface legs ----------------------------------------------------

    struct LegResult {
        Complex IN, IH_raw;
        int sheet_end;
    };

    // integrate the Nuttall differential and ds/w along [p, q] starting on
    // sheet k; crossings of F_a toggle the sheet, crossings of F_1 or
    // F_{a^-1} are path errors
    LegResult leg(const Complex &p, const Complex &q, int sheet, const Real &tol,
                  bool with_N = true) const {
        if (fc->crossings(p, q, ArcLabel::Fp1) > 0 || fc->crossings(p, q, ArcLabel::FaInv) > 0)
            throw PathError("surface leg crosses a homology cut");
        // F_a crossing parameters
        std::vector<double> ts;
        const Arc &fa = fc->arc(ArcLabel::Fa);
        cd pd = to_cd(p), qd = to_cd(q);
        for (size_t k = 0; k + 1 < fa.pts.size(); ++k) {
            cd r = to_cd(fa.pts[k]), s2 = to_cd(fa.pts[k + 1]);
            cd d1 = qd - pd, d2 = s2 - r;
            double denom = d1.real() * d2.imag() - d1.imag() * d2.real();
            if (std::abs(denom) < 1e-300) continue;
            double t = ((r - pd).real() * d2.imag() - (r - pd).imag() * d2.real()) / denom;
            double u = ((r - pd).real() * d1.imag() - (r - pd).imag() * d1.real()) / denom;
            if (t > 1e-12 && t < 1.0 - 1e-12 && u >= 0.0 && u < 1.0) ts.push_back(t);
        }
        std::sort(ts.begin(), ts.end());
        ts.push_back(1.0);

        LegResult res;
        res.IN = Complex(0L);
        res.IH_raw = Complex(0L);
        int k = sheet;
        double t0 = 0.0;
        Complex b = fc->b(), binv = fc->b_inv();
        Complex K = b + binv - fc->a() - fc->a_inv();
        for (double te : ts) {
            Complex pa = p + (q - p) * Real(t0);
            Complex pb = p + (q - p) * Real(te);
            Real sgn = k == 0 ? Real(1L) : Real(-1.0);
            auto fN = [&](const Complex &s) {
                Complex w = branch->w0(s) * sgn;
                Complex P = (s - b) * (s - binv);
                // (1 - P/w)/(2s) = K P / (2 w (w + P)); pick the
                // cancellation-free branch
                Complex wm = w - P, wp = w + P;
                if (abs(wp) >= abs(wm)) return K * P / (w * wp * 2.0);
                return wm / (s * w * 2.0);
            };
            auto fH = [&](const Complex &s) { return Complex(1L) / (branch->w0(s) * sgn); };
            Real tol_eff = max(tol, quad_tol);
            if (with_N) res.IN += quad_tanh_sinh_soft(fN, pa, pb, ctx, tol_eff, 11);
            res.IH_raw += quad_tanh_sinh_soft(fH, pa, pb, ctx, tol_eff, 11);
            if (te < 1.0) k = 1 - k;
            t0 = te;
        }
        res.sheet_end = k;
        return res;
    }

    // multi-leg path integrals from a plane point (starting sheet given)
    LegResult path(const std::vector<Complex> &pts, int sheet, const Real &tol,
                   bool with_N = true) const {
        LegResult acc;
        acc.IN = Complex(0L);
        acc.IH_raw = Complex(0L);
        acc.sheet_end = sheet;
        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            LegResult r = leg(pts[i], pts[i + 1], acc.sheet_end, tol, with_N);
            acc.IN += r.IN;
            acc.IH_raw += r.IH_raw;
            acc.sheet_end = r.sheet_end;
        }
        return acc;
    }

    double leg_clearance() const {
        double sep = 1e300;
        auto eps = fc->endpoints();
        for (size_t i = 0; i < eps.size(); ++i)
            for (size_t j = i + 1; j < eps.size(); ++j)
                sep = std::min(sep, std::abs(to_cd(eps[i]) - to_cd(eps[j])));
        return 0.25 * sep;
    }

    // library integrals from the ramification point over a to (z, sheet)
    void lift(const Complex &z, int sheet, Complex &IN, Complex &IH_raw,
              bool with_N = true) const {
        int region = fc->classify(z) == PointClass::D0 ? 0 : 1;
        const Anchor &an = anchor[region];
        std::array<bool, 4> may{false, true, false, true};  // Fm1, Fa
        std::vector<Complex> route = route_avoiding(*fc, an.z, z, may, leg_clearance());
        // parity of Fa crossings decides the starting sheet at the anchor
        int parity = 0;
        for (size_t i = 0; i + 1 < route.size(); ++i)
            parity += fc->crossings(route[i], route[i + 1], ArcLabel::Fa);
        int start_sheet = (sheet + parity) % 2;
        LegResult r = path(route, start_sheet, ctx.tol, with_N);
        if (r.sheet_end != sheet) throw PathError("lift: sheet bookkeeping failed");
        IN = with_N ? an.IN[start_sheet] + r.IN : Complex(0L);
        IH_raw = an.IH_raw[start_sheet] + r.IH_raw;
    }

    // tail integrals from |z| = R to infinity along the outward ray
    void tail_to_infinity(const Complex &zR, int sheet, Complex &dIN_reg, Complex &dIH_raw) const {
        // substitute s = zR / t, t from 1 to 0
        Real sgn = sheet == 0 ? Real(1L) : Real(-1.0);
        Complex b = fc->b(), binv = fc->b_inv();
        Complex K = b + binv - fc->a() - fc->a_inv();
        auto fH = [&](const Complex &t) {
            Complex s = zR / t;
            Complex w = branch->w0(s) * sgn;
            // ds = -zR dt / t^2
            return -zR / (t * t) / w;
        };
        // Nuttall minus the pole part on sheet 1; rationalized form, stable
        // along the whole tail: (1-v)/2s [- 1/s] = +-K P/(2 w0 (w0 + P))
        auto fN = [&](const Complex &t) {
            Complex s = zR / t;
            Complex w0v = branch->w0(s);
            Complex P = (s - b) * (s - binv);
            Complex integrand = K * P / (w0v * (w0v + P) * 2.0);
            if (sheet == 1) integrand = -integrand;
            return integrand * (-zR / (t * t));
        };
        dIH_raw = quad_tanh_sinh(fH, Complex(1L), Complex(0L), ctx, quad_tol, 11);
        dIN_reg = quad_tanh_sinh(fN, Complex(1L), Complex(0L), ctx, quad_tol, 11);
    }

    Complex theta_sum(const Complex &u, int deriv) const {
        // reduce u into the fundamental cell
        Real im_b = Bq.im;
        Real m = round_nearest(u.im / im_b);
        Complex up = u - Bq * Complex(m);
        Real j = round_nearest(up.re);
        up.re -= j;
        long mi = m.to_long();
        // theta(u) = exp(-pi i B m^2 - 2 pi i u' m) theta(u')
        Complex tpi = two_pi_i();
        Complex pre = exp(Complex(0L) - tpi * 0.5 * Bq * Complex(Real(static_cast<long>(mi) *
                                                                      static_cast<long>(mi))) -
                          tpi * up * Complex(Real(mi)));
        // truncated lattice sum
        long N = 4;
        Real lg_tol = log(ctx.tol);
        while (true) {
            Real tail = -Real::pi() * im_b * Real(N) * Real(N) +
                        Real::pi() * 2.0 * abs(up.im) * Real(N);
            if (tail < lg_tol || N > 512) break;
            ++N;
        }
        Complex s0(0L), s1(0L);
        for (long k = -N; k <= N; ++k) {
            Complex term = exp(tpi * 0.5 * Bq * Complex(Real(k * k)) + tpi * up * Complex(Real(k)));
            s0 += term;
            if (deriv) s1 += term * tpi * Complex(Real(k));
        }
        if (!deriv) return pre * s0;
        // d/du theta(u) = pre' theta(u') + pre theta'(u') with pre' = -2pi i m pre
        return pre * (s1 - tpi * Complex(Real(mi)) * s0);
    }
};

SurfaceModel::~SurfaceModel() = default;

const BuslaevCompact &SurfaceModel::compact() const { return impl_->fc ? *impl_->fc : weight_->compact(); }

Complex SurfaceModel::omega() const { return impl_->omega; }
Complex SurfaceModel::tau() const { return impl_->tau; }
Complex SurfaceModel::B() const { return impl_->Bq; }
Complex SurfaceModel::C_norm() const { return impl_->Cnorm; }
Real SurfaceModel::period_imag_defect() const { return impl_->imag_defect; }
Real SurfaceModel::riemann_relation_residual() const { return impl_->riemann_residual; }
Complex SurfaceModel::lambda_H_integral() const { return impl_->lambdaH; }

Complex SurfaceModel::w_at(const SurfacePoint &p) const {
    Complex w = impl_->branch->w0(p.z);
    return p.sheet == 0 ? w : -w;
}

Complex SurfaceModel::theta(const Complex &u) const { return impl_->theta_sum(u, 0); }
Complex SurfaceModel::theta_deriv(const Complex &u) const { return impl_->theta_sum(u, 1); }

Complex SurfaceModel::abel(const SurfacePoint &p) const {
    Complex IN, IH;
    impl_->lift(p.z, p.sheet, IN, IH);
    return impl_->Cnorm * IH;
}

Complex SurfaceModel::Phi(const SurfacePoint &p) const {
    Complex IN, IH;
    impl_->lift(p.z, p.sheet, IN, IH);
    return sqrt(impl_->fc->a()) * exp(IN);
}

Complex SurfaceModel::A_sigma(const Complex &sigma, const SurfacePoint &p) const {
    return exp(Complex(0L) - two_pi_i() * sigma * abel(p));
}

Complex SurfaceModel::S_h(const SurfacePoint &p) const {
    Complex wz = w_at(p);
    Complex t1 = impl_->delta_lambda_cauchy(p.z, wz);
    Complex pa = impl_->alpha_cauchy_period(p.z, wz);
    Complex total = t1 - pa * impl_->lambdaH * two_pi_i();
    return exp(total / (two_pi_i() * 2.0));
}

Complex SurfaceModel::abel_infinity(int sheet) const { return impl_->abel_inf_[sheet]; }
Complex SurfaceModel::abel_zero(int sheet) const { return impl_->abel_zero_[sheet]; }
Complex SurfaceModel::Phi_infinity0() const { return impl_->phi_inf0; }
Complex SurfaceModel::Phi_leading_coeff() const { return impl_->kappa_phi; }

Complex SurfaceModel::S_h_infinity(int sheet) const {
    return sheet == 1 ? impl_->sh_inf1 : Complex(1L) / impl_->sh_inf1;
}

SurfacePoint SurfaceModel::lift_Q(const Complex &z) const {
    return {z, impl_->fc->classify(z) == PointClass::D0 ? 0 : 1};
}
SurfacePoint SurfaceModel::lift_R(const Complex &z) const {
    return {z, impl_->fc->classify(z) == PointClass::D0 ? 1 : 0};
}

Real SurfaceModel::g(const Complex &z) const { return log(abs(Phi(lift_Q(z)))); }

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

SurfaceModel::SurfaceModel(const WeightOnCompact &weight, const PrecisionContext &ctx)
    : weight_(&weight), impl_(std::make_unique<Impl>(ctx)) {
    Impl &im = *impl_;
    im.wgt = &weight;
    im.fc = &weight.compact();
    if (im.fc->real_case()) throw DomainError("SurfaceModel: complex parameter required");
    im.branch = std::make_unique<QuarticBranch>(*im.fc);
    im.quad_tol = ctx.tol * Real::pow2(16);
    im.build_seg_signs();

    const BuslaevCompact &fc = *im.fc;
    Complex b = fc.b(), binv = fc.b_inv();

    // raw cycle integrals (flip factors not yet fixed: use +1 baseline)
    auto gN = [&](const Complex &s, const Complex &w) {
        Complex v = (s - b) * (s - binv) / w;
        return (Complex(0L) - v) / (s * 2.0);  // odd part of the Nuttall density
    };
    auto gH = [&](const Complex &s, const Complex &w) { return Complex(1L) / w; };
    auto gSH = [&](const Complex &s, const Complex &w) { return s / w; };

    Real ptol = im.quad_tol;
    Complex A1 = im.arc_integral(ArcLabel::Fp1, gH, ptol) * 2.0;          // alpha period of ds/w
    Complex A1s = im.arc_integral(ArcLabel::Fp1, gSH, ptol) * 2.0;        // alpha period of s ds/w
    Complex Bb = im.arc_integral(ArcLabel::FaInv, gH, ptol) * (-2.0);     // beta period of ds/w
    Complex Na = im.arc_integral(ArcLabel::Fp1, gN, ptol) * 2.0;          // alpha period of N
    Complex Nb = im.arc_integral(ArcLabel::FaInv, gN, ptol) * (-2.0);     // beta period of N

    im.c0_inf = -(A1s / A1);  // flip-independent

    // anchors
    {
        auto pick = [&](bool inner) {
            double best = -1.0;
            Complex out;
            double rin = 0.45 * fc.min_abs(), rout = 1.6 * fc.max_abs();
            for (int k = 0; k < 48; ++k) {
                double th = 2.0 * M_PI * k / 48.0 + 0.031;
                Complex cand(std::cos(th) * (inner ? rin : rout),
                             std::sin(th) * (inner ? rin : rout));
                if ((fc.classify(cand) == PointClass::D0) != inner) continue;
                double d = fc.distance(cand);
                if (d > best) {
                    best = d;
                    out = cand;
                }
            }
            if (best < 0) throw GeometryError("SurfaceModel: no anchor candidate");
            return out;
        };
        im.anchor[0].z = pick(true);
        im.anchor[1].z = pick(false);
        std::array<bool, 4> may{false, true, false, true};
        for (int region = 0; region < 2; ++region) {
            Complex from = fc.a();
            Complex to = im.anchor[region].z;
            std::vector<Complex> route = route_avoiding(fc, from, to, may, im.leg_clearance());
            int parity = 0;
            for (size_t i = 0; i + 1 < route.size(); ++i)
                parity += fc.crossings(route[i], route[i + 1], ArcLabel::Fa);
            for (int target_sheet = 0; target_sheet < 2; ++target_sheet) {
                int start = (target_sheet + parity) % 2;
                Impl::LegResult r = im.path(route, start, ctx.tol);
                im.anchor[region].IN[r.sheet_end] = r.IN;
                im.anchor[region].IH_raw[r.sheet_end] = r.IH_raw;
            }
        }
    }

    // at-infinity raw data (both sheets) and at-zero
    Complex IN_tail[2], IH_tail[2];
    {
        Complex zR = im.anchor[1].z;
        for (int sheet = 0; sheet < 2; ++sheet) {
            Complex dIN, dIH;
            im.tail_to_infinity(zR, sheet, dIN, dIH);
            IN_tail[sheet] = im.anchor[1].IN[sheet] + dIN;   // regularized on sheet 1
            IH_tail[sheet] = im.anchor[1].IH_raw[sheet] + dIH;
        }
    }
    Complex IH_zero[2], IN_zero0;
    {
        for (int sheet = 0; sheet < 2; ++sheet) {
            Complex IN, IH;
            im.lift(Complex(0L), sheet, IN, IH, false);
            IH_zero[sheet] = IH;
            if (sheet == 0) IN_zero0 = IN;
        }
    }
    (void)IN_zero0;

    // resolve the orientation flips: Im B > 0, Riemann relation, and the
    // Abel-map jumps across alpha and beta
    {
        auto reduce_residual = [&](const Complex &x, const Complex &Bv) {
            Real mm = round_nearest(x.im / Bv.im);
            Complex r = x - Bv * Complex(mm);
            r.re -= round_nearest(r.re);
            return abs(r);
        };
        // probe pairs across mid-alpha and mid-beta
        auto probe_pair = [&](ArcLabel l, Complex &pp, Complex &pm) {
            const Arc &arc = fc.arc(l);
            size_t k = arc.segments() / 2;
            Complex mid = (arc.pts[k] + arc.pts[k + 1]) * 0.5;
            Complex t = arc.pts[k + 1] - arc.pts[k];
            t /= abs(t);
            Complex nh = Complex(Real(0L), Real(1L)) * t;
            pp = mid + nh * 1e-6;
            pm = mid - nh * 1e-6;
        };
        Complex ap, amn, bp, bm;
        probe_pair(ArcLabel::Fp1, ap, amn);
        probe_pair(ArcLabel::FaInv, bp, bm);
        Complex IN_d, IH_ap, IH_am, IH_bp, IH_bm;
        im.lift(ap, 0, IN_d, IH_ap);
        im.lift(amn, 0, IN_d, IH_am);
        im.lift(bp, 0, IN_d, IH_bp);
        im.lift(bm, 0, IN_d, IH_bm);

        int best_fa = 0, best_fb = 0;
        int count = 0;
        Real best_score(1e300);
        for (int fa : {1, -1}) {
            for (int fb : {1, -1}) {
                Complex C = Complex(1L) / (A1 * Real(static_cast<long>(fa)));
                Complex Bv = C * Bb * Real(static_cast<long>(fb));
                if (Bv.im.sign() <= 0) continue;
                Complex om = -(Complex(Real(static_cast<long>(fb))) * Nb) / two_pi_i();
                Complex ta = (Complex(Real(static_cast<long>(fa))) * Na) / two_pi_i();
                Complex lhs = C * (IH_tail[1] - IH_zero[1]);
                Real rres = reduce_residual(lhs - (om + Bv * ta), Bv);
                // abel jumps
                Complex ja = C * (IH_ap - IH_am);
                Complex jb = C * (IH_bp - IH_bm);
                Real jra = min(reduce_residual(ja - Bv, Bv), reduce_residual(ja + Bv, Bv));
                (void)jra;
                Real score = rres;
                if (rres < Real(1e-8)) {
                    ++count;
                    if (score < best_score) {
                        best_score = score;
                        best_fa = fa;
                        best_fb = fb;
                    }
                }
            }
        }
        if (count == 0) throw GeometryError("SurfaceModel: no consistent cycle orientation");
        im.flip_alpha = best_fa;
        im.flip_beta = best_fb;
        im.Cnorm = Complex(1L) / (A1 * Real(static_cast<long>(best_fa)));
        im.Bq = im.Cnorm * Bb * Real(static_cast<long>(best_fb));
        im.omega = -(Complex(Real(static_cast<long>(best_fb))) * Nb) / two_pi_i();
        im.tau = (Complex(Real(static_cast<long>(best_fa))) * Na) / two_pi_i();
        im.imag_defect = max(abs(im.omega.im), abs(im.tau.im));
        im.riemann_residual =
            reduce_residual(im.Cnorm * (IH_tail[1] - IH_zero[1]) - (im.omega + im.Bq * im.tau),
                            im.Bq);
    }

    // library determinations with the resolved C
    im.abel_inf_[0] = im.Cnorm * IH_tail[0];
    im.abel_inf_[1] = im.Cnorm * IH_tail[1];
    im.abel_zero_[0] = im.Cnorm * IH_zero[0];
    im.abel_zero_[1] = im.Cnorm * IH_zero[1];

    // Phi constants
    im.phi_inf0 = sqrt(fc.a()) * exp(IN_tail[0]);
    {
        // kappa = lim Phi(z^(1))/z = sqrt(a) exp(IN_reg(inf^1) - log-ray term)
        Complex zR = im.anchor[1].z;
        Complex logzR = log(zR);
        im.kappa_phi = sqrt(fc.a()) * exp(IN_tail[1] - logzR);
    }

    // lambda_h cycle integral and S_h at infinity
    im.lambdaH = im.delta_lambda_sum([&](const Complex &) { return im.Cnorm; }) / two_pi_i();
    {
        Complex c0 = im.c0_inf;
        Complex t1 = im.delta_lambda_sum([&](const Complex &s) { return s + c0; });
        im.sh_inf1 = exp(t1 / (two_pi_i() * 2.0));
    }
}

// ---------------------------------------------------------------------------
// Jacobi inversion
// ---------------------------------------------------------------------------

namespace {

// lattice reduction u -> u - j - B m with integers chosen to center u
void lattice_reduce(const Complex &u, const Complex &B, long &j, long &m, Complex &reduced) {
    Real mm = round_nearest(u.im / B.im);
    m = mm.to_long();
    Complex r = u - B * Complex(mm);
    Real jj = round_nearest(r.re);
    j = jj.to_long();
    r.re -= jj;
    reduced = r;
}

}  // namespace

const SurfaceModel::JIPSolution &SurfaceModel::jip(long n, const Real &eps) {
    Impl &im = *impl_;
    auto it = im.jip_cache.find(n);
    if (it != im.jip_cache.end()) return it->second;

    const BuslaevCompact &fc = *im.fc;
    if (!im.grid_ready) {
        // chordal-uniform two-sheet grid with Abel data flood-filled from the
        // anchors
        long M = im.grid_m;
        std::vector<Complex> zs;
        for (long i = 0; i < M; ++i) {
            double psi = M_PI * (i + 0.5) / (M + 1);
            double r = std::tan(psi / 2.0);
            for (long k = 0; k < M; ++k) {
                double th = 2.0 * M_PI * k / M + 0.013;
                zs.push_back(Complex(r * std::cos(th), r * std::sin(th)));
            }
        }
        long NP = static_cast<long>(zs.size());
        im.grid.assign(2 * NP, Impl::GridNode{});
        auto node_at = [&](long idx, int sheet) -> Impl::GridNode & {
            return im.grid[static_cast<size_t>(2 * idx + sheet)];
        };
        for (long i = 0; i < NP; ++i)
            for (int sh = 0; sh < 2; ++sh) {
                node_at(i, sh).z = zs[i];
                node_at(i, sh).sheet = sh;
            }
        // BFS over grid adjacency (ring graph in each radius row + radial)
        auto plane_ok = [&](long idx) { return fc.distance(zs[idx]) > 0.02; };
        std::vector<long> queue;
        auto seed = [&](int region) {
            // nearest valid grid point to the anchor
            long bi = -1;
            double bd = 1e300;
            for (long i = 0; i < NP; ++i) {
                if (!plane_ok(i)) continue;
                if ((fc.classify(zs[i]) == PointClass::D0) != (region == 0)) continue;
                double d = std::abs(to_cd(zs[i]) - to_cd(im.anchor[region].z));
                if (d < bd) {
                    bd = d;
                    bi = i;
                }
            }
            if (bi < 0) return;
            for (int sh = 0; sh < 2; ++sh) {
                try {
                    Complex IN, IH;
                    im.lift(zs[bi], sh, IN, IH);
                    node_at(bi, sh).IH_raw = IH;
                    node_at(bi, sh).valid = true;
                    queue.push_back(2 * bi + sh);
                } catch (const Error &) {
                }
            }
        };
        seed(0);
        seed(1);
        auto neighbors = [&](long idx) {
            long i = idx / M, k = idx % M;
            std::vector<long> out;
            out.push_back(i * M + (k + 1) % M);
            out.push_back(i * M + (k + M - 1) % M);
            if (i > 0) out.push_back((i - 1) * M + k);
            if (i + 1 < M) out.push_back((i + 1) * M + k);
            return out;
        };
        Real leg_tol = im.ctx.tol;
        for (size_t qi = 0; qi < queue.size(); ++qi) {
            long cur = queue[qi];
            long idx = cur / 2;
            int sh = static_cast<int>(cur % 2);
            const Impl::GridNode &me = node_at(idx, sh);
            for (long nb : neighbors(idx)) {
                if (!plane_ok(nb) || !plane_ok(idx)) continue;
                if (fc.crossings(zs[idx], zs[nb], ArcLabel::Fp1) > 0 ||
                    fc.crossings(zs[idx], zs[nb], ArcLabel::FaInv) > 0)
                    continue;
                int parity = fc.crossings(zs[idx], zs[nb], ArcLabel::Fa) % 2;
                int sh_nb = (sh + parity) % 2;
                Impl::GridNode &other = node_at(nb, sh_nb);
                if (other.valid) continue;
                try {
                    Impl::LegResult r = im.leg(zs[idx], zs[nb], sh, leg_tol);
                    if (r.sheet_end != sh_nb) continue;
                    other.IH_raw = me.IH_raw + r.IH_raw;
                    other.valid = true;
                    queue.push_back(2 * nb + sh_nb);
                } catch (const Error &) {
                }
            }
        }
        im.grid_ready = true;
    }

    JIPSolution sol;
    sol.n = n;
    sol.eps = eps;
    Complex half_cell = (Complex(1L) + im.Bq) * 0.5;

    auto solve_one = [&](const Complex &rhs, SurfacePoint &zp, long &jj, long &mm,
                         Complex &abel_val) {
        Complex target;
        long j0, m0;
        lattice_reduce(rhs, im.Bq, j0, m0, target);
        // theta-zero scan over the cached grid plus the infinity nodes
        Real best(1e300);
        Complex best_IH;
        SurfacePoint best_p{Complex(0L), 0};
        bool found = false;
        for (const auto &nd : im.grid) {
            if (!nd.valid) continue;
            Complex u = im.Cnorm * nd.IH_raw - target - half_cell;
            Real v = abs(impl_->theta_sum(u, 0));
            if (v < best) {
                best = v;
                best_p = {nd.z, nd.sheet};
                best_IH = nd.IH_raw;
                found = true;
            }
        }
        for (int sh = 0; sh < 2; ++sh) {
            Complex u = im.abel_inf_[sh] - target - half_cell;
            Real v = abs(impl_->theta_sum(u, 0));
            if (v < best) {
                best = v;
                best_p = {Complex(1e9, 1e9), sh};  // marker: at infinity
                best_IH = im.abel_inf_[sh] / im.Cnorm;
                found = true;
            }
        }
        if (!found) throw GeometryError("jip: empty scan grid");

        // Newton refinement in the plane coordinate (or 1/z near infinity)
        Complex z = best_p.z;
        int sheet = best_p.sheet;
        Complex IH = best_IH;
        bool at_inf = std::abs(to_cd(z)) > 1e8;
        double Rbig = 12.0 * fc.max_abs();
        for (int iter = 0; iter < 80; ++iter) {
            Complex u = im.Cnorm * IH - target - half_cell;
            Complex tv = impl_->theta_sum(u, 0);
            Complex td = impl_->theta_sum(u, 1);
            if (abs(tv) < Real::pow2(-im.ctx.bits + 40)) break;
            if (at_inf || std::abs(to_cd(z)) > Rbig) {
                // t = 1/z coordinate: da/dt = -C (-1)^sheet (1 + O(t))
                Complex t = at_inf ? Complex(0L) : Complex(1L) / z;
                Complex dadt = -im.Cnorm * (sheet == 0 ? Complex(1L) : Complex(-1.0));
                Complex step = tv / (td * dadt);
                Complex tnew = t - step;
                // refresh IH by the tail from the reference |z| = anchor ray
                Complex znew = tnew.is_zero() ? Complex(1e30, 0.0) : Complex(1L) / tnew;
                if (abs(znew) < Real(Rbig) * 0.5) {
                    // walked back into the finite chart
                    try {
                        Complex IN2, IH2;
                        im.lift(znew, sheet, IN2, IH2);
                        z = znew;
                        IH = IH2;
                        at_inf = false;
                        continue;
                    } catch (const Error &) {
                        break;
                    }
                }
                // integrate H along the ray between 1/t and 1/tnew on the sheet
                auto fH = [&](const Complex &tt) {
                    Complex s = Complex(1L) / tt;
                    Complex w = im.branch->w0(s) * (sheet == 0 ? Real(1L) : Real(-1.0));
                    return -Complex(1L) / (tt * tt) / w;
                };
                Complex dIH = t.is_zero() || tnew.is_zero()
                                  ? Complex(0L)
                                  : quad_tanh_sinh(fH, t, tnew, im.ctx, im.ctx.tol, 9);
                if (t.is_zero()) {
                    // start from the infinity value and integrate from 0 to tnew
                    dIH = quad_tanh_sinh(fH, Complex(Real(1e-40)), tnew, im.ctx, im.ctx.tol, 9);
                    IH = im.abel_inf_[sheet] / im.Cnorm + dIH;
                } else if (tnew.is_zero()) {
                    IH = im.abel_inf_[sheet] / im.Cnorm;
                } else {
                    IH += dIH;
                }
                z = znew;
                at_inf = tnew.is_zero();
            } else {
                Complex w = im.branch->w0(z) * (sheet == 0 ? Real(1L) : Real(-1.0));
                Complex dadz = im.Cnorm / w;
                Complex step = tv / (td * dadz);
                // damp against arc crossings of the forbidden cycles
                for (int halves = 0; halves < 24; ++halves) {
                    Complex znew = z - step;
                    if (fc.crossings(z, znew, ArcLabel::Fp1) == 0 &&
                        fc.crossings(z, znew, ArcLabel::FaInv) == 0 &&
                        fc.distance(znew) > 1e-9) {
                        try {
                            Impl::LegResult r = im.leg(z, znew, sheet, im.ctx.tol);
                            IH += r.IH_raw;
                            sheet = r.sheet_end;
                            z = znew;
                            break;
                        } catch (const Error &) {
                        }
                    }
                    step = step * 0.5;
                }
            }
        }
        zp = {z, sheet};
        abel_val = im.Cnorm * IH;
        // integers of the inversion: abel = rhs + j + B m
        Complex mu = abel_val - rhs;
        long jr, mr;
        Complex red;
        lattice_reduce(mu, im.Bq, jr, mr, red);
        jj = jr;
        mm = mr;
        return abs(red);
    };

    Complex base = im.abel_inf_[0] - im.lambdaH + Complex(static_cast<long>(n)) * (im.omega + im.Bq * im.tau);
    Real res1 = solve_one(base, sol.z_n, sol.j_n, sol.m_n, sol.abel_z_n);
    Complex base_star = im.abel_inf_[0] * 2.0 - im.abel_zero_[1] - im.lambdaH +
                        Complex(static_cast<long>(n)) * (im.omega + im.Bq * im.tau);
    Real res2 = solve_one(base_star, sol.z_n_star, sol.j_n_star, sol.m_n_star, sol.abel_z_n_star);
    sol.residual = max(res1, res2);

    // N_eps membership: chordal distance to infinity on sheet 1
    bool near_inf1 = sol.z_n.sheet == 1;
    Real chordal = 2.0 / sqrt(1.0 + norm(sol.z_n.z));
    sol.in_N_eps = !(near_inf1 && chordal < eps);
    im.jip_eps = eps;
    auto res = im.jip_cache.emplace(n, std::move(sol));
    return res.first->second;
}

Complex SurfaceModel::theta_quotient(const Complex &abel_p, const SurfacePoint &z) const {
    Complex u = abel(z);
    Complex half_cell = (Complex(1L) + impl_->Bq) * 0.5;
    return impl_->theta_sum(u - abel_p - half_cell, 0) /
           impl_->theta_sum(u - impl_->abel_inf_[0] - half_cell, 0);
}

Complex SurfaceModel::Theta_n(const JIPSolution &sol, const SurfacePoint &z) const {
    return theta_quotient(sol.abel_z_n, z);
}

Complex SurfaceModel::Psi_n(const JIPSolution &sol, const SurfacePoint &z) const {
    Impl &im = *impl_;
    Complex IN, IH;
    im.lift(z.z, z.sheet, IN, IH);
    Complex u = im.Cnorm * IH;
    Complex half_cell = (Complex(1L) + im.Bq) * 0.5;
    Complex phi_n = exp(IN * Real(sol.n)) * pow(sqrt(im.fc->a()), sol.n);
    Complex sigma = im.tau * Real(sol.n) + Complex(Real(sol.m_n));
    Complex a_factor = exp(Complex(0L) - two_pi_i() * sigma * u);
    Complex theta_fac = im.theta_sum(u - sol.abel_z_n - half_cell, 0) /
                        im.theta_sum(u - im.abel_inf_[0] - half_cell, 0);
    Complex sh = S_h(z);
    return phi_n * a_factor * sh * theta_fac;
}

Complex SurfaceModel::Psi_n_star(const JIPSolution &sol, const SurfacePoint &z) const {
    Impl &im = *impl_;
    Complex IN, IH;
    im.lift(z.z, z.sheet, IN, IH);
    Complex u = im.Cnorm * IH;
    Complex half_cell = (Complex(1L) + im.Bq) * 0.5;
    Complex phi_n = exp(IN * Real(sol.n)) * pow(sqrt(im.fc->a()), sol.n);
    Complex sigma = im.tau * Real(sol.n) + Complex(Real(sol.m_n_star));
    Complex a_factor = exp(Complex(0L) - two_pi_i() * sigma * u);
    Complex th0 = im.theta_sum(u - im.abel_zero_[1] - half_cell, 0) /
                  im.theta_sum(u - im.abel_inf_[0] - half_cell, 0);
    Complex ths = im.theta_sum(u - sol.abel_z_n_star - half_cell, 0) /
                  im.theta_sum(u - im.abel_inf_[0] - half_cell, 0);
    Complex sh = S_h(z);
    return phi_n * a_factor * sh * th0 * ths;
}

Complex SurfaceModel::gamma_n(const JIPSolution &sol) const {
    Impl &im = *impl_;
    Complex half_cell = (Complex(1L) + im.Bq) * 0.5;
    Complex u = im.abel_inf_[1];
    Complex sigma = im.tau * Real(sol.n) + Complex(Real(sol.m_n));
    Complex a_factor = exp(Complex(0L) - two_pi_i() * sigma * u);
    Complex theta_fac = im.theta_sum(u - sol.abel_z_n - half_cell, 0) /
                        im.theta_sum(u - im.abel_inf_[0] - half_cell, 0);
    Complex lead = pow(im.kappa_phi, sol.n) * a_factor * im.sh_inf1 * theta_fac;
    return Complex(1L) / lead;
}

Complex SurfaceModel::gamma_star(const JIPSolution &sol_prev) const {
    Impl &im = *impl_;
    Complex half_cell = (Complex(1L) + im.Bq) * 0.5;
    Complex u = im.abel_inf_[0];
    // lim z^{-1} theta_quotient(p; z^(0)) at infinity on sheet 0
    Complex denom_lin = im.theta_sum(Complex(0L) - half_cell, 1) * (-im.Cnorm);
    auto L = [&](const Complex &abel_p) {
        return im.theta_sum(u - abel_p - half_cell, 0) / denom_lin;
    };
    Complex sigma = im.tau * Real(sol_prev.n) + Complex(Real(sol_prev.m_n_star));
    Complex a_factor = exp(Complex(0L) - two_pi_i() * sigma * u);
    Complex lead = pow(im.phi_inf0, sol_prev.n) * a_factor * S_h_infinity(0) *
                   L(im.abel_zero_[1]) * L(sol_prev.abel_z_n_star);
    return Complex(-1.0) / lead;
}

SurfaceModel::ModelValues SurfaceModel::model_QR(long n, const Real &eps, const Complex &z) {
    const JIPSolution &sol = jip(n, eps);
    if (!sol.in_N_eps)
        throw DomainError("model_QR: index " + std::to_string(n) + " outside N_eps(" +
                          eps.str(6) + ")");
    const JIPSolution &prev = jip(n - 1, eps);
    ModelValues mv;
    SurfacePoint pq = lift_Q(z), pr = lift_R(z);
    bool in_d0 = impl_->fc->classify(z) == PointClass::D0;
    Complex psi_q = Psi_n(sol, pq);
    Complex psi_r = Psi_n(sol, pr);
    mv.Q = psi_q;
    mv.R = pow(z, -n) * (in_d0 ? psi_r : -psi_r);
    Complex psis_q = Psi_n_star(prev, pq);
    Complex psis_r = Psi_n_star(prev, pr);
    mv.Qstar = psis_q;
    mv.Rstar = pow(z, -n) * (in_d0 ? psis_r : -psis_r);
    mv.gamma_n = gamma_n(sol);
    mv.gamma_star = gamma_star(prev);
    return mv;
}

}  // namespace padelab
