#include "padelab/szego_real.hpp"

#include "padelab/continuation.hpp"
#include "padelab/quadrature.hpp"

#include <cmath>

namespace padelab {

namespace {

// sqrt with the convention sqrt(x) = i sqrt(|x|) for x < 0 (real arguments).
Complex signed_sqrt(const Real &x) {
    if (x.sign() >= 0) return Complex(sqrt(x));
    return Complex(Real(0L), sqrt(-x));
}

bool close_enough(const Complex &a, const Complex &b, const Real &tol) {
    return abs(a - b) < tol * max(Real(1L), abs(b));
}

// Node-doubling Cauchy-type sum with cached, z-independent node data:
// eval(z) ~ level_scale * sum weight_j * g_j / (s_j - z). Levels double the
// node count; new nodes of level L are appended lazily by the filler.
struct CachedKernelRule {
    std::vector<std::vector<Complex>> node;
    std::vector<std::vector<Complex>> weight;
    std::vector<std::vector<Complex>> gval;
    std::vector<Real> level_scale;

    // filler(level, nodes, weights, gvals) appends the new nodes of the level
    std::function<void(int, std::vector<Complex> &, std::vector<Complex> &,
                       std::vector<Complex> &)>
        fill;

    void ensure(int L) {
        while (static_cast<size_t>(node.size()) <= static_cast<size_t>(L)) {
            node.emplace_back();
            weight.emplace_back();
            gval.emplace_back();
            fill(static_cast<int>(node.size()) - 1, node.back(), weight.back(), gval.back());
        }
    }

    // sum of weight * (g - shift)/(s - z)
    Complex eval_shifted(const Complex &z, const Complex &shift, const Real &tol, int max_level,
                         bool allow_partial) {
        Complex sum(0L);
        Complex current, prev;
        for (int L = 0; L <= max_level; ++L) {
            ensure(L);
            for (size_t j = 0; j < node[L].size(); ++j)
                sum += weight[L][j] * (gval[L][j] - shift) / (node[L][j] - z);
            prev = current;
            current = sum * level_scale[L];
            if (L >= 2 && close_enough(current, prev, tol)) return current;
        }
        if (allow_partial) return current;
        throw QuadratureError("cached kernel rule: no convergence", current.str(20),
                              prev.str(20));
    }

    Complex eval(const Complex &z, const Real &tol, int max_level) {
        return eval_shifted(z, Complex(0L), tol, max_level, false);
    }
};

}  // namespace

struct RealModel::Impl {
    explicit Impl(const PrecisionContext &c) : ctx(c) {}
    PrecisionContext ctx;
    Complex a, ainv, b;
    Real bsign;
    Complex sqrt_sum, sqrt_diff;
    Real collar;
    Real seg_lo, seg_hi;
    bool is_w2 = false;
    Real quad_tol;  // endpoint-singular integrals reach ~2^-(bits/2) poly(bits)
    Complex s_inf;

    // branch tables: continuous log h along the deformed circles / log h-hat
    // along the segment
    struct BranchTable {
        Real lo, hi;
        std::vector<Complex> value;
    };
    BranchTable circ_out, circ_in, seg;

    // cached quadrature rules
    CachedKernelRule d_rule_in;   // contour 1+collar (evaluations inside T)
    CachedKernelRule d_rule_out;  // contour 1-collar (evaluations outside)
    CachedKernelRule s_rule;      // W2: cheb rule over the whole segment
    // W1: per-piece rules, log h-hat = 2 log D -+ log h; the D part is smooth
    // and converges at shallow levels, the h part carries the endpoint logs
    CachedKernelRule w1_d[2], w1_h[2];
    Real w1_sign[2] = {Real(-1.0), Real(1L)};  // -+ of h^{-+1} per piece

    const WeightSpec *spec_ptr = nullptr;
    Complex weight_h(const Complex &z) const { return spec_ptr->h_real(a, z); }

    Complex align_branch(const BranchTable &bt, const Real &x, const Complex &raw) const {
        size_t n = bt.value.size();
        Real step = (bt.hi - bt.lo) / Real(static_cast<long>(n - 1));
        long idx = lround(((x - bt.lo) / step).to_double());
        idx = std::max(0L, std::min(static_cast<long>(n - 1), idx));
        Real two_pi = Real::pi() * 2.0;
        Complex l = raw;
        Real adj = round_nearest((l.im - bt.value[static_cast<size_t>(idx)].im) / two_pi);
        l.im -= adj * two_pi;
        return l;
    }
};

RealModel::~RealModel() = default;

namespace {

// circle-rule filler: trapezoid nodes on |s| = radius; with weight = s the
// rule computes (1/2pi i) contour integral of g(s)/(s-z) ds
void make_circle_rule(CachedKernelRule &rule, const Real &radius,
                      const std::function<Complex(const Real &)> &logh) {
    const long n0 = 64;
    rule.fill = [&rule, radius, logh, n0](int L, std::vector<Complex> &node,
                                          std::vector<Complex> &wgt, std::vector<Complex> &gv) {
        long n = n0 << L;
        Real tau = Real::pi() * 2.0;
        long stride = L == 0 ? 1 : 2;
        long start = L == 0 ? 0 : 1;
        for (long j = start; j < n; j += stride) {
            Real theta = tau * Real(j) / Real(n);
            Complex s = polar(radius, theta);
            node.push_back(s);
            wgt.push_back(s);  // ds = i s dtheta; 1/(2 pi i) cancels i/(2 pi)
            gv.push_back(logh(theta));
        }
        rule.level_scale.resize(std::max<size_t>(rule.level_scale.size(), L + 1));
        rule.level_scale[L] = Real(1L) / Real(n);
    };
}

}  // namespace

RealModel::RealModel(const WeightSpec &spec, const BuslaevCompact &fc, const PrecisionContext &ctx)
    : spec_(spec), fc_(&fc), impl_(std::make_unique<Impl>(ctx)) {
    if (!fc.real_case()) throw DomainError("RealModel: real parameter required");
    Impl &im = *impl_;
    im.a = fc.a();
    im.ainv = fc.a_inv();
    im.b = fc.b();
    im.bsign = fc.a().re.sign() > 0 ? Real(1L) : Real(-1.0);
    im.sqrt_sum = signed_sqrt(im.a.re) + signed_sqrt(im.ainv.re);
    im.sqrt_diff = signed_sqrt(im.a.re) - signed_sqrt(im.ainv.re);
    im.collar = Real(spec.circle_collar(fc.a()));
    im.quad_tol = ctx.tol * Real::pow2(20);
    im.spec_ptr = &spec_;
    im.seg_lo = min(im.a.re, im.ainv.re);
    im.seg_hi = max(im.a.re, im.ainv.re);
    im.is_w2 = spec.cls == WeightClass::W2;

    // continuous log h along the two deformed circles; zero increment of the
    // argument is the class condition
    auto build_circle_table = [&](const Real &radius, Impl::BranchTable &bt) {
        const size_t M = 512;
        std::vector<Complex> vals(M + 1);
        bt.lo = Real(0L);
        bt.hi = Real::pi() * 2.0;
        for (size_t k = 0; k <= M; ++k) {
            Real theta = bt.hi * Real(static_cast<long>(k)) / Real(static_cast<long>(M));
            vals[k] = h(polar(radius, theta));
        }
        bt.value = unwrap_log(vals);
        if (abs(bt.value.back().im - bt.value.front().im) > Real(0.5))
            throw ClassViolationError("build_D: nonzero winding of h along the circle");
    };
    build_circle_table(Real(1L) + im.collar, im.circ_out);
    build_circle_table(Real(1L) - im.collar, im.circ_in);

    make_circle_rule(im.d_rule_in, Real(1L) + im.collar, [this](const Real &theta) {
        Complex s = polar(Real(1L) + impl_->collar, theta);
        return impl_->align_branch(impl_->circ_out, theta, log(h(s)));
    });
    make_circle_rule(im.d_rule_out, Real(1L) - im.collar, [this](const Real &theta) {
        Complex s = polar(Real(1L) - impl_->collar, theta);
        return impl_->align_branch(impl_->circ_in, theta, log(h(s)));
    });

    // continuous log h-hat along the open segment
    {
        const size_t M = 768;
        std::vector<Complex> vals;
        Real lo = im.seg_lo, hi = im.seg_hi;
        Real pad = (hi - lo) * 1e-5;
        im.seg.lo = lo + pad;
        im.seg.hi = hi - pad;
        for (size_t k = 0; k <= M; ++k) {
            Real x = im.seg.lo +
                     (im.seg.hi - im.seg.lo) * Real(static_cast<long>(k)) / Real(static_cast<long>(M));
            vals.push_back(im.is_w2 ? h_hat(Complex(x)) : h(Complex(x)));
        }
        im.seg.value = unwrap_log(vals);
    }

    // segment rule: value(z) = int over sorted [p,q] of
    // log h-hat(s) / ((s - z) sqrt((s-p)(q-s))) ds
    {
        Real p = im.seg_lo, q = im.seg_hi;
        Real mid = (p + q) * 0.5, half = (q - p) * 0.5;
        auto loghh = [this](const Real &x) {
            return impl_->align_branch(impl_->seg, x, log(h_hat(Complex(x))));
        };
        if (im.is_w2) {
            // cheb-trapezoid in theta: I = (pi/N) sum g(s_j), s_j = mid + half cos
            const long n0 = 64;
            Impl *imp = impl_.get();
            im.s_rule.fill = [imp, mid, half, loghh, n0](int L, std::vector<Complex> &node,
                                                         std::vector<Complex> &wgt,
                                                         std::vector<Complex> &gv) {
                long n = n0 << L;
                Real tau = Real::pi() * 2.0;
                long stride = L == 0 ? 1 : 2;
                long start = L == 0 ? 0 : 1;
                for (long j = start; j < n; j += stride) {
                    Real theta = tau * Real(j) / Real(n);
                    Real x = mid + half * cos(theta);
                    node.push_back(Complex(x));
                    wgt.push_back(Complex(1L));
                    gv.push_back(loghh(x));
                }
                imp->s_rule.level_scale.resize(
                    std::max<size_t>(imp->s_rule.level_scale.size(), L + 1));
                imp->s_rule.level_scale[L] = Real::pi() / Real(n);
            };
        } else {
            // per-piece tanh-sinh rules split at b; g carries either the
            // (cheap) continuous log h or twice the circle-Szego exponent
            Impl *imp = impl_.get();
            Real bb = im.b.re;
            Real piece_lo[2] = {p, bb}, piece_hi[2] = {bb, q};
            for (int pc = 0; pc < 2; ++pc) {
                Real pa = piece_lo[pc], pb = piece_hi[pc];
                auto make_fill = [imp, pa, pb, p, q](CachedKernelRule *rule, bool d_part) {
                    rule->fill = [imp, rule, pa, pb, p, q, d_part](
                                     int L, std::vector<Complex> &node,
                                     std::vector<Complex> &wgt, std::vector<Complex> &gv) {
                        int level = L + 3;
                        const TanhSinhRule &tsr = TanhSinhRule::get(level, imp->ctx.bits);
                        long stride = L == 0 ? 1 : 2;
                        long start = L == 0 ? 0 : 1;
                        Real m = (pa + pb) * 0.5, hl = (pb - pa) * 0.5;
                        for (size_t j = start; j < tsr.x.size(); j += stride) {
                            for (int sgn : {1, -1}) {
                                if (j == 0 && sgn < 0) continue;
                                Real x = m + hl * tsr.x[j] * Real(sgn);
                                if (x <= p || x >= q || x == pa || x == pb) continue;
                                Real root = sqrt((x - p) * (q - x));
                                node.push_back(Complex(x));
                                wgt.push_back(Complex(hl * tsr.w[j] / root));
                                if (d_part) {
                                    CachedKernelRule &dr = abs(Complex(x)) < Real(1L)
                                                               ? imp->d_rule_in
                                                               : imp->d_rule_out;
                                    gv.push_back(dr.eval(Complex(x),
                                                         Real::pow2(-imp->ctx.bits + 24), 14) *
                                                 2.0);
                                } else {
                                    gv.push_back(imp->align_branch(
                                        imp->seg, x, log(imp->weight_h(Complex(x)))));
                                }
                            }
                        }
                        rule->level_scale.resize(std::max<size_t>(rule->level_scale.size(), L + 1));
                        rule->level_scale[L] = Real::pow2(-level);
                    };
                };
                make_fill(&im.w1_d[pc], true);
                make_fill(&im.w1_h[pc], false);
            }
        }
    }

    // S at infinity: limit kernel w(z)/(s-z) -> -1
    {
        Real p = im.seg_lo, q = im.seg_hi;
        Complex qc;
        auto loghh = [this](const Complex &s) {
            return impl_->align_branch(impl_->seg, s.re, log(h_hat(s)));
        };
        if (im.is_w2) {
            qc = quad_cheb_segment(loghh, Complex(p), Complex(q), ctx);
        } else {
            auto f = [&](const Complex &s) {
                Real x = s.re;
                return loghh(s) / sqrt((x - p) * (q - x));
            };
            Real qtol = im.quad_tol;
            qc = quad_tanh_sinh(f, Complex(p), Complex(im.b.re), ctx, qtol, 13) +
                 quad_tanh_sinh(f, Complex(im.b.re), Complex(q), ctx, qtol, 13);
        }
        im.s_inf = exp(qc / (Real::pi() * 2.0));
    }
}

Complex RealModel::w(const Complex &z) const {
    return straight_cut_sqrt(z, impl_->a, impl_->ainv);
}

Complex RealModel::w_trace(const Complex &s, int side) const {
    Real x = s.re;
    if (!(x > impl_->seg_lo && x < impl_->seg_hi))
        throw DomainError("w_trace: point off the open cut");
    Real m = sqrt((x - impl_->seg_lo) * (impl_->seg_hi - x));
    Real sg = side >= 0 ? -impl_->bsign : impl_->bsign;
    return Complex(Real(0L), sg * m);
}

Complex RealModel::phi(const Complex &z) const {
    return (z + impl_->b + w(z)) / impl_->sqrt_sum;
}

Complex RealModel::phi_hat(const Complex &z) const {
    return (z - impl_->b - w(z)) / impl_->sqrt_diff;
}

Complex RealModel::phi_trace(const Complex &s, int side) const {
    return (s + impl_->b + w_trace(s, side)) / impl_->sqrt_sum;
}

Complex RealModel::phi_hat_trace(const Complex &s, int side) const {
    return (s - impl_->b - w_trace(s, side)) / impl_->sqrt_diff;
}

Complex RealModel::h_hat(const Complex &s) const {
    Complex d = D(s);
    Complex hv = h(s);
    if (abs(s) < Real(1L)) return d * d / hv;
    return d * d * hv;
}

Complex RealModel::D(const Complex &z) const {
    Impl &im = *impl_;
    bool inside = abs(z) < Real(1L);
    CachedKernelRule &rule = inside ? im.d_rule_in : im.d_rule_out;
    // evaluate below the context tolerance so consumers integrating log h-hat
    // do not stall on inner noise
    return exp(rule.eval(z, Real::pow2(-im.ctx.bits + 24), 14));
}

Complex RealModel::S(const Complex &z) const {
    Impl &im = *impl_;
    Real p = im.seg_lo, q = im.seg_hi;
    Complex i_unit(Real(0L), Real(1L));
    Complex qc;
    bool near_cut = z.im.is_zero()
                        ? (z.re > p - 0.02 && z.re < q + 0.02)
                        : (abs(z.im) < Real(0.02) && z.re > p - 0.02 && z.re < q + 0.02);
    if (!near_cut) {
        if (im.is_w2) {
            qc = im.s_rule.eval(z, im.quad_tol, 13);
        } else {
            qc = Complex(0L);
            for (int pc = 0; pc < 2; ++pc) {
                qc += im.w1_d[pc].eval(z, im.quad_tol, 7);
                qc += im.w1_h[pc].eval(z, im.quad_tol, 9) * im.w1_sign[pc];
            }
        }
    } else {
        // pole subtraction near the cut: the subtracted kernel integrates in
        // closed form, int ds/((s-z)X) = -pi/w(z)
        Real x0 = max(p + (q - p) * 1e-4, min(q - (q - p) * 1e-4, z.re));
        if (im.is_w2) {
            Complex g0 = im.align_branch(im.seg, x0, log(h_hat(Complex(x0))));
            qc = im.s_rule.eval_shifted(z, g0, Real(1e-12), 10, true) - g0 * Real::pi() / w(z);
        } else {
            Complex dpart = (abs(Complex(x0)) < Real(1L) ? im.d_rule_in : im.d_rule_out)
                                .eval(Complex(x0), Real::pow2(-im.ctx.bits + 24), 14) *
                            2.0;
            Complex hpart = im.align_branch(im.seg, x0, log(h(Complex(x0))));
            Complex g0(0L);
            qc = Complex(0L);
            bool x0_in_p1 = x0 < im.b.re;
            for (int pc = 0; pc < 2; ++pc) {
                bool here = (pc == 0) == x0_in_p1;
                Complex shift_d = here ? dpart : Complex(0L);
                Complex shift_h = here ? hpart : Complex(0L);
                qc += im.w1_d[pc].eval_shifted(z, shift_d, Real(1e-12), 6, true);
                qc += im.w1_h[pc].eval_shifted(z, shift_h, Real(1e-12), 8, true) * im.w1_sign[pc];
                if (here) g0 = shift_d + im.w1_sign[pc] * shift_h;
            }
            qc -= g0 * Real::pi() / w(z);
        }
    }
    // int over [1/a -> a] of log h-hat /((s-z) w_+) ds = -i * qc
    return exp(w(z) * (-i_unit) * qc / (Complex(Real(0L), Real::pi() * 2.0)));
}

Complex RealModel::S_infinity() const { return impl_->s_inf; }

Complex RealModel::Q_model(long n, const Complex &z) const {
    PointClass c = fc_->classify(z);
    if (c == PointClass::OnF) throw DomainError("Q_model: z on F");
    if (c == PointClass::D0) return pow(z / phi(z), n) * S(z) / D(z);
    return pow(phi(z), n) * D(z) / S(z);
}

Complex RealModel::R_model(long n, const Complex &z) const {
    PointClass c = fc_->classify(z);
    if (c == PointClass::OnF) throw DomainError("R_model: z on F");
    if (c == PointClass::D0) return pow(phi(z) / z, n) * D(z) / S(z);
    return -pow(phi(z), -n) * S(z) / D(z);
}

Complex RealModel::Qstar_model(long n_minus_1, const Complex &z) const {
    PointClass c = fc_->classify(z);
    if (c == PointClass::OnF) throw DomainError("Qstar_model: z on F");
    Complex base = Q_model(n_minus_1, z);
    if (c == PointClass::D0) return base * z / phi_hat(z);
    return base * phi_hat(z);
}

Complex RealModel::Rstar_model(long n_minus_1, const Complex &z) const {
    PointClass c = fc_->classify(z);
    if (c == PointClass::OnF) throw DomainError("Rstar_model: z on F");
    Complex base = R_model(n_minus_1, z);
    if (c == PointClass::D0) return base * phi_hat(z) / z;
    return base / phi_hat(z);
}

RealModel::Gammas RealModel::normalize_gammas(long n) const {
    const Impl &im = *impl_;
    Complex kappa = Complex(2L) / im.sqrt_sum;  // leading coefficient of phi
    Complex ja = (im.a + im.ainv) * 0.5;
    Complex phi_hat_inf = (ja - im.b) / im.sqrt_diff;
    Gammas g;
    g.gamma_n = im.s_inf * pow(kappa, -n);
    g.gamma_star = -phi_hat_inf * pow(kappa, n - 1) / im.s_inf;
    Complex prod_inv = Complex(1L) / (g.gamma_n * g.gamma_star);
    Complex target = Complex(-4.0) / (im.b * 2.0 + im.a + im.ainv);
    g.identity_residual = abs(prod_inv - target);
    return g;
}

Complex RealModel::predicted_error(long n, const Complex &z) const {
    PointClass c = fc_->classify(z);
    if (c == PointClass::OnF) throw DomainError("predicted_error: z on F");
    // leading term of z^n R_n / (w Q_n) assembled from the model functions
    Complex ph = phi(z);
    Complex ds = D(z) / S(z);
    if (c == PointClass::D0) return pow(ph * ph / z, n) * ds * ds / w(z);
    return -pow(z / (ph * ph), n) * pow(ds, -2L) / w(z);
}

Real RealModel::g(const Complex &z) const {
    PointClass c = fc_->classify(z, impl_->ctx.tol.to_double());
    if (c == PointClass::OnF) throw DomainError("g: z on F");
    if (c == PointClass::DInf) return log(abs(phi(z)));
    return log(abs(z / phi(z)));
}

}  // namespace padelab
