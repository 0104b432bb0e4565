#include "padelab/geometry.hpp"

#include "padelab/linalg.hpp"
#include "padelab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

namespace padelab {

namespace {

using cd = std::complex<double>;

cd to_cd(const Complex &z) { return cd(z.re.to_double(), z.im.to_double()); }

double cross2(const cd &u, const cd &v) { return u.real() * v.imag() - u.imag() * v.real(); }

// Segment-segment intersection; t strict on [p,q], u half-open on [r,s) so a
// polyline vertex hit is counted exactly once. Returns parameter on [p,q]
// or -1.
double segment_intersection(const cd &p, const cd &q, const cd &r, const cd &s) {
    cd d1 = q - p, d2 = s - r;
    double denom = cross2(d1, d2);
    if (std::abs(denom) < 1e-300) return -1.0;
    double t = cross2(r - p, d2) / denom;
    double u = cross2(r - p, d1) / denom;
    if (t <= 1e-12 || t >= 1.0 - 1e-12) return -1.0;
    if (u < 0.0 || u >= 1.0) return -1.0;
    return t;
}

double point_segment_distance(const cd &z, const cd &p, const cd &q) {
    cd d = q - p;
    double l2 = std::norm(d);
    if (l2 == 0.0) return std::abs(z - p);
    double t = ((z.real() - p.real()) * d.real() + (z.imag() - p.imag()) * d.imag()) / l2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(z - (p + t * d));
}

// Even-odd ray casting (horizontal ray to +x) for a closed polygon.
bool point_in_polygon(const cd &z, const std::vector<cd> &poly) {
    bool inside = false;
    size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const cd &a = poly[i];
        const cd &b = poly[j];
        if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
            double xint = a.real() + (z.imag() - a.imag()) / (b.imag() - a.imag()) * (b.real() - a.real());
            if (z.real() < xint) inside = !inside;
        }
    }
    return inside;
}

}  // namespace

Complex jukovski(const Complex &z) {
    if (z.is_zero()) throw DomainError("jukovski: z = 0");
    return (z + Complex(1L) / z) * 0.5;
}

Complex normalize_parameter(const Complex &a) {
    if (a.is_zero()) throw DomainError("parameter a must be nonzero");
    Real m = abs(a);
    Real one(1L);
    if (abs(m - one) < Real::pow2(-48))
        throw DomainError("parameter a must lie off the unit circle");
    if (m > one) return Complex(1L) / a;
    return a;
}

const char *arc_label_name(ArcLabel l) {
    switch (l) {
        case ArcLabel::FaInv: return "Fainv";
        case ArcLabel::Fm1: return "Fm1";
        case ArcLabel::Fp1: return "F1";
        case ArcLabel::Fa: return "Fa";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Chebotarev center
// ---------------------------------------------------------------------------

namespace {

// Re int over the straight path [p,q] of v(t)/t dt, where v is the continuous
// continuation of straight_cut_sqrt(t;b,1/b)/straight_cut_sqrt(t;a,1/a) along
// the path. Crossings of the two chords flip the sign of the reference
// product; the path is split there.
Real trajectory_condition(const Complex &a, const Complex &b, const Complex &p, const Complex &q,
                          const PrecisionContext &ctx) {
    Complex ainv = Complex(1L) / a;
    Complex binv = Complex(1L) / b;
    auto vref = [&](const Complex &t) {
        return straight_cut_sqrt(t, b, binv) / (straight_cut_sqrt(t, a, ainv) * t);
    };
    // chord crossing parameters
    std::vector<double> ts;
    cd pd = to_cd(p), qd = to_cd(q);
    double t1 = segment_intersection(pd, qd, to_cd(a), to_cd(ainv));
    double t2 = segment_intersection(pd, qd, to_cd(b), to_cd(binv));
    if (t1 > 0) ts.push_back(t1);
    if (t2 > 0) ts.push_back(t2);
    std::sort(ts.begin(), ts.end());
    ts.push_back(1.0);

    Complex total(0L);
    Real sign(1L);
    double t0 = 0.0;
    for (double te : ts) {
        Complex seg_p = p + (q - p) * Real(t0);
        Complex seg_q = p + (q - p) * Real(te);
        Complex piece = quad_tanh_sinh(vref, seg_p, seg_q, ctx, ctx.tol);
        total += piece * sign;
        sign = -sign;
        t0 = te;
    }
    return total.re;
}

}  // namespace

Complex chebotarev_center(const Complex &a_in, const PrecisionContext &ctx) {
    Complex a = normalize_parameter(a_in);
    if (a.im.is_zero()) {
        return a.re.sign() > 0 ? Complex(1L) : Complex(-1.0);
    }
    Complex one(1L);
    if (a.re.is_zero()) {
        // purely imaginary parameter: b is purely imaginary by the reflection
        // symmetry and the first condition holds identically; solve the
        // remaining one-dimensional condition.
        RealMap F1 = [&](const std::vector<Real> &x) -> std::vector<Real> {
            Complex b(Real(0L), x[0]);
            return {trajectory_condition(a, b, b, one, ctx)};
        };
        Real y0 = a.im.sign() > 0 ? Real(1L) : Real(-1.0);
        auto sol = newton_system(F1, {y0 * 0.9}, ctx);
        return Complex(Real(0L), sol[0]);
    }
    RealMap F = [&](const std::vector<Real> &x) -> std::vector<Real> {
        Complex b(x[0], x[1]);
        Real c1 = trajectory_condition(a, b, a, b, ctx);
        Real c2 = trajectory_condition(a, b, b, one, ctx);
        return {c1, c2};
    };
    Complex b0 = a / abs(a);
    std::vector<Real> x0{b0.re, b0.im};
    std::vector<Real> sol;
    try {
        sol = newton_system(F, x0, ctx);
    } catch (const Error &) {
        // perturbed restart
        sol = newton_system(F, {x0[0] * 0.93 + 0.021, x0[1] * 0.93 - 0.013}, ctx);
    }
    Complex b(sol[0], sol[1]);
    if (abs(b) > Real(1L) + ctx.tol)
        throw GeometryError("chebotarev_center: |b| > 1 (" + abs(b).str(8) + ")");
    return b;
}

// ---------------------------------------------------------------------------
// Trajectory tracing (double precision)
// ---------------------------------------------------------------------------

namespace {

struct Tracer {
    cd a, ainv, b, binv;
    double step, maxlen, matchtol;

    cd v2(const cd &z) const { return (z - b) * (z - binv) / ((z - a) * (z - ainv)); }

    double clearance(const cd &z) const {
        double d = std::abs(z - a);
        d = std::min(d, std::abs(z - ainv));
        d = std::min(d, std::abs(z - b));
        d = std::min(d, std::abs(z - binv));
        return d;
    }

    // Re and Im of int_e^{e+r e^{i th}} v dt/t along the straight ray, with
    // the substitution tau = u^2 regularizing an a-type endpoint. Also
    // returns the branch of v at the ray end continued from the endpoint.
    cd ray_integral(const cd &e, double r, double th, cd &v_end) const {
        cd d = std::polar(1.0, th);
        const int N = 240;
        cd acc = 0.0, vprev = 0.0;
        bool first = true;
        for (int i = 0; i < N; ++i) {
            double u = (i + 0.5) / N;
            cd z = e + (u * u) * r * d;
            cd v = std::sqrt(v2(z));
            if (!first && std::norm(v - vprev) > std::norm(v + vprev)) v = -v;
            first = false;
            vprev = v;
            acc += v / z * (2.0 * u * r * d / double(N));
        }
        v_end = vprev;
        return acc;
    }

    // Solve Re int = 0 in the ray angle near th0 (critical-direction launch).
    double refine_launch_angle(const cd &e, double r, double th0) const {
        double th = th0;
        for (int it = 0; it < 60; ++it) {
            cd ve;
            double g = ray_integral(e, r, th, ve).real();
            double dth = 1e-6;
            double gp = ray_integral(e, r, th + dth, ve).real();
            double gm = ray_integral(e, r, th - dth, ve).real();
            double dg = (gp - gm) / (2.0 * dth);
            if (dg == 0.0) break;
            double stepth = g / dg;
            stepth = std::clamp(stepth, -0.3, 0.3);
            th -= stepth;
            if (std::abs(stepth) < 1e-13) break;
        }
        return th;
    }

    // Unit-speed trajectory field +-i z / v with v continued from vprev.
    cd field(const cd &z, cd &vprev, double sigma) const {
        cd v = std::sqrt(v2(z));
        if (std::norm(v - vprev) > std::norm(v + vprev)) v = -v;
        vprev = v;
        cd f = cd(0.0, 1.0) * z / v;
        double m = std::abs(f);
        if (m == 0.0 || !std::isfinite(m)) return cd(0.0, 0.0);
        return sigma * f / m;
    }

    double separation(const cd &e) const {
        double d = 1e300;
        for (const cd &o : {a, ainv, b, binv})
            if (std::abs(o - e) > 1e-14) d = std::min(d, std::abs(o - e));
        return d;
    }

    // Trace from an endpoint along the refined critical direction; stops near
    // one of the candidate endpoints.
    std::vector<cd> trace(const cd &e, const cd &dir, const std::vector<cd> &targets, cd &landed,
                          bool &ok) const {
        std::vector<cd> pts;
        double r0 = std::min(1.5 * step, 0.12 * separation(e));
        double th = refine_launch_angle(e, r0, std::arg(dir));
        cd vprev;
        ray_integral(e, r0, th, vprev);
        cd z = e + r0 * std::polar(1.0, th);
        cd f = cd(0.0, 1.0) * z / vprev;
        f /= std::abs(f);
        cd d0 = std::polar(1.0, th);
        double sigma = (f.real() * d0.real() + f.imag() * d0.imag()) >= 0 ? 1.0 : -1.0;
        pts.push_back(e);
        pts.push_back(z);
        double travelled = r0;
        double drift = 0.0;  // accumulated Re int v dt/t since launch
        ok = false;
        while (travelled < maxlen) {
            double h = std::min(step, 0.2 * clearance(z) + 1e-14);
            h = std::max(h, 1e-5 * step);
            cd v1 = vprev;
            cd k1 = field(z, v1, sigma);
            cd v2a = v1;
            cd k2 = field(z + 0.5 * h * k1, v2a, sigma);
            cd v3 = v2a;
            cd k3 = field(z + 0.5 * h * k2, v3, sigma);
            cd v4 = v3;
            cd k4 = field(z + h * k3, v4, sigma);
            cd znew = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

            // drift increment by Simpson on the chord, v continued
            cd vm = vprev, ve = vprev;
            cd zm = 0.5 * (z + znew);
            (void)field(zm, vm, sigma);
            (void)field(znew, ve, sigma);
            cd g0 = vprev / z, gm = vm / zm, g1 = ve / znew;
            cd dz = znew - z;
            drift += ((g0 + 4.0 * gm + g1) * dz / 6.0).real();

            // orthogonal correction pushing Re int back to zero
            cd tdir = dz / std::abs(dz);
            cd nhat = cd(0.0, 1.0) * tdir;
            double slope = (ve / znew * nhat).real();
            if (std::abs(slope) > 1e-9) {
                double delta = -drift / slope;
                delta = std::clamp(delta, -0.2 * h, 0.2 * h);
                znew += delta * nhat;
                drift = 0.0;
                (void)field(znew, ve, sigma);
            }

            vprev = ve;
            z = znew;
            travelled += h;
            pts.push_back(z);
            for (const cd &t : targets) {
                if (std::abs(z - t) < std::max(2.0 * h, matchtol)) {
                    landed = t;
                    ok = true;
                    return pts;
                }
            }
        }
        landed = z;
        return pts;
    }
};

// launch directions at a square-root endpoint of v (a-type: v ~ c (z-e)^(-1/2))
std::vector<cd> launch_directions_a(const Tracer &tr, const cd &e) {
    // arg d = pi - 2 arg(c/e) mod 2pi with c^2 = (e-b)(e-binv) q'(e)^-1-ish;
    // compute c^2 directly to dodge the sqrt ambiguity (direction is unique).
    cd qp = (e - tr.b) * (e - tr.binv);
    cd other = (e == tr.a) ? (e - tr.ainv) : (e - tr.a);
    cd c2 = qp / other;  // v^2 ~ c2 / (z - e)
    double argc = 0.5 * std::arg(c2);
    double argd = M_PI - 2.0 * (argc - std::arg(e));
    return {std::polar(1.0, argd)};
}

// three directions at a simple zero of v (b-type: v ~ c (z-e)^(1/2))
std::vector<cd> launch_directions_b(const Tracer &tr, const cd &e) {
    cd other = (e == tr.b) ? (e - tr.binv) : (e - tr.b);
    cd c2 = other / ((e - tr.a) * (e - tr.ainv));  // v^2 ~ c2 (z-e)
    double argc = 0.5 * std::arg(c2);
    std::vector<cd> dirs;
    for (int k = 0; k < 3; ++k) {
        double argd = (2.0 / 3.0) * (M_PI * (0.5 + k) - (argc - std::arg(e)));
        dirs.push_back(std::polar(1.0, argd));
    }
    return dirs;
}

std::vector<Complex> to_complex_polyline(const std::vector<cd> &pts, const Complex &head,
                                         const Complex &tail) {
    std::vector<Complex> out;
    out.reserve(pts.size() + 1);
    out.push_back(head);
    for (size_t k = 1; k < pts.size(); ++k) out.push_back(Complex(pts[k].real(), pts[k].imag()));
    out.push_back(tail);
    return out;
}

void snap_to(std::vector<Complex> &poly, const Complex &target) {
    double best = 1e300;
    size_t bi = 0;
    for (size_t k = 1; k + 1 < poly.size(); ++k) {
        double d = std::abs(to_cd(poly[k]) - to_cd(target));
        if (d < best) {
            best = d;
            bi = k;
        }
    }
    if (bi > 0) poly[bi] = target;
}

void reverse_polyline(std::vector<Complex> &poly) { std::reverse(poly.begin(), poly.end()); }

// Insert chord intersection points as polyline nodes so that no segment
// properly crosses either branch-cut chord.
void subdivide_at_chords(std::vector<Complex> &poly, const std::vector<std::pair<cd, cd>> &chords) {
    std::vector<Complex> out;
    out.push_back(poly.front());
    for (size_t k = 0; k + 1 < poly.size(); ++k) {
        cd p = to_cd(poly[k]), q = to_cd(poly[k + 1]);
        std::vector<double> ts;
        for (auto &ch : chords) {
            double t = segment_intersection(p, q, ch.first, ch.second);
            if (t > 0) ts.push_back(t);
        }
        std::sort(ts.begin(), ts.end());
        for (double t : ts) {
            Complex mid = poly[k] + (poly[k + 1] - poly[k]) * Real(t);
            out.push_back(mid);
        }
        out.push_back(poly[k + 1]);
    }
    poly = std::move(out);
}

}  // namespace

BuslaevCompact BuslaevCompact::build(const Complex &a_in, const TrajectoryConfig &cfg,
                                     const PrecisionContext &ctx) {
    BuslaevCompact fc;
    fc.a_ = normalize_parameter(a_in);
    fc.real_case_ = fc.a_.im.is_zero();
    fc.b_ = chebotarev_center(fc.a_, ctx);

    for (int i = 0; i < 4; ++i) fc.arcs_[i].label = static_cast<ArcLabel>(i);

    if (fc.real_case_) {
        bool pos = fc.a_.re.sign() > 0;
        Complex a = fc.a_, ainv = fc.a_inv();
        Complex b = fc.b_;
        // segments at cfg.step resolution
        auto lin = [&](const Complex &p, const Complex &q) {
            double len = std::abs(to_cd(q) - to_cd(p));
            size_t n = std::max<size_t>(2, static_cast<size_t>(len / cfg.step));
            std::vector<Complex> pts;
            for (size_t k = 0; k <= n; ++k) pts.push_back(p + (q - p) * (Real(static_cast<long>(k)) / Real(static_cast<long>(n))));
            return pts;
        };
        // circle through four exact cardinal points, starting/ending at b
        auto circle = [&](double theta0) {
            size_t n = static_cast<size_t>(std::ceil(2.0 * M_PI / cfg.step));
            n = ((n + 3) / 4) * 4;
            std::vector<Complex> pts;
            Real tau = Real::pi() * 2.0;
            for (size_t k = 0; k <= n; ++k) {
                Real th = Real(theta0) + tau * Real(static_cast<long>(k)) / Real(static_cast<long>(n));
                pts.push_back(Complex(cos(th), sin(th)));
            }
            // snap exact cardinal nodes
            pts.front() = pos ? Complex(1L) : Complex(-1.0);
            pts.back() = pts.front();
            pts[n / 2] = pos ? Complex(-1.0) : Complex(1L);
            return pts;
        };
        fc.arcs_[static_cast<int>(ArcLabel::FaInv)].pts = lin(ainv, b);
        fc.arcs_[static_cast<int>(ArcLabel::Fa)].pts = lin(b, a);
        if (pos) {
            fc.arcs_[static_cast<int>(ArcLabel::Fm1)].pts = circle(0.0);  // b=1 -> ccw -> 1
        } else {
            fc.arcs_[static_cast<int>(ArcLabel::Fp1)].pts = circle(M_PI);  // b=-1 -> ccw -> -1
        }
        return fc;
    }

    // complex case: trace the four arcs
    Tracer tr;
    tr.a = to_cd(fc.a_);
    tr.ainv = to_cd(fc.a_inv());
    tr.b = to_cd(fc.b_);
    tr.binv = to_cd(fc.b_inv());
    double sep = 1e300;
    std::vector<cd> epts{tr.a, tr.ainv, tr.b, tr.binv};
    for (size_t i = 0; i < 4; ++i)
        for (size_t j = i + 1; j < 4; ++j) sep = std::min(sep, std::abs(epts[i] - epts[j]));
    tr.step = std::min(cfg.step, 0.1 * sep);
    tr.maxlen = cfg.maxlen;
    tr.matchtol = cfg.matchtol;

    cd landed;
    bool ok = false;

    // F_a: from a, must land at b
    auto da = launch_directions_a(tr, tr.a);
    auto pa = tr.trace(tr.a, da[0], {tr.b, tr.binv, tr.ainv}, landed, ok);
    if (!ok || std::abs(landed - tr.b) > tr.matchtol + 2.0 * tr.step)
        throw GeometryError("trace_compact: arc from a failed to land at b (last point " +
                            std::to_string(pa.back().real()) + "," + std::to_string(pa.back().imag()) + ")");
    std::vector<Complex> fa_poly = to_complex_polyline(pa, fc.a_, fc.b_);
    reverse_polyline(fa_poly);  // stored orientation b -> a

    // F_{a^-1}: from a^-1, land at b^-1
    auto dainv = launch_directions_a(tr, tr.ainv);
    auto painv = tr.trace(tr.ainv, dainv[0], {tr.binv, tr.b, tr.a}, landed, ok);
    if (!ok || std::abs(landed - tr.binv) > tr.matchtol + 2.0 * tr.step)
        throw GeometryError("trace_compact: arc from 1/a failed to land at 1/b");
    std::vector<Complex> fainv_poly = to_complex_polyline(painv, fc.a_inv(), fc.b_inv());

    // from b: three directions; skip the one landing at a, classify the other
    // two by proximity to +-1
    std::vector<std::vector<Complex>> b_arcs;
    for (const cd &d : launch_directions_b(tr, tr.b)) {
        auto p = tr.trace(tr.b, d, {tr.binv, tr.a, tr.ainv}, landed, ok);
        if (!ok) throw GeometryError("trace_compact: arc from b did not land");
        if (std::abs(landed - tr.a) < tr.matchtol + 2.0 * tr.step) continue;  // F_a again
        if (std::abs(landed - tr.binv) > tr.matchtol + 2.0 * tr.step)
            throw GeometryError("trace_compact: arc from b landed off 1/b");
        b_arcs.push_back(to_complex_polyline(p, fc.b_, fc.b_inv()));
    }
    if (b_arcs.size() != 2) throw GeometryError("trace_compact: expected two arcs b -> 1/b");
    auto min_dist_to = [&](const std::vector<Complex> &poly, const cd &t) {
        double m = 1e300;
        for (const Complex &p : poly) m = std::min(m, std::abs(to_cd(p) - t));
        return m;
    };
    size_t idx1 = min_dist_to(b_arcs[0], cd(1.0, 0.0)) < min_dist_to(b_arcs[1], cd(1.0, 0.0)) ? 0 : 1;
    std::vector<Complex> f1_poly = b_arcs[idx1];       // passes +1, traced b -> 1/b
    std::vector<Complex> fm1_poly = b_arcs[1 - idx1];  // passes -1, traced b -> 1/b
    reverse_polyline(f1_poly);                         // stored orientation 1/b -> b
    snap_to(f1_poly, Complex(1L));
    snap_to(fm1_poly, Complex(-1.0));

    std::vector<std::pair<cd, cd>> chords{{tr.a, tr.b}, {tr.ainv, tr.binv}};
    subdivide_at_chords(fa_poly, chords);
    subdivide_at_chords(fainv_poly, chords);
    subdivide_at_chords(f1_poly, chords);
    subdivide_at_chords(fm1_poly, chords);

    // enforce the counterclockwise orientation of the Jordan curve F1 u F-1
    // (positive winding about the origin); the trace-side conventions of the
    // weight classes assume D0 on the left
    {
        double total = 0.0;
        auto add = [&](const std::vector<Complex> &poly) {
            for (size_t k = 0; k + 1 < poly.size(); ++k) {
                cd u = to_cd(poly[k]);
                cd v = to_cd(poly[k + 1]);
                total += std::arg(v / u);
            }
        };
        add(f1_poly);
        add(fm1_poly);
        if (total < 0) {
            reverse_polyline(f1_poly);
            reverse_polyline(fm1_poly);
        }
    }

    fc.arcs_[static_cast<int>(ArcLabel::Fa)].pts = std::move(fa_poly);
    fc.arcs_[static_cast<int>(ArcLabel::FaInv)].pts = std::move(fainv_poly);
    fc.arcs_[static_cast<int>(ArcLabel::Fp1)].pts = std::move(f1_poly);
    fc.arcs_[static_cast<int>(ArcLabel::Fm1)].pts = std::move(fm1_poly);
    return fc;
}

std::vector<Complex> BuslaevCompact::endpoints() const {
    return {a_, a_inv(), b_, b_inv()};
}

double BuslaevCompact::distance(const Complex &z) const {
    cd zd = to_cd(z);
    if (real_case_) {
        double lo = std::min(a_.re.to_double(), 1.0 / a_.re.to_double());
        double hi = std::max(a_.re.to_double(), 1.0 / a_.re.to_double());
        double dcirc = std::abs(std::abs(zd) - 1.0);
        double cx = std::clamp(zd.real(), lo, hi);
        double dseg = std::hypot(zd.real() - cx, zd.imag());
        return std::min(dcirc, dseg);
    }
    double best = 1e300;
    for (const Arc &arc : arcs_) {
        for (size_t k = 0; k + 1 < arc.pts.size(); ++k)
            best = std::min(best, point_segment_distance(zd, to_cd(arc.pts[k]), to_cd(arc.pts[k + 1])));
    }
    return best;
}

double BuslaevCompact::chordal_distance_to(const Complex &z) const {
    cd zd = to_cd(z);
    double best = 1e300;
    double nz = 1.0 + std::norm(zd);
    for (const Arc &arc : arcs_) {
        for (const Complex &p : arc.pts) {
            cd pd = to_cd(p);
            double d = 2.0 * std::abs(zd - pd) / std::sqrt(nz * (1.0 + std::norm(pd)));
            best = std::min(best, d);
        }
    }
    return best;
}

PointClass BuslaevCompact::classify(const Complex &z, double on_tol) const {
    if (real_case_) {
        // exact circle + segment geometry
        double az = std::abs(to_cd(z));
        double lo = std::min(a_.re.to_double(), 1.0 / a_.re.to_double());
        double hi = std::max(a_.re.to_double(), 1.0 / a_.re.to_double());
        double seg = (z.im.is_zero() && z.re.to_double() >= lo && z.re.to_double() <= hi)
                         ? std::abs(z.im.to_double())
                         : std::min(std::abs(to_cd(z) - cd(lo, 0.0)),
                                    std::abs(to_cd(z) - cd(hi, 0.0)));
        if (!z.im.is_zero()) {
            double x = z.re.to_double(), y = z.im.to_double();
            double cx = std::clamp(x, lo, hi);
            seg = std::hypot(x - cx, y);
        }
        if (std::abs(az - 1.0) <= on_tol || seg <= on_tol) return PointClass::OnF;
        return az < 1.0 ? PointClass::D0 : PointClass::DInf;
    }
    if (distance(z) <= on_tol) return PointClass::OnF;
    // winding of the closed Jordan curve F_1 u F_-1 about z
    cd zd = to_cd(z);
    double total = 0.0;
    auto add_arc = [&](const Arc &arc) {
        for (size_t k = 0; k + 1 < arc.pts.size(); ++k) {
            cd u = to_cd(arc.pts[k]) - zd;
            cd v = to_cd(arc.pts[k + 1]) - zd;
            total += std::arg(v / u);
        }
    };
    add_arc(arc(ArcLabel::Fp1));
    add_arc(arc(ArcLabel::Fm1));
    double w = total / (2.0 * M_PI);
    return std::abs(w) > 0.5 ? PointClass::D0 : PointClass::DInf;
}

int BuslaevCompact::crossings(const Complex &p, const Complex &q, ArcLabel l) const {
    const Arc &a = arc(l);
    cd pd = to_cd(p), qd = to_cd(q);
    int count = 0;
    for (size_t k = 0; k + 1 < a.pts.size(); ++k) {
        if (segment_intersection(pd, qd, to_cd(a.pts[k]), to_cd(a.pts[k + 1])) > 0) ++count;
    }
    return count;
}

int BuslaevCompact::crossings_all(const Complex &p, const Complex &q) const {
    int c = 0;
    for (int i = 0; i < 4; ++i) c += crossings(p, q, static_cast<ArcLabel>(i));
    return c;
}

bool BuslaevCompact::in_lens(const Complex &z, ArcLabel l) const {
    const Arc &a = arc(l);
    if (a.empty()) return false;
    std::vector<cd> poly;
    poly.reserve(a.pts.size());
    for (const Complex &p : a.pts) poly.push_back(to_cd(p));
    // closing edge = the chord back to the start
    return point_in_polygon(to_cd(z), poly);
}

double BuslaevCompact::min_abs() const {
    double m = 1e300;
    for (const Arc &arc : arcs_)
        for (const Complex &p : arc.pts) m = std::min(m, std::abs(to_cd(p)));
    return m;
}

double BuslaevCompact::max_abs() const {
    double m = 0.0;
    for (const Arc &arc : arcs_)
        for (const Complex &p : arc.pts) m = std::max(m, std::abs(to_cd(p)));
    return m;
}

void BuslaevCompact::write_csv(std::ostream &os) const {
    os << "arc,idx,re,im\n";
    for (ArcLabel l : {ArcLabel::FaInv, ArcLabel::Fm1, ArcLabel::Fp1, ArcLabel::Fa}) {
        const Arc &a = arc(l);
        for (size_t k = 0; k < a.pts.size(); ++k)
            os << arc_label_name(l) << "," << k << "," << a.pts[k].re.str(20) << ","
               << a.pts[k].im.str(20) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Branch machinery
// ---------------------------------------------------------------------------

Complex straight_cut_sqrt(const Complex &z, const Complex &e1, const Complex &e2) {
    Complex c = (e1 + e2) * 0.5;
    Complex d = (e2 - e1) * 0.5;
    Complex zc = z - c;
    if (zc.is_zero()) return Complex(0.0, 1.0) * d;  // + trace at the midpoint
    // 1 - zeta^-2 written as (z-e1)(z-e2)/(z-c)^2: exact differences keep the
    // value accurate arbitrarily close to the branch points
    Complex u = (z - e1) * (z - e2) / (zc * zc);
    return zc * sqrt(u);
}

QuarticBranch::QuarticBranch(const BuslaevCompact &fc) : fc_(&fc) {
    if (fc.real_case()) throw DomainError("QuarticBranch: complex parameter required");
    for (ArcLabel cut : {ArcLabel::Fa, ArcLabel::FaInv}) {
        const Arc &arc = fc.arc(cut);
        auto &signs = side_sign_[static_cast<int>(cut)];
        signs.resize(arc.segments());
        for (size_t k = 0; k < arc.segments(); ++k) {
            cd p = to_cd(arc.pts[k]), q = to_cd(arc.pts[k + 1]);
            cd t = q - p;
            double len = std::abs(t);
            cd nrm = cd(0.0, 1.0) * t / len;  // + side = left of orientation
            // side-limit probe: must stay inside the lens sliver when the
            // chord hugs the arc
            cd probe = 0.5 * (p + q) + 1e-9 * nrm;
            Complex pc(probe.real(), probe.imag());
            Complex w = w0(pc);
            Complex ref = scs_pair(pc);
            // sign of w0 / scs on the + side of this segment
            signs[k] = (abs(w - ref) < abs(w + ref)) ? 1 : -1;
        }
    }
}

Complex QuarticBranch::scs_pair(const Complex &z) const {
    return straight_cut_sqrt(z, fc_->a(), fc_->b()) *
           straight_cut_sqrt(z, fc_->a_inv(), fc_->b_inv());
}

Complex QuarticBranch::w0(const Complex &z) const {
    int s = 1;
    if (fc_->in_lens(z, ArcLabel::Fa)) s = -s;
    if (fc_->in_lens(z, ArcLabel::FaInv)) s = -s;
    Complex w = scs_pair(z);
    return s > 0 ? w : -w;
}

Complex QuarticBranch::v0(const Complex &z) const {
    return (z - fc_->b()) * (z - fc_->b_inv()) / w0(z);
}

Complex QuarticBranch::w0_trace(ArcLabel cut, size_t segment, const Complex &s, int side) const {
    const auto &signs = side_sign_[static_cast<int>(cut)];
    if (segment >= signs.size()) throw DomainError("w0_trace: bad segment index");
    int sg = signs[segment] * (side >= 0 ? 1 : -1);
    Complex w = scs_pair(s);
    return sg > 0 ? w : -w;
}

// ---------------------------------------------------------------------------
// Arc quadrature tables
// ---------------------------------------------------------------------------

Complex segment_integral(const std::function<Complex(const Complex &)> &f, const Complex &p,
                         const Complex &q, const PrecisionContext &ctx, const Real &tol) {
    return quad_tanh_sinh(f, p, q, ctx, tol);
}

ArcTable build_arc_table(const Arc &arc, const PrecisionContext &ctx, int gl_order, int ts_level,
                         const std::vector<Complex> &singular_interior) {
    ArcTable table;
    if (arc.empty()) return table;
    const size_t nseg = arc.segments();

    auto is_singular_node = [&](const Complex &p, bool is_arc_end) {
        if (is_arc_end) return true;
        for (const Complex &s : singular_interior)
            if (abs(p - s) < Real::pow2(-40)) return true;
        return false;
    };

    const GaussLegendreRule &gl = GaussLegendreRule::get(gl_order, ctx.bits);
    const TanhSinhRule &tsr = TanhSinhRule::get(ts_level, ctx.bits);
    Real h = Real::pow2(-ts_level);

    for (size_t k = 0; k < nseg; ++k) {
        const Complex &p = arc.pts[k];
        const Complex &q = arc.pts[k + 1];
        Complex mid = (p + q) * 0.5;
        Complex half = (q - p) * 0.5;
        bool sing_start = is_singular_node(p, k == 0);
        bool sing_end = is_singular_node(q, k + 1 == nseg);

        if (!sing_start && !sing_end) {
            for (size_t j = gl.x.size(); j-- > 0;) {  // ascending order along [p,q]
                table.s.push_back(mid + half * gl.x[j]);
                table.dsw.push_back(half * gl.w[j]);
                table.segment_of.push_back(k);
            }
        } else {
            // tanh-sinh nodes sorted ascending; either or both ends may be
            // singular, the rule handles both.
            std::vector<std::pair<Real, Real>> nodes;  // (x, w)
            nodes.emplace_back(tsr.x[0], tsr.w[0]);
            for (size_t j = 1; j < tsr.x.size(); ++j) {
                nodes.emplace_back(tsr.x[j], tsr.w[j]);
                nodes.emplace_back(-tsr.x[j], tsr.w[j]);
            }
            std::sort(nodes.begin(), nodes.end(),
                      [](const auto &a, const auto &b) { return a.first < b.first; });
            for (auto &nd : nodes) {
                Complex s = mid + half * nd.first;
                if (s == p || s == q) continue;
                table.s.push_back(s);
                table.dsw.push_back(half * nd.second * h);
                table.segment_of.push_back(k);
            }
        }
    }
    return table;
}

}  // namespace padelab
