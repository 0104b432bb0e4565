#include "padelab/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>

namespace padelab {

namespace {

using cd = std::complex<double>;

cd to_cd(const Complex &z) { return cd(z.re.to_double(), z.im.to_double()); }

}  // namespace

std::vector<Complex> route_avoiding(const BuslaevCompact &fc, const Complex &from,
                                    const Complex &to, const std::array<bool, 4> &may_cross,
                                    double clearance) {
    std::vector<Complex> eps_pts = fc.endpoints();
    auto admissible = [&](const Complex &p, const Complex &q) {
        for (int i = 0; i < 4; ++i) {
            if (may_cross[i]) continue;
            if (fc.crossings(p, q, static_cast<ArcLabel>(i)) > 0) return false;
        }
        if (clearance > 0) {
            cd pd = to_cd(p), qd = to_cd(q);
            cd d = qd - pd;
            double l2 = std::norm(d);
            for (const Complex &e : eps_pts) {
                cd ed = to_cd(e);
                double t = l2 == 0.0 ? 0.0
                                     : std::clamp(((ed - pd).real() * d.real() +
                                                   (ed - pd).imag() * d.imag()) / l2,
                                                  0.0, 1.0);
                double dist = std::abs(ed - (pd + t * d));
                double exempt = std::min(std::abs(ed - pd), std::abs(ed - qd));
                if (dist < clearance && exempt > 1e-12 && dist < 0.9 * exempt) return false;
            }
        }
        return true;
    };
    if (admissible(from, to)) return {from, to};

    // candidate waypoints: rings around the endpoints and around the origin
    std::vector<Complex> cands{from, to};
    std::vector<Complex> eps = fc.endpoints();
    auto minsep = [&](const Complex &e) {
        double m = 1e300;
        for (const Complex &o : eps)
            if (!(o == e)) m = std::min(m, std::abs(to_cd(o) - to_cd(e)));
        return m;
    };
    for (const Complex &e : eps) {
        double r0 = minsep(e);
        for (double r : {0.35 * r0, 0.9 * r0}) {
            for (int k = 0; k < 8; ++k) {
                double th = 2.0 * M_PI * k / 8.0 + 0.19;
                cands.push_back(e + Complex(r * std::cos(th), r * std::sin(th)));
            }
        }
    }
    double rin = 0.55 * fc.min_abs(), rout = 1.9 * fc.max_abs();
    for (double r : {rin, rout}) {
        for (int k = 0; k < 12; ++k) {
            double th = 2.0 * M_PI * k / 12.0 + 0.07;
            cands.push_back(Complex(r * std::cos(th), r * std::sin(th)));
        }
    }

    const size_t n = cands.size();
    std::vector<double> dist(n, 1e300);
    std::vector<int> prev(n, -1);
    std::vector<bool> done(n, false);
    dist[0] = 0.0;
    using Item = std::pair<double, size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, 0});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = true;
        if (u == 1) break;
        for (size_t v = 0; v < n; ++v) {
            if (done[v]) continue;
            double w = std::abs(to_cd(cands[u]) - to_cd(cands[v]));
            if (d + w >= dist[v]) continue;
            if (!admissible(cands[u], cands[v])) continue;
            dist[v] = d + w;
            prev[v] = static_cast<int>(u);
            pq.push({dist[v], v});
        }
    }
    if (prev[1] < 0 && dist[1] > 1e299)
        throw PathError("route_avoiding: no admissible path found");
    std::vector<Complex> path;
    for (int v = 1; v != -1; v = prev[v]) path.push_back(cands[static_cast<size_t>(v)]);
    std::reverse(path.begin(), path.end());
    return path;
}

int march_log_ratio(const Complex &r1, const Complex &r2, const std::vector<Complex> &path,
                    int k_start) {
    cd a = to_cd(r1), b = to_cd(r2);
    auto ratio_arg = [&](const cd &z) { return std::arg((z - a) / (z - b)); };

    double carg = ratio_arg(to_cd(path.front())) + 2.0 * M_PI * k_start;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        cd p = to_cd(path[i]), q = to_cd(path[i + 1]);
        // adaptive marching: halve the step until each hop moves arg < pi/2
        size_t steps = 1;
        bool ok = false;
        for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
            ok = true;
            double test = carg;
            for (size_t s = 1; s <= steps; ++s) {
                cd z = p + (q - p) * (static_cast<double>(s) / steps);
                double pa = ratio_arg(z);
                double d = std::remainder(pa - test, 2.0 * M_PI);
                if (std::abs(d) > M_PI / 2.0) {
                    ok = false;
                    steps *= 2;
                    break;
                }
                test += d;
            }
            if (ok) carg = test;
        }
        if (!ok) throw BranchError("march_log_ratio: step subdivision exhausted");
    }
    double pend = ratio_arg(to_cd(path.back()));
    return static_cast<int>(std::lround((carg - pend) / (2.0 * M_PI)));
}

std::vector<Complex> unwrap_log(const std::vector<Complex> &values, int k0) {
    std::vector<Complex> out;
    out.reserve(values.size());
    Real two_pi = Real::pi() * 2.0;
    Real shift = two_pi * Real(static_cast<long>(k0));
    Real prev_im(0L);
    for (size_t k = 0; k < values.size(); ++k) {
        Complex l = log(values[k]);
        if (k == 0) {
            l.im += shift;
        } else {
            // pull the imaginary part to the branch nearest the previous one
            Real d = l.im - prev_im;
            Real adj = round_nearest(d / two_pi);
            l.im -= adj * two_pi;
        }
        prev_im = l.im;
        out.push_back(l);
    }
    return out;
}

}  // namespace padelab
