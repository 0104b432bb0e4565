#pragma once

#include "padelab/complex.hpp"
#include "padelab/context.hpp"
#include "padelab/errors.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace padelab {

/// Jukovski map (z + 1/z)/2.
Complex jukovski(const Complex &z);

/// Pull a parameter into the closed unit disk via a <-> 1/a (the branch set
/// {a, 1/a, b, 1/b} is invariant). Throws on |a| in {0, 1}.
Complex normalize_parameter(const Complex &a);

enum class ArcLabel : int { FaInv = 0, Fm1 = 1, Fp1 = 2, Fa = 3 };
const char *arc_label_name(ArcLabel l);

/// Oriented polyline arc of the compact. The cut arcs are stored as
/// F_{a^-1}: a^-1 -> b^-1 and F_a: b -> a; the loop arcs F_1, F_-1 are
/// oriented so that F_1 u F_-1 is a counterclockwise Jordan curve (positive
/// winding about the origin), which keeps D_0 on the positive side.
struct Arc {
    ArcLabel label;
    std::vector<Complex> pts;
    bool empty() const { return pts.size() < 2; }
    size_t segments() const { return pts.empty() ? 0 : pts.size() - 1; }
};

struct TrajectoryConfig {
    double step = 0.006;      // arclength step
    double maxlen = 60.0;     // abort length
    double matchtol = 5e-4;   // arc-junction tolerance (>= 10 step^2)
};

enum class PointClass { D0, DInf, OnF };

/// Chebotarev point b for the parameter a in D\{0}: +-1 for real a, otherwise
/// the solution of the two real trajectory conditions
/// Re int_a^b v dt/t = 0 and Re int_b^1 v dt/t = 0, Newton from b0 = a/|a|.
Complex chebotarev_center(const Complex &a, const PrecisionContext &ctx);

class BuslaevCompact {
  public:
    /// Normalizes a, solves for b, traces (or parameterizes) the four arcs.
    static BuslaevCompact build(const Complex &a, const TrajectoryConfig &cfg,
                                const PrecisionContext &ctx);

    const Complex &a() const { return a_; }
    const Complex &b() const { return b_; }
    bool real_case() const { return real_case_; }
    Complex a_inv() const { return Complex(1L) / a_; }
    Complex b_inv() const { return Complex(1L) / b_; }
    std::vector<Complex> endpoints() const;

    const Arc &arc(ArcLabel l) const { return arcs_[static_cast<int>(l)]; }
    const std::array<Arc, 4> &arcs() const { return arcs_; }

    /// Euclidean distance from z to the traced compact.
    double distance(const Complex &z) const;
    /// Chordal (spherical) distance from z to the compact.
    double chordal_distance_to(const Complex &z) const;
    PointClass classify(const Complex &z, double on_tol = 1e-9) const;

    /// Number of proper crossings of the open segment (p,q) with the arc.
    int crossings(const Complex &p, const Complex &q, ArcLabel l) const;
    int crossings_all(const Complex &p, const Complex &q) const;

    /// Even/odd test for the region between the chord [e1,e2] and the traced
    /// arc (used to push straight branch cuts onto the curved arcs).
    bool in_lens(const Complex &z, ArcLabel l) const;

    double min_abs() const;
    double max_abs() const;

    void write_csv(std::ostream &os) const;

  private:
    Complex a_{0.0}, b_{0.0};
    bool real_case_ = false;
    std::array<Arc, 4> arcs_;
};

/// sqrt((z-e1)(z-e2)) with branch cut on the straight chord [e1,e2],
/// asymptotic to z at infinity.
Complex straight_cut_sqrt(const Complex &z, const Complex &e1, const Complex &e2);

/// Sheet-0 branch of w(z) = sqrt((z-a)(z-1/a)(z-b)(z-1/b)) for non-real a:
/// holomorphic off F_a u F_{a^-1} (cuts along the traced arcs), w ~ z^2 at
/// infinity. Trace values on the cut arcs are available per polyline segment.
class QuarticBranch {
  public:
    explicit QuarticBranch(const BuslaevCompact &fc);

    const BuslaevCompact &compact() const { return *fc_; }
    Complex w0(const Complex &z) const;
    /// (z-b)(z-b^-1)/w0(z).
    Complex v0(const Complex &z) const;
    /// One-sided trace of w0 on a cut-arc segment; side +1 is the left of the
    /// arc orientation.
    Complex w0_trace(ArcLabel cut, size_t segment, const Complex &s, int side) const;

  private:
    Complex scs_pair(const Complex &z) const;
    const BuslaevCompact *fc_;
    // per cut arc, per segment: sign of w0 relative to the chord-cut product
    // on the + side; the - side is the opposite on a cut.
    std::array<std::vector<int>, 4> side_sign_;
};

/// Quadrature table for integrals over one traced arc: the integral of a
/// function smooth on each polyline segment is sum f(s_k) dsw_k. Endpoint
/// segments (and optional interior singular points) use tanh-sinh nodes so
/// integrable endpoint singularities converge; interior segments use
/// Gauss-Legendre.
struct ArcTable {
    std::vector<Complex> s;    // nodes, in arc order
    std::vector<Complex> dsw;  // directed weights
    std::vector<size_t> segment_of;  // polyline segment index per node
};

ArcTable build_arc_table(const Arc &arc, const PrecisionContext &ctx, int gl_order = 24,
                         int ts_level = 5, const std::vector<Complex> &singular_interior = {});

/// Directed quadrature sum over a straight sub-segment [p,q] of f, tanh-sinh.
Complex segment_integral(const std::function<Complex(const Complex &)> &f, const Complex &p,
                         const Complex &q, const PrecisionContext &ctx, const Real &tol);

}  // namespace padelab
