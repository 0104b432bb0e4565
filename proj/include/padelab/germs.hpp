#pragma once

#include "padelab/geometry.hpp"
#include "padelab/polynomial.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace padelab {

/// Truncated coefficient pair of formal power series at the origin and at
/// infinity: f0(z) = sum f_{k,0} z^k, finf(z) = sum f_{k,inf} z^-k, k = 0..N.
struct PowerSeriesPair {
    std::vector<Complex> coeffs0;
    std::vector<Complex> coeffs_inf;
    std::string label;
    Complex a;  // family parameter (figure convention; may lie outside the disk)

    long order() const { return static_cast<long>(coeffs0.size()) - 1; }
    Complex c0(long k) const { return k >= 0 && k <= order() ? coeffs0[k] : Complex(0L); }
    Complex cinf(long k) const { return k >= 0 && k <= order() ? coeffs_inf[k] : Complex(0L); }

    /// Truncated series evaluations (inside the respective convergence region).
    Complex eval0(const Complex &z) const;
    Complex eval_inf(const Complex &z) const;

    std::string to_json() const;
    static PowerSeriesPair from_json(const std::string &text);
};

/// Log pair f0 = log((z-1)/(z-1/a)), finf = log((z-a)/(z-1)):
/// f_{0,0} = log a, f_{k,0} = (a^k-1)/k, f_{0,inf} = 0, f_{k,inf} = (1-a^k)/k.
PowerSeriesPair germ_log_pair(const Complex &a, long N);

/// Markov pair (1/w, -1/w) for real a: Legendre recurrence in j(a).
PowerSeriesPair germ_markov_pair(const Complex &a, long N);

/// Markov pair for the quartic w (complex a); series inversion of w^2 with the
/// sheet-0 branch at the origin.
PowerSeriesPair germ_markov_pair_complex(const BuslaevCompact &fc, long N,
                                         const PrecisionContext &ctx);

enum class WeightClass { W1, W2 };
enum class WeightFamily { ConstantH, PolynomialH, SqrtRatio, LogPairJump };

/// Weight description. For the real parameter the function h of the class
/// definitions is available as an analytic function near F \ {a, 1/a}; for
/// complex parameters the weight is realized per arc (values, analytic
/// continuation and branch bookkeeping) by WeightOnCompact.
struct WeightSpec {
    WeightClass cls = WeightClass::W2;
    WeightFamily family = WeightFamily::ConstantH;
    Complex hconst = Complex(2L);
    Polynomial hpoly;
    Complex log_a;       // LogPairJump figure parameter
    Real alpha = Real(-0.5), beta = Real(-0.5);

    static WeightSpec markov() { return WeightSpec{}; }  // h == 2
    static WeightSpec constant(const Complex &c);
    static WeightSpec polynomial(Polynomial p);
    /// Real-case W1 sample with alpha = beta = 0: h = sqrt((a-s)(s-1/a)/(s b)).
    static WeightSpec sqrt_ratio();
    /// Complex-case weight realized by the jump of the log pair across F.
    static WeightSpec log_pair_jump(const Complex &a_orig);

    /// h evaluated off the arcs (real case only; analytic near F \ {a,1/a}).
    Complex h_real(const Complex &a, const Complex &z) const;
    /// Safe deformation collar around the unit circle for the real case.
    double circle_collar(const Complex &a) const;

    std::string to_json() const;
    static WeightSpec from_json(const std::string &text);
};

/// Weight bound to a compact: quadrature over F with cached node data.
/// Real case uses exact circle/segment rules; complex case uses per-arc
/// polyline tables with cached rho, h and a continuous determination of
/// lambda_h = -log h along each arc.
class WeightOnCompact {
  public:
    WeightOnCompact(const WeightSpec &spec, const BuslaevCompact &fc, const PrecisionContext &ctx);
    ~WeightOnCompact();
    WeightOnCompact(WeightOnCompact &&) noexcept;

    const WeightSpec &spec() const { return spec_; }
    const BuslaevCompact &compact() const { return *fc_; }
    const QuarticBranch *branch() const;  // complex case only

    /// (1/2pi i) int_F rho(s) s^m ds.
    Complex weighted_moment(long m) const;
    /// f_rho(z) = (1/2pi i) int_F rho(s)/(s-z) ds; requires dist(z,F) > 1e-3.
    Complex cauchy_transform(const Complex &z) const;
    /// int_F Q(s) s^p rho(s) ds (not divided by 2pi i).
    Complex polynomial_moment(const Polynomial &Q, long p) const;
    /// int_F |Q(s)| |rho(s)| |ds|.
    Real polynomial_abs_scale(const Polynomial &Q, long p) const;

    // complex-case caches, aligned with table(label).s
    const ArcTable &table(ArcLabel l) const;
    const std::vector<Complex> &rho_nodes(ArcLabel l) const;
    const std::vector<Complex> &h_nodes(ArcLabel l) const;
    const std::vector<Complex> &lambda_nodes(ArcLabel l) const;
    /// Continuous -log h at an arbitrary point of a given arc segment
    /// (nearest-node branch).
    Complex lambda_at(ArcLabel l, size_t segment, const Complex &s) const;
    Complex rho_at(ArcLabel l, size_t segment, const Complex &s) const;

    /// Endpoint exponents of h at (a, 1/a, b, 1/b) on the surface.
    std::array<Real, 4> h_exponents() const;

  private:
    struct Impl;
    WeightSpec spec_;
    const BuslaevCompact *fc_;
    std::unique_ptr<Impl> impl_;
};

/// Coefficients of the Cauchy transform f_rho over F:
/// f_{k,0} = (1/2pi i) int rho s^{-k-1} ds, f_{k,inf} = -(1/2pi i) int rho s^{k-1} ds.
PowerSeriesPair germ_from_weight(const WeightSpec &spec, const BuslaevCompact &fc, long N,
                                 const PrecisionContext &ctx);
PowerSeriesPair germ_from_weight(const WeightOnCompact &w, long N, const PrecisionContext &ctx);

}  // namespace padelab
