#pragma once

#include "padelab/germs.hpp"

#include <memory>

namespace padelab {

/// Real-parameter asymptotic model: conformal maps w, phi, phi_hat, the Szego
/// functions D (circle) and S (segment), the model functions Q_n, R_n and
/// their starred companions, and the normalization constants gamma_n.
/// Roots of negative reals follow sqrt(x) = i sqrt(|x|).
class RealModel {
  public:
    RealModel(const WeightSpec &spec, const BuslaevCompact &fc, const PrecisionContext &ctx);
    ~RealModel();

    const BuslaevCompact &compact() const { return *fc_; }
    const WeightSpec &weight() const { return spec_; }

    /// sqrt((z-a)(z-1/a)) with cut [1/a, a], w(z) = z + O(1) at infinity.
    Complex w(const Complex &z) const;
    /// One-sided trace on the open cut; side +1 is the left of the
    /// orientation from 1/a to a (purely imaginary values).
    Complex w_trace(const Complex &s, int side) const;

    Complex phi(const Complex &z) const;       // (z + b + w)/(sqrt a + sqrt 1/a)
    Complex phi_hat(const Complex &z) const;   // (z - b - w)/(sqrt a - sqrt 1/a)
    Complex phi_trace(const Complex &s, int side) const;
    Complex phi_hat_trace(const Complex &s, int side) const;

    /// h evaluated off F (analytic near F minus the endpoints).
    Complex h(const Complex &z) const { return spec_.h_real(fc_->a(), z); }
    /// h-hat = D^2 h^{-1} inside the unit circle, D^2 h outside, on the cut.
    Complex h_hat(const Complex &s) const;

    /// Circle Szego function: exp of the Cauchy integral of log h over T.
    /// D_+ = D_- h on T; D(infinity) = 1. Evaluation near T deforms the
    /// contour into the analyticity collar of h.
    Complex D(const Complex &z) const;
    /// Segment Szego function: S_+ S_- = h-hat on the cut, nonvanishing off it.
    Complex S(const Complex &z) const;
    Complex S_infinity() const;

    Complex Q_model(long n, const Complex &z) const;
    Complex R_model(long n, const Complex &z) const;
    Complex Qstar_model(long n_minus_1, const Complex &z) const;
    Complex Rstar_model(long n_minus_1, const Complex &z) const;

    struct Gammas {
        Complex gamma_n;
        Complex gamma_star;   // gamma*_{n-1}
        Real identity_residual;  // |(gamma_n gamma*_{n-1})^{-1} + 4/(2b+a+1/a)|
    };
    Gammas normalize_gammas(long n) const;

    /// Leading term of f_rho - P_n/Q_n.
    Complex predicted_error(long n, const Complex &z) const;

    /// Green-type function: log|phi| in Dinf, log|z/phi| in D0.
    Real g(const Complex &z) const;

  private:
    struct Impl;
    WeightSpec spec_;
    const BuslaevCompact *fc_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace padelab
