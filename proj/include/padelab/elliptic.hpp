#pragma once

#include "padelab/germs.hpp"

#include <memory>
#include <optional>

namespace padelab {

/// Point of the genus-1 surface w^2 = (z-a)(z-1/a)(z-b)(z-1/b), realized as
/// two copies of the plane glued crosswise along the cut arcs F_a, F_{a^-1}.
/// w on sheet i is (-1)^i w0 with w0 the sheet-0 branch (~ z^2 at infinity).
struct SurfacePoint {
    Complex z;
    int sheet = 0;
};

/// Complex-parameter asymptotic model: Nuttall differential periods, the
/// exponential map Phi, holomorphic-differential data (Abel map, B), the
/// Szego function S_h on the surface, Riemann theta, Jacobi inversion per n,
/// and the model functions Q_n, R_n with their starred companions.
///
/// Homology conventions: the alpha cycle lies over F_1 (stored orientation),
/// gamma over F_-1, beta over F_{a^-1} and delta over F_a with the bank
/// pairing that makes rho/h the natural trace; the residual +-1 orientation
/// freedom of (alpha, beta) is resolved at build time by Im B > 0 together
/// with the Riemann relation and the Abel-map cycle jumps.
class SurfaceModel {
  public:
    SurfaceModel(const WeightOnCompact &weight, const PrecisionContext &ctx);
    ~SurfaceModel();

    const BuslaevCompact &compact() const;
    const WeightOnCompact &weight() const { return *weight_; }

    // periods (omega, tau real; Im B > 0)
    Complex omega() const;
    Complex tau() const;
    Complex B() const;
    Complex C_norm() const;
    Real period_imag_defect() const;
    /// | a(inf^1) - a(0^1) - (omega + B tau) | reduced mod Z + BZ.
    Real riemann_relation_residual() const;
    /// (1/2pi i) cycle integral of lambda_h H over Delta.
    Complex lambda_H_integral() const;

    Complex w_at(const SurfacePoint &p) const;
    /// Path-library determinations (paths from the ramification point over a,
    /// crossing only F_a and F_-1).
    Complex abel(const SurfacePoint &p) const;
    Complex Phi(const SurfacePoint &p) const;
    Complex A_sigma(const Complex &sigma, const SurfacePoint &p) const;
    Complex S_h(const SurfacePoint &p) const;

    Complex abel_infinity(int sheet) const;
    Complex abel_zero(int sheet) const;
    Complex Phi_infinity0() const;       // finite value at inf^(0)
    Complex Phi_leading_coeff() const;   // lim Phi(z^(1))/z
    Complex S_h_infinity(int sheet) const;

    /// theta(u) = sum exp(pi i B n^2 + 2 pi i u n), truncated to the tail
    /// bound below tol; theta(u + j + Bm) quasi-periodicity is exact in the
    /// reduction.
    Complex theta(const Complex &u) const;
    Complex theta_deriv(const Complex &u) const;

    struct JIPSolution {
        long n = 0;
        SurfacePoint z_n;
        long j_n = 0, m_n = 0;
        Complex abel_z_n;  // library determination
        SurfacePoint z_n_star;
        long j_n_star = 0, m_n_star = 0;
        Complex abel_z_n_star;
        bool in_N_eps = false;
        Real eps = Real(0L);
        Real residual = Real(0L);  // jip residual mod lattice
    };
    /// Solve the Jacobi inversion problem for index n: theta-zero scan over a
    /// cached two-sheet grid, then Newton in the local coordinate.
    const JIPSolution &jip(long n, const Real &eps);

    /// theta-quotient with a simple zero at p and simple pole at inf^(0).
    Complex theta_quotient(const Complex &abel_p, const SurfacePoint &z) const;
    Complex Theta_n(const JIPSolution &sol, const SurfacePoint &z) const;
    Complex Psi_n(const JIPSolution &sol, const SurfacePoint &z) const;
    /// Psi*_n from the starred inversion data of the same index.
    Complex Psi_n_star(const JIPSolution &sol, const SurfacePoint &z) const;

    /// Piecewise model functions at index n (requires n in N_eps); the
    /// starred companions carry index n-1.
    struct ModelValues {
        Complex Q, R, Qstar, Rstar;
        Complex gamma_n, gamma_star;
    };
    ModelValues model_QR(long n, const Real &eps, const Complex &z);
    Complex gamma_n(const JIPSolution &sol) const;
    Complex gamma_star(const JIPSolution &sol_prev) const;

    /// g(z) = log|Phi| on the lift into D_Q = D_0^(0) u Dinf^(1).
    Real g(const Complex &z) const;

    /// Lift z into D_Q or D_R.
    SurfacePoint lift_Q(const Complex &z) const;
    SurfacePoint lift_R(const Complex &z) const;

  private:
    struct Impl;
    const WeightOnCompact *weight_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace padelab
