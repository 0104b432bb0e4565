#pragma once

#include "padelab/germs.hpp"
#include "padelab/polynomial.hpp"

#include <optional>
#include <string>

namespace padelab {

/// Two-point Pade approximant of type (n1, n2), n1 + n2 = 2n + 1:
/// (Q f0 - P)(z) = O(z^{n1}) at 0 and (Q finf - P)(z) = O(z^{n-n2}) at infinity,
/// deg P, deg Q <= n. The ratio P/Q is unique; Q is monic when deg Q = n,
/// otherwise the minimal-degree solution is returned flagged degenerate.
struct PadeApproximant {
    long n = 0, n1 = 0, n2 = 0;
    Polynomial P, Q;
    bool monic = false;
    bool degenerate = false;
    Real interp_residual = Real(0L);  // scaled max residual over both blocks

    Complex eval(const Complex &z) const { return P.eval(z) / Q.eval(z); }
    std::string to_json(const Complex *a_n = nullptr) const;
};

PadeApproximant pade_solve(const PowerSeriesPair &pair, long n1, long n2,
                           const PrecisionContext &ctx);

/// Type (n, n-1) companion approximant (degrees <= n-1).
PadeApproximant pade_star(const PowerSeriesPair &pair, long n, const PrecisionContext &ctx);

/// Linearized errors R_n(z) = z^-n (Q_n f_rho - P_n)(z) and the starred
/// variant computed against the weight's Cauchy transform.
struct LinearizedError {
    const PadeApproximant *owner;
    bool starred;  // R*_{n-1} with the z^-n scaling of its parent index n
    long n;        // the scaling index
};

Complex linearized_error_eval(const LinearizedError &err, const Complex &z,
                              const WeightOnCompact &w, const PrecisionContext &ctx);

/// 1/a_n = -(1/2pi i) int_F Q*_{n-1}(s) s^-1 rho(s) ds; infinite flag when the
/// integral vanishes below tolerance.
struct AnResult {
    Complex value;
    bool infinite;
};
AnResult a_n_compute(const PadeApproximant &star, const WeightOnCompact &w,
                     const PrecisionContext &ctx);

/// max over k in 0..kmax of |int_F Q(s) s^{k-n} rho ds| relative to
/// int |Q| |rho| |ds| scaled by |s|^{k-n} at the worst k.
Real orthogonality_check(const Polynomial &Q, long n, const WeightOnCompact &w,
                         const PrecisionContext &ctx, long kmax);

}  // namespace padelab
