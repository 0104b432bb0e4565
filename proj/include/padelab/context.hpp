#pragma once

#include "padelab/real.hpp"

#include <stdexcept>

namespace padelab {

/// Precision context shared by a whole run. Installing it fixes the working
/// precision for every Real constructed afterwards; tol defaults to 2^(-bits/2),
/// splitting the budget between conditioning loss and verification headroom.
struct PrecisionContext {
    long bits;
    Real tol;

    static PrecisionContext install(long bits_) {
        if (bits_ < 53) throw std::invalid_argument("PrecisionContext: bits must be >= 53");
        set_working_precision(bits_);
        PrecisionContext ctx;
        ctx.bits = bits_;
        ctx.tol = Real::pow2(-bits_ / 2);
        return ctx;
    }

    /// Finite-difference step for Jacobians, 2^(-bits/3).
    Real fd_step() const { return Real::pow2(-bits / 3); }

  private:
    PrecisionContext() : bits(0), tol(0L) {}
};

}  // namespace padelab
