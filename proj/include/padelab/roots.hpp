#pragma once

#include "padelab/context.hpp"
#include "padelab/polynomial.hpp"

#include <vector>

namespace padelab {

struct RootEstimate {
    Complex z;
    Real residual;      // |p(z)| / scale
    int multiplicity;   // by cluster radius tol^(1/m)
    bool converged;     // refinement reached the residual target
};

/// All deg(p) roots. Companion-matrix eigenvalues at double precision seed an
/// Aberth-Ehrlich refinement on p at full precision, down to
/// |p(z)|/scale < tol. Non-converged roots come back flagged with their
/// residual attached.
std::vector<RootEstimate> poly_roots(const Polynomial &p, const PrecisionContext &ctx);

}  // namespace padelab
