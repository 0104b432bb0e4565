#pragma once

#include "padelab/geometry.hpp"

#include <array>
#include <vector>

namespace padelab {

/// Polyline from `from` to `to` whose segments cross only the arcs flagged in
/// may_cross (indexed by ArcLabel). Candidate waypoints ring the arc endpoints
/// and the two domains; shortest admissible path wins. Throws PathError when
/// no admissible path exists.
/// clearance > 0 additionally keeps legs that far from every arc endpoint
/// (branch point), except near the legs' own endpoints where integrable
/// endpoint singularities are fine.
std::vector<Complex> route_avoiding(const BuslaevCompact &fc, const Complex &from,
                                    const Complex &to, const std::array<bool, 4> &may_cross,
                                    double clearance = 0.0);

/// Branch correction of log((z-r1)/(z-r2)) continued along the polyline path:
/// continued value at the path end = principal value + 2 pi i k. Marching in
/// double precision with adaptive substeps.
int march_log_ratio(const Complex &r1, const Complex &r2, const std::vector<Complex> &path,
                    int k_start = 0);

/// log(values[k]) with the imaginary part unwrapped sequentially, anchored at
/// the principal branch of the first entry (plus 2 pi i k0).
std::vector<Complex> unwrap_log(const std::vector<Complex> &values, int k0 = 0);

}  // namespace padelab
