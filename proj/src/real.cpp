#include "padelab/real.hpp"

#include <cstdio>
#include <vector>

namespace padelab {

namespace {
long g_precision = 512;
}

long working_precision() noexcept { return g_precision; }

void set_working_precision(long bits) {
    if (bits < 53) throw std::invalid_argument("working precision must be >= 53 bits");
    g_precision = bits;
}

std::string Real::str(int digits) const {
    if (is_nan()) return "nan";
    if (is_inf()) return sign() > 0 ? "inf" : "-inf";
    std::vector<char> buf(static_cast<size_t>(digits) + 32);
    std::string fmt = "%." + std::to_string(digits - 1) + "Re";
    mpfr_snprintf(buf.data(), buf.size(), fmt.c_str(), v_);
    return std::string(buf.data());
}

Real Real::pi() {
    Real r;
    mpfr_const_pi(r.raw(), MPFR_RNDN);
    return r;
}

}  // namespace padelab
