#pragma once

#include <mpfr.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace padelab {

/// Working mantissa precision in bits shared by every Real created afterwards.
/// One run uses one precision; see PrecisionContext.
long working_precision() noexcept;
void set_working_precision(long bits);

/// Arbitrary-precision real scalar backed by MPFR, round-to-nearest throughout.
class Real {
  public:
    Real() { mpfr_init2(v_, working_precision()); mpfr_set_zero(v_, 1); }
    Real(double x) { mpfr_init2(v_, working_precision()); mpfr_set_d(v_, x, MPFR_RNDN); }
    Real(long x) { mpfr_init2(v_, working_precision()); mpfr_set_si(v_, x, MPFR_RNDN); }
    Real(int x) : Real(static_cast<long>(x)) {}
    explicit Real(const std::string &s) {
        mpfr_init2(v_, working_precision());
        if (mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0)
            throw std::invalid_argument("Real: cannot parse '" + s + "'");
    }

    Real(const Real &o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    Real(Real &&o) noexcept {
        v_[0] = o.v_[0];
        o.owned_ = false;
    }
    Real &operator=(const Real &o) {
        if (this != &o) {
            if (!owned_) { mpfr_init2(v_, mpfr_get_prec(o.v_)); owned_ = true; }
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Real &operator=(Real &&o) noexcept {
        if (this != &o) {
            if (owned_) mpfr_clear(v_);
            v_[0] = o.v_[0];
            owned_ = o.owned_;
            o.owned_ = false;
        }
        return *this;
    }
    ~Real() {
        if (owned_) mpfr_clear(v_);
    }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }
    long precision() const { return mpfr_get_prec(v_); }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }

    /// Decimal string with the given number of significant digits.
    std::string str(int digits = 40) const;

    bool is_nan() const { return mpfr_nan_p(v_) != 0; }
    bool is_inf() const { return mpfr_inf_p(v_) != 0; }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

    Real operator-() const {
        Real r(*this);
        mpfr_neg(r.v_, r.v_, MPFR_RNDN);
        return r;
    }

    Real &operator+=(const Real &o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real &operator-=(const Real &o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real &operator*=(const Real &o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real &operator/=(const Real &o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real &operator*=(long k) { mpfr_mul_si(v_, v_, k, MPFR_RNDN); return *this; }
    Real &operator/=(long k) { mpfr_div_si(v_, v_, k, MPFR_RNDN); return *this; }

    static Real pi();
    static Real nan() {
        Real r;
        mpfr_set_nan(r.v_);
        return r;
    }
    /// 2^e as a Real.
    static Real pow2(long e) {
        Real r(1L);
        mpfr_mul_2si(r.v_, r.v_, e, MPFR_RNDN);
        return r;
    }

  private:
    mpfr_t v_;
    bool owned_ = true;
};

inline Real operator+(Real a, const Real &b) { a += b; return a; }
inline Real operator-(Real a, const Real &b) { a -= b; return a; }
inline Real operator*(Real a, const Real &b) { a *= b; return a; }
inline Real operator/(Real a, const Real &b) { a /= b; return a; }

inline Real operator+(Real a, double b) { return a += Real(b); }
inline Real operator-(Real a, double b) { return a -= Real(b); }
inline Real operator*(Real a, double b) { return a *= Real(b); }
inline Real operator/(Real a, double b) { return a /= Real(b); }
inline Real operator+(double a, const Real &b) { return Real(a) + b; }
inline Real operator-(double a, const Real &b) { return Real(a) - b; }
inline Real operator*(double a, const Real &b) { return Real(a) * b; }
inline Real operator/(double a, const Real &b) { return Real(a) / b; }

inline bool operator<(const Real &a, const Real &b) { return mpfr_less_p(a.raw(), b.raw()) != 0; }
inline bool operator>(const Real &a, const Real &b) { return mpfr_greater_p(a.raw(), b.raw()) != 0; }
inline bool operator<=(const Real &a, const Real &b) { return mpfr_lessequal_p(a.raw(), b.raw()) != 0; }
inline bool operator>=(const Real &a, const Real &b) { return mpfr_greaterequal_p(a.raw(), b.raw()) != 0; }
inline bool operator==(const Real &a, const Real &b) { return mpfr_equal_p(a.raw(), b.raw()) != 0; }
inline bool operator!=(const Real &a, const Real &b) { return !(a == b); }

#define PADELAB_REAL_UNARY(name, mpfr_fn)                                                          \
    inline Real name(const Real &x) {                                                             \
        Real r;                                                                                    \
        mpfr_fn(r.raw(), x.raw(), MPFR_RNDN);                                                      \
        return r;                                                                                  \
    }

PADELAB_REAL_UNARY(abs, mpfr_abs)
PADELAB_REAL_UNARY(sqrt, mpfr_sqrt)
PADELAB_REAL_UNARY(exp, mpfr_exp)
PADELAB_REAL_UNARY(log, mpfr_log)
PADELAB_REAL_UNARY(sin, mpfr_sin)
PADELAB_REAL_UNARY(cos, mpfr_cos)
PADELAB_REAL_UNARY(tan, mpfr_tan)
PADELAB_REAL_UNARY(atan, mpfr_atan)
PADELAB_REAL_UNARY(sinh, mpfr_sinh)
PADELAB_REAL_UNARY(cosh, mpfr_cosh)
PADELAB_REAL_UNARY(tanh, mpfr_tanh)
#undef PADELAB_REAL_UNARY

inline Real floor(const Real &x) {
    Real r;
    mpfr_rint(r.raw(), x.raw(), MPFR_RNDD);
    return r;
}
inline Real ceil(const Real &x) {
    Real r;
    mpfr_rint(r.raw(), x.raw(), MPFR_RNDU);
    return r;
}

inline Real atan2(const Real &y, const Real &x) {
    Real r;
    mpfr_atan2(r.raw(), y.raw(), x.raw(), MPFR_RNDN);
    return r;
}
inline Real hypot(const Real &x, const Real &y) {
    Real r;
    mpfr_hypot(r.raw(), x.raw(), y.raw(), MPFR_RNDN);
    return r;
}
inline Real pow(const Real &x, const Real &y) {
    Real r;
    mpfr_pow(r.raw(), x.raw(), y.raw(), MPFR_RNDN);
    return r;
}
inline Real pow(const Real &x, long k) {
    Real r;
    mpfr_pow_si(r.raw(), x.raw(), k, MPFR_RNDN);
    return r;
}
inline Real ldexp(const Real &x, long e) {
    Real r;
    mpfr_mul_2si(r.raw(), x.raw(), e, MPFR_RNDN);
    return r;
}
inline Real round_nearest(const Real &x) {
    Real r;
    mpfr_rint(r.raw(), x.raw(), MPFR_RNDN);
    return r;
}
inline Real min(const Real &a, const Real &b) { return a <= b ? a : b; }
inline Real max(const Real &a, const Real &b) { return a >= b ? a : b; }

}  // namespace padelab
