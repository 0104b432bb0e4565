#pragma once

#include "padelab/real.hpp"

#include <string>

namespace padelab {

/// Complex scalar at working precision. Finite-value arithmetic; NaN propagation
/// is treated as an error state by the checks in errors.hpp.
struct Complex {
    Real re, im;

    Complex() : re(0L), im(0L) {}
    Complex(Real r) : re(std::move(r)), im(0L) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
    Complex(double r) : re(r), im(0L) {}
    Complex(double r, double i) : re(r), im(i) {}
    Complex(long r) : re(r), im(0L) {}
    Complex(int r) : re(static_cast<long>(r)), im(0L) {}

    bool is_finite() const { return re.is_finite() && im.is_finite(); }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }

    Complex operator-() const { return Complex(-re, -im); }

    Complex &operator+=(const Complex &o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    Complex &operator-=(const Complex &o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    Complex &operator*=(const Complex &o) {
        Real r = re * o.re - im * o.im;
        Real i = re * o.im + im * o.re;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }
    Complex &operator/=(const Complex &o) {
        Real d = o.re * o.re + o.im * o.im;
        Real r = (re * o.re + im * o.im) / d;
        Real i = (im * o.re - re * o.im) / d;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }
    Complex &operator*=(const Real &s) {
        re *= s;
        im *= s;
        return *this;
    }
    Complex &operator/=(const Real &s) {
        re /= s;
        im /= s;
        return *this;
    }

    std::string str(int digits = 40) const { return "(" + re.str(digits) + ", " + im.str(digits) + ")"; }
};

inline Complex operator+(Complex a, const Complex &b) { a += b; return a; }
inline Complex operator-(Complex a, const Complex &b) { a -= b; return a; }
inline Complex operator*(Complex a, const Complex &b) { a *= b; return a; }
inline Complex operator/(Complex a, const Complex &b) { a /= b; return a; }
inline Complex operator*(Complex a, const Real &s) { a *= s; return a; }
inline Complex operator*(const Real &s, Complex a) { a *= s; return a; }
inline Complex operator/(Complex a, const Real &s) { a /= s; return a; }
inline Complex operator+(Complex a, const Real &s) { a.re += s; return a; }
inline Complex operator+(const Real &s, Complex a) { a.re += s; return a; }
inline Complex operator-(Complex a, const Real &s) { a.re -= s; return a; }
inline Complex operator-(const Real &s, const Complex &a) { return Complex(s - a.re, -a.im); }
inline Complex operator*(Complex a, double s) { return a *= Real(s); }
inline Complex operator*(double s, Complex a) { return a *= Real(s); }
inline Complex operator/(Complex a, double s) { return a /= Real(s); }
inline Complex operator+(Complex a, double s) { a.re += Real(s); return a; }
inline Complex operator-(Complex a, double s) { a.re -= Real(s); return a; }

inline bool operator==(const Complex &a, const Complex &b) { return a.re == b.re && a.im == b.im; }
inline bool operator!=(const Complex &a, const Complex &b) { return !(a == b); }

inline Complex conj(const Complex &z) { return Complex(z.re, -z.im); }
inline Real norm(const Complex &z) { return z.re * z.re + z.im * z.im; }
inline Real abs(const Complex &z) { return hypot(z.re, z.im); }
inline Real arg(const Complex &z) { return atan2(z.im, z.re); }

inline Complex polar(const Real &r, const Real &theta) { return Complex(r * cos(theta), r * sin(theta)); }

/// Principal square root (cut along the negative reals).
inline Complex sqrt(const Complex &z) {
    if (z.im.is_zero()) {
        if (z.re.sign() >= 0) return Complex(sqrt(z.re), Real(0L));
        return Complex(Real(0L), sqrt(-z.re));
    }
    Real m = abs(z);
    Real t = sqrt((m + abs(z.re)) / 2.0);
    if (z.re.sign() >= 0) return Complex(t, z.im / (t * 2.0));
    Real u = abs(z.im) / (t * 2.0);
    if (z.im.sign() >= 0) return Complex(u, t);
    return Complex(u, -t);
}

/// Principal logarithm.
inline Complex log(const Complex &z) { return Complex(log(abs(z)), arg(z)); }

inline Complex exp(const Complex &z) {
    Real m = exp(z.re);
    return Complex(m * cos(z.im), m * sin(z.im));
}

/// Integer power by repeated squaring; branch-free.
inline Complex pow(const Complex &z, long k) {
    if (k == 0) return Complex(1L);
    bool inv = k < 0;
    unsigned long n = inv ? static_cast<unsigned long>(-(k + 1)) + 1UL : static_cast<unsigned long>(k);
    Complex base = z, acc(1L);
    while (n) {
        if (n & 1UL) acc *= base;
        base *= base;
        n >>= 1;
    }
    if (inv) return Complex(1L) / acc;
    return acc;
}

/// Principal power z^w = exp(w log z).
inline Complex pow(const Complex &z, const Complex &w) { return exp(w * log(z)); }
inline Complex pow(const Complex &z, const Real &a) { return exp(Complex(a) * log(z)); }

inline Complex from_doubles(double re, double im) { return Complex(re, im); }

/// Chordal (spherical) distance 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)).
inline Real chordal_distance(const Complex &z, const Complex &w) {
    return 2.0 * abs(z - w) / sqrt((1.0 + norm(z)) * (1.0 + norm(w)));
}

}  // namespace padelab
