#include "padelab/polynomial.hpp"

namespace padelab {

Polynomial Polynomial::from_roots(const std::vector<Complex> &roots) {
    std::vector<Complex> c{Complex(1L)};
    for (const Complex &r : roots) {
        c.push_back(Complex(0L));
        for (size_t k = c.size() - 1; k > 0; --k) c[k] = c[k - 1] - r * c[k];
        c[0] = -r * c[0];
    }
    return Polynomial(std::move(c));
}

Complex Polynomial::eval(const Complex &z) const {
    if (c_.empty()) return Complex(0L);
    Complex p = c_.back();
    for (size_t k = c_.size() - 1; k-- > 0;) p = p * z + c_[k];
    return p;
}

void Polynomial::eval2(const Complex &z, Complex &p, Complex &dp) const {
    p = Complex(0L);
    dp = Complex(0L);
    if (c_.empty()) return;
    p = c_.back();
    for (size_t k = c_.size() - 1; k-- > 0;) {
        dp = dp * z + p;
        p = p * z + c_[k];
    }
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1) return Polynomial();
    std::vector<Complex> d(c_.size() - 1);
    for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * Real(static_cast<long>(k));
    return Polynomial(std::move(d));
}

Real Polynomial::max_coeff_abs() const {
    Real m(0L);
    for (const Complex &c : c_) m = max(m, abs(c));
    return m;
}

Polynomial &Polynomial::operator*=(const Complex &s) {
    for (Complex &c : c_) c *= s;
    trim();
    return *this;
}

Polynomial Polynomial::monic() const {
    if (is_zero()) return *this;
    Polynomial p(*this);
    Complex inv = Complex(1L) / c_.back();
    for (Complex &c : p.c_) c *= inv;
    p.c_.back() = Complex(1L);
    return p;
}

Polynomial Polynomial::trimmed(const Real &eps) const {
    Real cut = eps * max_coeff_abs();
    std::vector<Complex> c = c_;
    while (!c.empty() && abs(c.back()) <= cut) c.pop_back();
    return Polynomial(std::move(c));
}

Polynomial operator+(const Polynomial &a, const Polynomial &b) {
    std::vector<Complex> c(std::max(a.c_.size(), b.c_.size()));
    for (size_t k = 0; k < c.size(); ++k) {
        if (k < a.c_.size()) c[k] += a.c_[k];
        if (k < b.c_.size()) c[k] += b.c_[k];
    }
    return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial &a, const Polynomial &b) {
    std::vector<Complex> c(std::max(a.c_.size(), b.c_.size()));
    for (size_t k = 0; k < c.size(); ++k) {
        if (k < a.c_.size()) c[k] += a.c_[k];
        if (k < b.c_.size()) c[k] -= b.c_[k];
    }
    return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial &a, const Polynomial &b) {
    if (a.is_zero() || b.is_zero()) return Polynomial();
    std::vector<Complex> c(a.c_.size() + b.c_.size() - 1);
    for (size_t i = 0; i < a.c_.size(); ++i)
        for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
}

}  // namespace padelab
