#pragma once

#include "padelab/complex.hpp"

#include <vector>

namespace padelab {

/// Dense polynomial, coefficients in ascending degree. Trailing coefficient is
/// nonzero unless the polynomial is identically zero.
class Polynomial {
  public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Complex> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Polynomial zero() { return Polynomial(); }
    static Polynomial constant(Complex c) { return Polynomial({std::move(c)}); }
    static Polynomial from_roots(const std::vector<Complex> &roots);

    bool is_zero() const { return c_.empty(); }
    long degree() const { return static_cast<long>(c_.size()) - 1; }
    const std::vector<Complex> &coeffs() const { return c_; }
    const Complex &operator[](size_t k) const { return c_[k]; }
    Complex coeff(long k) const {
        if (k < 0 || k > degree()) return Complex(0L);
        return c_[static_cast<size_t>(k)];
    }
    Complex leading() const { return is_zero() ? Complex(0L) : c_.back(); }

    Complex eval(const Complex &z) const;
    /// Value and derivative in one Horner pass.
    void eval2(const Complex &z, Complex &p, Complex &dp) const;
    Polynomial derivative() const;

    Real max_coeff_abs() const;

    Polynomial &operator*=(const Complex &s);
    Polynomial monic() const;
    /// Drop trailing coefficients of modulus below eps * max|coeff|.
    Polynomial trimmed(const Real &eps) const;

    friend Polynomial operator+(const Polynomial &a, const Polynomial &b);
    friend Polynomial operator-(const Polynomial &a, const Polynomial &b);
    friend Polynomial operator*(const Polynomial &a, const Polynomial &b);

  private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    std::vector<Complex> c_;
};

}  // namespace padelab
