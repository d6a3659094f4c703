#pragma once

#include <complex>
#include <string>

#include <gmpxx.h>

namespace epchain {

// Exact complex number with arbitrary-precision rational real and imaginary parts.
class ComplexRational {
 public:
  ComplexRational() = default;
  ComplexRational(mpq_class re, mpq_class im = 0);
  ComplexRational(long re) : ComplexRational(mpq_class(re)) {}

  // Exact value of the IEEE double (no decimal rounding).
  static ComplexRational from_double(double re, double im = 0.0);
  static ComplexRational i() { return {0, 1}; }

  const mpq_class& re() const { return re_; }
  const mpq_class& im() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  bool is_real() const { return sgn(im_) == 0; }
  ComplexRational conj() const { return {re_, -im_}; }
  std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

  ComplexRational& operator+=(const ComplexRational& o);
  ComplexRational& operator-=(const ComplexRational& o);
  ComplexRational& operator*=(const ComplexRational& o);

  friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) { return a += b; }
  friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) { return a -= b; }
  friend ComplexRational operator*(ComplexRational a, const ComplexRational& b) { return a *= b; }
  friend ComplexRational operator-(const ComplexRational& a) { return {-a.re_, -a.im_}; }
  ComplexRational operator/(const mpq_class& d) const { return {re_ / d, im_ / d}; }

  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  std::string to_string() const;

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

// "p/q" or "p"; throws UsageError on malformed input.
mpq_class parse_rational(const std::string& text);
std::string rational_string(const mpq_class& q);

}  // namespace epchain
