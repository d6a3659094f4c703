#include "epchain/rational.hpp"

#include <cmath>

#include "epchain/error.hpp"

namespace epchain {

ComplexRational::ComplexRational(mpq_class re, mpq_class im)
    : re_(std::move(re)), im_(std::move(im)) {
  re_.canonicalize();
  im_.canonicalize();
}

ComplexRational ComplexRational::from_double(double re, double im) {
  if (!std::isfinite(re) || !std::isfinite(im)) {
    throw UsageError("non-finite coefficient");
  }
  mpq_class r(re);
  mpq_class i(im);
  return {r, i};
}

ComplexRational& ComplexRational::operator+=(const ComplexRational& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

ComplexRational& ComplexRational::operator-=(const ComplexRational& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

ComplexRational& ComplexRational::operator*=(const ComplexRational& o) {
  // Real and purely imaginary factors dominate in practice.
  if (sgn(im_) == 0 && sgn(o.im_) == 0) {
    re_ *= o.re_;
    return *this;
  }
  mpq_class re = re_ * o.re_ - im_ * o.im_;
  mpq_class im = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

std::string ComplexRational::to_string() const {
  if (is_real()) return rational_string(re_);
  if (sgn(re_) == 0) return rational_string(im_) + "i";
  return "(" + rational_string(re_) + (sgn(im_) > 0 ? "+" : "") + rational_string(im_) + "i)";
}

mpq_class parse_rational(const std::string& text) {
  if (text.empty()) throw UsageError("empty rational string");
  mpq_class q;
  if (q.set_str(text, 10) != 0 || text.find_first_of(" \t") != std::string::npos) {
    throw UsageError("malformed rational '" + text + "'");
  }
  if (text.find('/') != std::string::npos && sgn(q.get_den()) == 0) {
    throw UsageError("zero denominator in '" + text + "'");
  }
  q.canonicalize();
  return q;
}

std::string rational_string(const mpq_class& q) {
  mpq_class c(q);
  c.canonicalize();
  return c.get_str(10);
}

}  // namespace epchain
