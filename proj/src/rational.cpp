#include "udist/rational.hpp"

#include <cmath>
#include <limits>

namespace udist {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr __int128 kMax64 = std::numeric_limits<std::int64_t>::max();

}  // namespace

void Rational::assign(__int128 n, __int128 d) {
  if (d == 0) throw PreconditionError("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const __int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  if (n > kMax64 || n < -kMax64 || d > kMax64) throw CapExceeded("rational arithmetic exceeds 64-bit precision");
  num_ = static_cast<std::int64_t>(n);
  den_ = static_cast<std::int64_t>(d);
}

Rational Rational::dyadic(std::int64_t n, int e) {
  if (e < 0 || e > 62) throw CapExceeded("dyadic exponent outside [0, 62]");
  Rational r;
  r.assign(n, static_cast<__int128>(1) << e);
  return r;
}

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) throw PreconditionError("cannot convert a non-finite double to a rational");
  if (x == 0) return Rational();
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m 2^e, 0.5 <= |m| < 1
  auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  int shift = e - 53;
  while (shift < 0 && (mant % 2) == 0) {
    mant /= 2;
    ++shift;
  }
  if (shift >= 0) {
    if (shift > 62) throw CapExceeded("double too large for a 64-bit rational");
    const __int128 v = static_cast<__int128>(mant) << shift;
    if (v > kMax64 || v < -kMax64) throw CapExceeded("double too large for a 64-bit rational");
    return Rational(static_cast<std::int64_t>(v));
  }
  return dyadic(mant, -shift);
}

int Rational::dyadic_exponent() const {
  int e = 0;
  std::int64_t d = den_;
  while (d > 1) {
    d >>= 1;
    ++e;
  }
  return e;
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if ((num_ % den_ != 0) && (num_ < 0)) --q;
  return q;
}

std::int64_t Rational::ceil() const {
  std::int64_t q = num_ / den_;
  if ((num_ % den_ != 0) && (num_ > 0)) ++q;
  return q;
}

Rational operator+(const Rational& a, const Rational& b) {
  Rational r;
  r.assign(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
           static_cast<__int128>(a.den_) * b.den_);
  return r;
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  Rational r;
  r.assign(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  return r;
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw PreconditionError("rational division by zero");
  Rational r;
  r.assign(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  return r;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace udist
