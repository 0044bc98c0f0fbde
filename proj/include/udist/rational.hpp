#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>

#include "udist/errors.hpp"

namespace udist {

// Exact rational with 64-bit numerator and positive denominator, always in
// lowest terms. Intermediate products use 128 bits; a result that does not
// fit in 64 bits raises CapExceeded.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT: implicit from integers
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  // n / 2^e, e >= 0.
  static Rational dyadic(std::int64_t n, int e);
  // The exact value of a finite double; CapExceeded when it needs more than 64 bits.
  static Rational from_double(double x);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_dyadic() const { return (den_ & (den_ - 1)) == 0; }
  // Exponent e with den = 2^e; only meaningful when is_dyadic().
  int dyadic_exponent() const;

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  long double to_long_double() const { return static_cast<long double>(num_) / static_cast<long double>(den_); }
  std::int64_t floor() const;
  std::int64_t ceil() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 l = static_cast<__int128>(a.num_) * b.den_;
    const __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  std::string str() const;

 private:
  void assign(__int128 n, __int128 d);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace udist
