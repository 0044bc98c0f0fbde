#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string>

#include "udist/errors.hpp"

namespace udist {

inline constexpr int kMaxDim = 8;

// Fixed-capacity point/vector in R^d, 1 <= d <= kMaxDim.
// A default-constructed Vector has dim() == 0 and is only a placeholder.
class Vector {
 public:
  Vector() = default;

  explicit Vector(int dim) : dim_(checked_dim(dim)) {}

  Vector(std::initializer_list<double> coords) : dim_(checked_dim(static_cast<int>(coords.size()))) {
    int i = 0;
    for (double x : coords) c_[i++] = checked_finite(x);
  }

  explicit Vector(std::span<const double> coords) : dim_(checked_dim(static_cast<int>(coords.size()))) {
    for (int i = 0; i < dim_; ++i) c_[i] = checked_finite(coords[i]);
  }

  static Vector unit(int dim, int axis) {
    Vector v(dim);
    v.c_[axis] = 1.0;
    return v;
  }

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }
  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  Vector& operator+=(const Vector& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vector& operator-=(const Vector& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vector& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }

  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator*(Vector a, double s) { return a *= s; }
  friend Vector operator*(double s, Vector a) { return a *= s; }
  friend Vector operator-(Vector a) { return a *= -1.0; }
  friend bool operator==(const Vector& a, const Vector& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

  double dot(const Vector& o) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }

  std::string str() const;

 private:
  static int checked_dim(int d) {
    if (d < 1 || d > kMaxDim) throw PreconditionError("vector dimension must be in [1, 8], got " + std::to_string(d));
    return d;
  }
  static double checked_finite(double x) {
    if (!std::isfinite(x)) throw PreconditionError("vector coordinate is not finite");
    return x;
  }

  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

inline void require_same_dim(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim())
    throw PreconditionError("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

}  // namespace udist
