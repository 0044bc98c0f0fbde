#pragma once

#include <cmath>
#include <functional>

namespace udist {

// Gauss-Legendre rules on [lo, hi].
template <class F>
double gauss_legendre5(const F& f, double lo, double hi) {
  static constexpr double x[5] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                                  -0.9061798459386640};
  static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                  0.2369268850561891};
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += w[i] * f(c + h * x[i]);
  return s * h;
}

template <class F>
double gauss_legendre10(const F& f, double lo, double hi) {
  static constexpr double x[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244, 0.8650633666889845,
                                  0.9739065285171717};
  static constexpr double w[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
                                  0.0666713443086881};
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += w[i] * (f(c + h * x[i]) + f(c - h * x[i]));
  return s * h;
}

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (7, 15) with interval bisection until the local
// error estimate is below max(absTol, relTol * |value|) or maxDepth is reached.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi, double relTol = 1e-10,
                              double absTol = 0.0, int maxDepth = 40);

}  // namespace udist
