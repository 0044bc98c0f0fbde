#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "udist/interval_union.hpp"

namespace udist {

// K_{a,b}(z) = |[z, z+a] n [0, b]|: trapezoid supported on [-a, b] with
// plateau height min(a, b).
double trapezoid(double a, double b, double z);
// Antiderivative of K_{a,b}, zero for z <= -a and a*b for z >= b.
double trapezoid_integral(double a, double b, double z);

// Sum of weights * K_{a,b}(u - offset) for one (a, b) pair.
struct TrapezoidComponent {
  double a = 0.0, b = 0.0;
  std::vector<double> offsets;  // ascending, distinct after finalize()
  std::vector<double> weights;
  std::vector<double> prefix;   // prefix[k] = sum of weights[0..k)

  // Sorts offsets, merges equal ones, drops zero weights, builds prefix sums.
  void finalize();
};

// Exact correlation of unions of intervals, as a finite sum of trapezoids.
// Correlation of f and g means u -> integral f(t) g(t + u) dt.
class TrapezoidSum {
 public:
  TrapezoidSum() = default;
  explicit TrapezoidSum(std::vector<TrapezoidComponent> comps);

  double value(double u) const;
  double integral(double lo, double hi) const;
  double total() const;  // integral over R
  std::size_t term_count() const;
  // Sorted distinct kinks in the closed range [lo, hi].
  std::vector<double> kinks(double lo, double hi) const;
  const std::vector<TrapezoidComponent>& components() const { return comps_; }

 private:
  double primitive_window(const TrapezoidComponent& c, double x, std::size_t& fullCount) const;
  std::vector<TrapezoidComponent> comps_;
};

// Pair cap for the generic interval-pair builders.
inline constexpr std::uint64_t kCorrelationPairCap = 60'000'000;

// Autocorrelation of the indicator of A; all interval pairs grouped by length.
TrapezoidSum autocorrelation_pairs(const IntervalUnion& A);
// u -> integral 1_f(t) 1_g(t + u) dt.
TrapezoidSum cross_correlation_pairs(const IntervalUnion& f, const IntervalUnion& g);

// Autocorrelation of E = C_delta u (C_delta + shift) (shift = 0: just C_delta),
// C = C(p, q), built from the digit structure of the Cantor stage whose
// delta-neighborhood equals C_delta. Overlapping fattened intervals are
// handled by inclusion-exclusion; no point may be covered three times.
TrapezoidSum cantor_autocorrelation(int p, int q, const Rational& delta, const Rational& shift);

// Piecewise-linear function given by breakpoints x (ascending) and values v,
// zero outside [x.front(), x.back()]. Keeps a long double running integral
// for O(1) antiderivative lookups.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> x, std::vector<double> v);

  // Restriction of f to [lo, hi], breakpoints at every kink of f there.
  static PiecewiseLinear tabulate(const TrapezoidSum& f, double lo, double hi);

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& v() const { return v_; }
  std::size_t size() const { return x_.size(); }

  // Segment k covers [x[k], x[k+1]]; returns the segment containing u
  // (clamped to valid segments), or npos when there are fewer than 2 points.
  std::size_t segment(double u) const;
  double value(double u) const;
  double value_in(std::size_t k, double u) const;
  // Antiderivative from x.front(), evaluated inside segment k.
  long double primitive_in(std::size_t k, double u) const;
  long double primitive(double u) const;
  double integral(double lo, double hi) const { return static_cast<double>(primitive(hi) - primitive(lo)); }
  // True iff f vanishes identically on [lo, hi].
  bool vanishes_on(double lo, double hi) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<double> x_, v_;
  std::vector<long double> cum_;
  std::vector<std::uint32_t> nonzeroPrefix_;  // segments with a nonzero end value
};

// Correlation sampled at u = i * spacing, i >= 0.
struct Correlogram {
  double sampleSpacing = 0.0;
  std::vector<double> values;
  double totalMass = 0.0;

  // Linear interpolation of the samples, extended evenly to u < 0.
  PiecewiseLinear interpolant() const;
};

// values[i] = corr(i * spacing) exactly, for every lag up to the support.
Correlogram correlogram_exact(const IntervalUnion& A, double spacing);
// FFT of the cell-coverage sampling of A on a grid of the given spacing
// anchored at A's lower endpoint. Exact when every endpoint lies on the grid.
Correlogram correlogram_fft(const IntervalUnion& A, double spacing);
// 2 * spacing * (number of intervals): bound on |fft - exact|.
double correlogram_fft_tolerance(const IntervalUnion& A, double spacing);

// Binary layout: 8-byte magic "UDCORR01", double spacing, uint64 length,
// double totalMass, then length doubles.
void write_correlogram(std::ostream& os, const Correlogram& c);
Correlogram read_correlogram(std::istream& is);

}  // namespace udist
