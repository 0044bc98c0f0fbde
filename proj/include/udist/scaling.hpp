#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "udist/interval_union.hpp"

namespace udist {

// One factor of a product set K = axis_0 x ... x axis_{d-1}.
struct AxisSpec {
  enum class Kind { Interval, Points, Cantor, CantorPair };
  Kind kind = Kind::Interval;
  Rational lo, hi;              // Interval
  std::vector<Rational> points; // Points
  int p = 1, q = 2;             // Cantor: C(p, q); CantorPair: C(p, q) u (C(p, q) + 1)

  static AxisSpec interval(Rational lo, Rational hi);
  static AxisSpec point_set(std::vector<Rational> pts);
  static AxisSpec cantor(int p, int q);
  static AxisSpec cantor_pair(int p, int q);

  // A finite union whose delta-neighborhood is this axis' delta-neighborhood.
  IntervalUnion base(const Rational& delta) const;
  std::string str() const;
};

struct SetSpec {
  std::string label;
  std::vector<AxisSpec> axes;
  double alpha = 0.0;
  double widthMultiplier = 2.0;
  double cellFactor = 0.5;  // grid cell = cellFactor * delta
  double spacing = 0.0;     // product path: 0 = exact correlations, else FFT sampling / delta

  int d() const { return static_cast<int>(axes.size()); }
};

enum class SweepMethod { Grid, Product };
const char* method_name(SweepMethod m);

struct ScalingSample {
  double delta = 0.0;
  double value = 0.0;
  double valueLow = 0.0;
  double valueHigh = 0.0;
};

struct ScalingSeries {
  std::string label;
  int d = 0;
  double alpha = 0.0;
  std::string method;
  std::vector<ScalingSample> samples;
  bool degenerate = false;  // some value is not positive
};

// |D^delta| per delta. Grid: value = sqrt(inner * outer) of the cell bracket
// (outer / 2 when inner = 0). Product: exact correlation integral with the
// quadrature error as bracket; d = 1 and d = 2 only.
ScalingSeries sweep(const SetSpec& spec, const std::vector<double>& deltas, SweepMethod method);

// delta_n = 2^{-(2 q1 q2 n + 2)} for n = nFirst..nLast.
std::vector<double> lemma_deltas(int q1, int q2, int nFirst, int nLast);

// N(h) * h for the exact mesh-cell covering counts of C(p, q).
ScalingSeries covering_series(int p, int q, const std::vector<double>& hs);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double maxResidual = 0.0;
  int nPoints = 0;
};

// Ordinary least squares of log y against log x.
ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

enum class SeriesColumn { Value, Low, High };
// Fits log(value) against log(delta), dropping the largest-delta sample when
// the series has at least 4 samples.
ExponentFit fit_exponent(const ScalingSeries& s, SeriesColumn column = SeriesColumn::Value);

struct NamedBound {
  std::string name;
  double value = 0.0;
  double alphaLo = 0.0, alphaHi = 0.0;  // applicability interval
};

struct BoundTable {
  int d = 0;
  double alpha = 0.0;
  std::vector<NamedBound> upperBounds, lowerBounds;
  double upper = 0.0;  // min of upperBounds
  double lower = 0.0;  // max of lowerBounds (0 when none)
  bool open = false;   // alpha in the unresolved interval for d >= 4
  double exponentLower = 0.0;  // 2d - upper: smallest admissible |D^delta| exponent
};

// Upper and lower bounds on g_d(alpha).
BoundTable theory_bounds(int d, double alpha);
// Lower-bound construction F x B with dim A = beta, dim B = gamma:
// lower beta + 3 gamma / 2 (exponent 4 - (beta + 3 gamma / 2)), upper g_2(beta + gamma).
BoundTable construction_bounds(double beta, double gamma);

struct Margin {
  std::string name;
  double value = 0.0;  // positive when the estimate satisfies the bound
};

struct Verdict {
  double dimEstimate = 0.0;
  double lower = 0.0, upper = 0.0, tol = 0.0;
  bool withinBounds = false;
  std::vector<Margin> margins;
};
Verdict compare_report(const ExponentFit& fit, const BoundTable& table, double tol);

// (label, d, alpha, delta, value, valueLow, valueHigh) per sample.
void write_series_csv(std::ostream& os, const ScalingSeries& s);

}  // namespace udist
