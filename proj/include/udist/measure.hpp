#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "udist/correlation.hpp"
#include "udist/grid.hpp"
#include "udist/interval_union.hpp"
#include "udist/vector.hpp"

namespace udist {

// Cell visits a grid kernel may perform (row-pair kernels count pairs without
// visiting them; the reference loop visits every ordered pair).
inline constexpr std::uint64_t kCellPairCap = 10'000'000'000ULL;
// V-tuples the incidence census may enumerate.
inline constexpr std::uint64_t kTupleCap = 1'000'000'000ULL;

// Squared index distances n2 with lo <= cell * sqrt(n2) <= hi. `outward`
// rounds toward including boundary values, otherwise toward excluding them.
struct IndexBand {
  std::int64_t lo = 0, hi = -1;
  bool empty() const { return hi < lo; }
};
IndexBand index_band(double lo, double hi, double cell, bool outward);

// Bracket of |D^delta| for the band 1 +- w delta: `outer` counts ordered
// occupied-cell pairs with center distance in [1 - w delta - sqrt(d) cell,
// 1 + w delta + sqrt(d) cell], `inner` counts inner-cell pairs with the band
// shrunk by sqrt(d) cell; both are multiplied by cell^{2d}.
struct DeltaBracket {
  double inner = 0.0;
  double outer = 0.0;
  std::uint64_t innerPairs = 0;
  std::uint64_t outerPairs = 0;
};
DeltaBracket measure_D_delta_grid(const GridIndicator& g, double w = 2.0);
// Brute-force pair loop with the same bands.
DeltaBracket measure_D_delta_grid_reference(const GridIndicator& g, double w = 2.0);

// |D^delta| for K_delta = F x B in the plane,
// 4 int_0^{1+w delta} corrF(s) int_{u-(s)}^{u+(s)} corrB(u) du ds with
// u-+(s) = sqrt(max(0, (1 -+ w delta)^2 - s^2)). Each tabulated piece is
// integrated with 10-point Gauss-Legendre in a variable that removes the
// square-root endpoint behavior; quadError sums |GL10 - GL5| over pieces.
struct ProductMeasure {
  double value = 0.0;
  double quadError = 0.0;
  std::uint64_t pieces = 0;
};
// corrF and corrB must represent the correlations on [0, 1 + w delta].
ProductMeasure measure_D_delta_product(const PiecewiseLinear& corrF, const PiecewiseLinear& corrB, double delta,
                                       double w = 2.0);
// spacing = 0 uses the exact interval-pair correlations; spacing in
// (0, delta / 4] uses FFT correlograms sampled at that spacing.
ProductMeasure measure_D_delta_product(const IntervalUnion& F, const IntervalUnion& B, double delta, double spacing,
                                       double w = 2.0);
// F = (A u (A + 1))_delta with A = C(p1, q1) and B = C(p2, q2)_delta, through
// the structured Cantor correlations.
ProductMeasure measure_D_delta_cantor_product(int p1, int q1, int p2, int q2, const Rational& delta, double w = 2.0);

// Section measure lambda(k) = cell^d * #{occupied cells whose center lies at
// distance in [1 - w delta, 1 + w delta] from the center of cell k}.
double section_measure(const GridIndicator& g, std::uint64_t idx, double w = 2.0);

// Bin 0 holds lambda = 0, bin 1 holds 0 < lambda < delta^d, bin m + 2 holds
// delta^d 2^m <= lambda < delta^d 2^{m+1}.
struct SectionHistogram {
  double delta = 0.0;
  int d = 0;
  std::vector<double> lambdaEdges;             // lower edge of every bin (0, 0, delta^d, 2 delta^d, ...)
  std::vector<std::uint64_t> counts;           // per bin
  std::vector<std::vector<std::uint64_t>> centers;  // occupied cell indices per bin
  std::vector<double> lambda;                  // per occupied cell, ascending index order
  int geometricBins = 0;                       // geometric bins up to the highest nonempty one
  bool withinBinBound = true;                  // geometricBins <= 4 log2(1 / delta)

  int bin_of(double value) const;
};
SectionHistogram section_histogram(const GridIndicator& g, double w = 2.0);

// Area of A(c1, delta) n A(c2, delta) in the plane (band 1 +- 2 delta) by
// adaptive quadrature over the radius about c1. ratio = area (delta + s) / delta^2.
struct AnnulusArea {
  double area = 0.0;
  double quadError = 0.0;
  double ratio = 0.0;
};
// Center distances must satisfy s < 2 - eta.
inline constexpr double kAnnulusEta = 0.1;
AnnulusArea annulus_intersection_area(const Vector& c1, const Vector& c2, double delta);

// Greedy in input order: a point is kept iff it is at distance >= r from every
// kept point. Returns the kept input positions.
std::vector<std::size_t> separated_subset_indices(const std::vector<Vector>& points, double r);
std::vector<Vector> separated_subset(const std::vector<Vector>& points, double r);

struct IncidenceCensus {
  double delta = 0.0;
  double lambda = 0.0;
  double c = 0.0;
  std::vector<Vector> centers;       // 2 delta-separated cells with section measure >= lambda
  std::vector<Vector> J;             // maximal delta-separated subset of occupied cells
  std::vector<std::uint64_t> sectionSizes;  // |S_c| per center
  double separationThreshold = 0.0;  // c (lambda / delta^{d - alpha})^{1 / alpha}
  std::uint64_t vCount = 0;          // unordered pairs (d = 2) or triples (d = 3) over all centers
  std::uint64_t maxProjectionFiber = 0;
  double fiberBound = 0.0;           // delta^{2-alpha} / lambda, or delta^{-alpha/2} delta^{3-alpha} / lambda
  double fiberRatio = 0.0;           // maxProjectionFiber / fiberBound
};
// S_c = {a in J : 1 - 3 delta <= |a - c| <= 1 + 3 delta}.
IncidenceCensus incidence_census(const GridIndicator& g, double lambda, double c = 0.1);

// Cell-resolution Bonferroni check for E_n = A(c_n, delta) n K_delta, where
// centers are occupied cell indices and the band is 1 +- w delta.
struct UnionBoundCheck {
  std::uint64_t unionCells = 0;
  std::uint64_t sumSingles = 0;
  std::uint64_t sumPairs = 0;
  bool holds = true;  // unionCells >= sumSingles - sumPairs
};
UnionBoundCheck union_bound_check(const GridIndicator& g, const std::vector<std::uint64_t>& centers, double w = 2.0);

}  // namespace udist
