#pragma once

#include <cstdint>
#include <vector>

#include "udist/correlation.hpp"
#include "udist/grid.hpp"
#include "udist/interval_union.hpp"
#include "udist/vector.hpp"

namespace udist {

// C(p, q) at refinement stage j.
struct CantorSpec {
  int p = 1;
  int q = 2;
  int j = 0;
  double alpha() const { return static_cast<double>(p) / q; }
};

inline constexpr int kDyadicDepthCap = 40;                             // j * q
inline constexpr std::size_t kCantorIntervalCap = std::size_t{1} << 24;  // 2^{jp}

// 2^{jp} closed intervals of length 2^{-jq}; each parent interval is replaced
// by 2^p equally spaced children, the first and last flush with the parent.
IntervalUnion cantor_stage(const CantorSpec& spec);

// Smallest stage j with 2^{-jq} <= 2 delta. The delta-neighborhood of that
// stage equals the delta-neighborhood of the limit set C(p, q).
int cantor_stage_for_delta(int p, int q, const Rational& delta);
IntervalUnion cantor_neighborhood(int p, int q, const Rational& delta);

// Number of half-open mesh cells [k h, (k+1) h) meeting the limit set C(p, q).
std::uint64_t covering_count(int p, int q, const Rational& h);

// Occupancy grid of the product of the delta-neighborhoods of the given axis
// sets (1 to 3 axes). Cell boxes are closed; the grid spans each axis from
// (min endpoint - delta) in ceil(extent / cell) cells.
GridIndicator rasterize(const std::vector<IntervalUnion>& axes, double delta, double cell, double alpha);

struct AlphaSetReport {
  double supRatio = 0.0;
  std::uint64_t samplesTested = 0;
  Vector worstCenter;
  double worstRadius = 0.0;
};

// Occupied-cell measure of the closed ball B(center of cell idx, r), counting
// cells whose centers lie in the ball.
double ball_measure(const GridIndicator& g, std::uint64_t idx, double r);

// sup over samples of ball_measure / ((r / delta)^alpha delta^d) with centers
// uniform over occupied cells and r log-uniform in [delta, diameter].
AlphaSetReport alpha_set_verify(const GridIndicator& g, double alpha, std::uint64_t samples, std::uint64_t seed);

struct LEstimateRow {
  int n = 0;
  double delta = 0.0;
  double lhsL0 = 0.0, rhsL0 = 0.0;
  double lhsL1 = 0.0, rhsL1 = 0.0;
  double lhsL2 = 0.0, rhsL2 = 0.0;
};

struct LEstimateTable {
  std::vector<LEstimateRow> rows;
  double cL0 = 0.0, cL1 = 0.0, cL2 = 0.0;  // min lhs / rhs over the rows
};

// delta_n = 2^{-2 q1 q2 n - 2}; A = C(p1, q1), B = C(p2, q2), F = A u (A + 1).
// L0 = |{2 delta <= |x1 - x2| <= 5 delta / 2}| over A_delta^2,
// L1 = |{sqrt(7 delta / 2) <= |t1 - t2| <= 2 sqrt(delta)}| over B_delta^2,
// L2 = |{2 delta <= 1 - |x1 - x2| <= 5 delta / 2}| over F_delta^2.
LEstimateTable verify_L_estimates(int p1, int q1, int p2, int q2, int nFirst, int nLast);

// |{(x1, x2) in E^2 : lo <= |x1 - x2| <= hi}| = 2 * integral_lo^hi corr, 0 <= lo <= hi.
double band_pair_measure(const TrapezoidSum& corr, double lo, double hi);
double band_pair_measure(const IntervalUnion& E, double lo, double hi);

}  // namespace udist
