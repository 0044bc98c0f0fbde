#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "udist/geom.hpp"
#include "udist/vector.hpp"

namespace udist {

inline constexpr double kDefaultUnitEps = 1e-9;

// Finite point set in R^d with an explicit unit-distance tolerance.
// Points are pairwise distinct: every pair is more than eps apart.
class PointSet {
 public:
  PointSet() = default;
  // Dimension taken from the points (0 for an empty list).
  PointSet(std::vector<Vector> points, double eps, std::string label = {});
  PointSet(int dim, std::vector<Vector> points, double eps, std::string label = {});

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double eps() const { return eps_; }
  const std::string& label() const { return label_; }
  const std::vector<Vector>& points() const { return points_; }
  const Vector& operator[](std::size_t i) const { return points_[i]; }

  // Same points with index i removed.
  PointSet without(std::size_t i) const;

 private:
  void validate() const;

  std::vector<Vector> points_;
  double eps_ = kDefaultUnitEps;
  std::string label_;
  int dim_ = 0;
};

// | |p - q| - 1 | <= eps, evaluated identically by every counter.
inline bool is_unit_pair(const Vector& p, const Vector& q, double eps) {
  return std::abs(distance(p, q) - 1.0) <= eps;
}

// Ordered pairs (p1, p2), p1 != p2, at unit distance. O(n^2).
std::uint64_t count_unit_pairs_bruteforce(const PointSet& P);

// Same count through a uniform bucket grid of side 1/sqrt(d). Requires eps < 0.1.
std::uint64_t count_unit_pairs_grid(const PointSet& P);

// Unit-distance neighbor lists (indices), ascending, from the grid counter.
std::vector<std::vector<std::uint32_t>> unit_neighbors(const PointSet& P);

// {(x_n; 0, 0)} u {(0, 0; x_m)} in R^4 with |x_n| = 2^{-1/2}, N angles drawn
// uniformly from `seed`.
PointSet gen_two_circles_r4(std::size_t N, std::uint64_t seed, double eps = kDefaultUnitEps);

struct GeneratedSet {
  PointSet set;
  CheckMode mode = CheckMode::exhaustive;
  int rounds = 0;  // resampling rounds used (1 = first draw accepted)
};

// Exhaustive general position check is used while C(n,d) stays below this.
inline constexpr std::uint64_t kGeneratorExhaustiveCap = 100'000;
inline constexpr std::uint64_t kGeneratorSampleCount = 10'000;
inline constexpr int kGeneratorMaxRounds = 100;

// Uniform points in [0, n^{1/d}]^d, redrawn until the general position check
// passes.
GeneratedSet gen_general_position(std::size_t n, int d, std::uint64_t seed, double tol = kGeomTol,
                                  double eps = kDefaultUnitEps);

// Census cap on |P| for d >= 3.
inline constexpr std::size_t kCensusSizeCap = 2000;

struct UnitPairReport {
  std::uint64_t orderedPairCount = 0;
  std::uint64_t gCount = 0;
  std::uint64_t vCount = 0;          // tuples with repetitions allowed
  std::uint64_t vDistinctCount = 0;  // tuples with pairwise distinct b_j
  double holderLhs = 0.0;            // gCount^d / |P|^{d-1}
  bool holderHolds = true;           // gCount^d <= vCount |P|^{d-1}, decided exactly
  std::uint64_t maxPhiFiber = 0;     // over tuples with distinct b_j
  double thm1Ratio = 0.0;
};

UnitPairReport g_v_census(const PointSet& P);

// orderedPairCount / |P|^{(2d-1)/d}.
double thm1_ratio(const PointSet& P);

// Plain-text format: "d n eps" then n lines of d coordinates (17 significant digits).
void write_point_set(std::ostream& os, const PointSet& P);
PointSet read_point_set(std::istream& is, const std::string& label = {});

}  // namespace udist
