#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "udist/vector.hpp"

namespace udist {

// Absolute tolerance for geometric identities on unit-scale data.
inline constexpr double kGeomTol = 1e-9;
// |r0 - 1| below this counts as the single-solution (tangent) case.
inline constexpr double kTangentTol = 1e-12;

/// True iff the d points in R^d span a (d-1)-flat: the smallest singular
/// value of the (d-1) x d matrix of differences p_j - p_1 exceeds `tol`.
bool affinely_independent(std::span<const Vector> points, double tol = kGeomTol);

enum class CheckMode { exhaustive, sampled };

struct GeneralPositionReport {
  bool ok = true;
  std::vector<std::size_t> witness;  // indices of a violating d-subset when !ok
  CheckMode mode = CheckMode::exhaustive;
  std::uint64_t subsetsChecked = 0;
};

inline constexpr std::uint64_t kExhaustiveSubsetCap = 10'000'000;

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Checks that every d-subset of `points` (all in R^d) is affinely
/// independent. Exhaustive mode enumerates all C(n,d) subsets and refuses
/// when that exceeds kExhaustiveSubsetCap; sampled mode draws `sampleCount`
/// uniform d-subsets from `seed`.
GeneralPositionReport general_position_check(std::span<const Vector> points, double tol, CheckMode mode,
                                             std::uint64_t sampleCount = 0, std::uint64_t seed = 0);

struct Circumsphere {
  Vector center;  // lies in span(a)
  double radius = 0.0;
};

/// The unique (d-2)-sphere inside span(a) through 0 and the d-1 linearly
/// independent vectors a_j.
Circumsphere circumsphere_through_origin(std::span<const Vector> a);

/// Unit normal to span(a) with the sign fixed so that its first nonzero
/// coordinate is positive.
Vector unit_normal(std::span<const Vector> a);

// The slice (t v + H) of the unit sphere, H = span(a).
struct SphereSection {
  double offset = 0.0;
  Vector normal;
  double radius = 0.0;  // 0 when the section is a point or empty
  bool nonempty = false;
};

SphereSection sphere_section(const Vector& normal, double offset);

struct TupleSolution {
  std::vector<Vector> b;  // b_1..b_d, all unit
  double t = 0.0;         // section offset along the oriented normal
};

/// All d-tuples of unit vectors (b_1..b_d) with b_j - b_1 = a_j for the
/// d-1 given vectors. At most two exist; the result lists the t > 0 tuple
/// first.
std::vector<TupleSolution> lemma1_solve(std::span<const Vector> a);

struct Annulus {
  Vector center;
  double delta = 0.0;
  double widthMultiplier = 2.0;

  Annulus(Vector c, double d, double w = 2.0);
  double inner_radius() const { return 1.0 - widthMultiplier * delta; }
  double outer_radius() const { return 1.0 + widthMultiplier * delta; }
};

/// |x - center| within [1 - w delta, 1 + w delta] (closed, kGeomTol slack).
bool annulus_contains(const Annulus& annulus, const Vector& x);

struct TripleAnnulusResult {
  double diameterEstimate = 0.0;  // max over the two components of the sampled diameter
  double predictedBound = 0.0;    // cGeo * sqrt(delta / (sMin * sinTheta))
  double sMin = 0.0;
  double sinTheta = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  double regionVolume = 0.0;  // volume of the sampling region
};

inline constexpr double kTripleShellMultiplier = 3.0;

/// Monte-Carlo estimate of the diameter of A(a1,3d) n A(a2,3d) n A(a3,3d)
/// in R^3 (shell half-width 3 delta). Samples uniformly from an exact
/// superset built from the two bisector slabs and the admissible height
/// range, and reports the larger of the diameters of the hits above and
/// below the plane through a1, a2, a3.
TripleAnnulusResult triple_annulus_diameter(const Vector& a1, const Vector& a2, const Vector& a3, double delta,
                                            std::uint64_t samples = 1'000'000, std::uint64_t seed = 0,
                                            double cGeo = 10.0);

}  // namespace udist
