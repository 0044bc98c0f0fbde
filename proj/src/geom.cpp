#include "udist/geom.hpp"

#include <omp.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <limits>
#include <sstream>
#include <tuple>

#include "udist/parallel.hpp"

namespace udist {

std::string Vector::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << c_[i];
  os << ')';
  return os.str();
}

namespace {

Eigen::MatrixXd rows_of(std::span<const Vector> vs, int dim) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(vs.size()), dim);
  for (std::size_t r = 0; r < vs.size(); ++r) {
    require(vs[r].dim() == dim, "dimension mismatch in vector list");
    for (int c = 0; c < dim; ++c) m(static_cast<Eigen::Index>(r), c) = vs[r][c];
  }
  return m;
}

double smallest_singular_value(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().minCoeff();
}

void require_frame(std::span<const Vector> a) {
  require(!a.empty(), "expected d-1 >= 1 vectors in R^d");
  const int d = a.front().dim();
  require(static_cast<int>(a.size()) == d - 1, "expected d-1 vectors in R^d");
  if (smallest_singular_value(rows_of(a, d)) <= kGeomTol)
    throw PreconditionError("input vectors are linearly dependent");
}

}  // namespace

bool affinely_independent(std::span<const Vector> points, double tol) {
  require(tol > 0, "tolerance must be positive");
  require(!points.empty(), "need exactly d points");
  const int d = points.front().dim();
  require(static_cast<int>(points.size()) == d, "need exactly d points in R^d");
  std::vector<Vector> diffs;
  diffs.reserve(points.size() - 1);
  for (std::size_t j = 1; j < points.size(); ++j) {
    require_same_dim(points[j], points[0]);
    diffs.push_back(points[j] - points[0]);
  }
  if (diffs.empty()) return true;
  return smallest_singular_value(rows_of(diffs, d)) > tol;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

GeneralPositionReport general_position_check(std::span<const Vector> points, double tol, CheckMode mode,
                                             std::uint64_t sampleCount, std::uint64_t seed) {
  require(!points.empty(), "general position check needs a nonempty set");
  const int d = points.front().dim();
  const std::size_t n = points.size();
  require(n >= static_cast<std::size_t>(d), "general position check needs |P| >= d");
  for (const auto& p : points) require(p.dim() == d, "dimension mismatch in point set");

  GeneralPositionReport report;
  report.mode = mode;
  std::vector<Vector> subset(static_cast<std::size_t>(d));
  std::vector<std::size_t> idx(static_cast<std::size_t>(d));

  auto test = [&]() {
    for (int j = 0; j < d; ++j) subset[j] = points[idx[j]];
    ++report.subsetsChecked;
    if (!affinely_independent(subset, tol)) {
      report.ok = false;
      report.witness = idx;
      return false;
    }
    return true;
  };

  if (mode == CheckMode::exhaustive) {
    if (binomial(n, d) > kExhaustiveSubsetCap)
      throw CapExceeded("exhaustive general position check exceeds C(n,d) cap of 1e7");
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      if (!test()) return report;
      int j = d - 1;
      while (j >= 0 && idx[j] == n - d + j) --j;
      if (j < 0) break;
      ++idx[j];
      for (int k = j + 1; k < d; ++k) idx[k] = idx[k - 1] + 1;
    }
    return report;
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::uint64_t s = 0; s < sampleCount; ++s) {
    for (int j = 0; j < d; ++j) {
      std::size_t c;
      do {
        c = pick(rng);
      } while (std::find(idx.begin(), idx.begin() + j, c) != idx.begin() + j);
      idx[j] = c;
    }
    std::vector<std::size_t> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    std::swap(sorted, idx);
    if (!test()) return report;
  }
  return report;
}

Circumsphere circumsphere_through_origin(std::span<const Vector> a) {
  require_frame(a);
  const int d = a.front().dim();
  Circumsphere out{Vector(d), 0.0};
  // c0 = sum_j lambda_j a_j with 2 c0 . a_k = |a_k|^2.
  const Eigen::MatrixXd m = rows_of(a, d);
  const Eigen::MatrixXd gram = 2.0 * m * m.transpose();
  Eigen::VectorXd rhs(m.rows());
  for (Eigen::Index k = 0; k < m.rows(); ++k) rhs(k) = m.row(k).squaredNorm();
  const Eigen::VectorXd lambda = gram.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd c = m.transpose() * lambda;
  for (int i = 0; i < d; ++i) out.center[i] = c(i);
  out.radius = out.center.norm();
  return out;
}

Vector unit_normal(std::span<const Vector> a) {
  require_frame(a);
  const int d = a.front().dim();
  Vector v(d);
  const Eigen::MatrixXd m = rows_of(a, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd n = svd.matrixV().col(d - 1);
  for (int i = 0; i < d; ++i) v[i] = n(i);
  v *= 1.0 / v.norm();
  for (int i = 0; i < d; ++i) {
    if (std::abs(v[i]) > kTangentTol) {
      if (v[i] < 0) v *= -1.0;
      break;
    }
  }
  return v;
}

SphereSection sphere_section(const Vector& normal, double offset) {
  SphereSection s{offset, normal, 0.0, std::abs(offset) <= 1.0};
  if (s.nonempty) s.radius = std::sqrt(std::max(0.0, 1.0 - offset * offset));
  return s;
}

std::vector<TupleSolution> lemma1_solve(std::span<const Vector> a) {
  const Circumsphere cs = circumsphere_through_origin(a);
  const Vector v = unit_normal(a);
  const double r0 = cs.radius;
  std::vector<TupleSolution> out;
  if (r0 > 1.0 + kTangentTol) return out;

  auto make = [&](double t) {
    TupleSolution sol;
    sol.t = t;
    Vector b1 = t * v - cs.center;
    sol.b.reserve(a.size() + 1);
    sol.b.push_back(b1);
    for (const auto& aj : a) sol.b.push_back(b1 + aj);
    return sol;
  };

  if (std::abs(r0 - 1.0) <= kTangentTol) {
    out.push_back(make(0.0));
    return out;
  }
  const double t = std::sqrt(1.0 - r0 * r0);
  out.push_back(make(t));
  out.push_back(make(-t));
  return out;
}

Annulus::Annulus(Vector c, double d, double w) : center(c), delta(d), widthMultiplier(w) {
  require(d > 0, "annulus delta must be positive");
  require(w > 0, "annulus width multiplier must be positive");
}

bool annulus_contains(const Annulus& annulus, const Vector& x) {
  require_same_dim(annulus.center, x);
  const double r = distance(x, annulus.center);
  return r >= annulus.inner_radius() - kGeomTol && r <= annulus.outer_radius() + kGeomTol;
}

namespace {

std::vector<Vector> sphere_directions(int n, const Vector* axis, double halfAngle) {
  // Fibonacci points on a spherical cap (upper hemisphere when axis is null).
  std::vector<Vector> dirs;
  dirs.reserve(n);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  const double zmin = axis ? std::cos(halfAngle) : 0.0;
  Vector e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};
  if (axis) {
    e3 = *axis;
    const Vector t = std::abs(e3[0]) < 0.9 ? Vector{1, 0, 0} : Vector{0, 1, 0};
    e1 = t - e3 * t.dot(e3);
    e1 *= 1.0 / e1.norm();
    e2 = Vector{e3[1] * e1[2] - e3[2] * e1[1], e3[2] * e1[0] - e3[0] * e1[2], e3[0] * e1[1] - e3[1] * e1[0]};
  }
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (1.0 - zmin) * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    dirs.push_back(e1 * (r * std::cos(golden * i)) + e2 * (r * std::sin(golden * i)) + e3 * z);
  }
  return dirs;
}

double brute_diameter(const std::vector<Vector>& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, distance(pts[i], pts[j]));
  return best;
}

// Max pairwise distance of a 3-D cloud. Exact below kBruteDiameterCap points;
// above it, the maximum over pairs of direction-extreme points, refined on
// shrinking cones around the current best axis.
constexpr std::size_t kBruteDiameterCap = 4000;

double cloud_diameter(const std::vector<Vector>& pts) {
  if (pts.size() < 2) return 0.0;
  if (pts.size() <= kBruteDiameterCap) return brute_diameter(pts);
  std::vector<Vector> cand;
  auto collect = [&](const std::vector<Vector>& dirs) {
    for (const auto& u : dirs) {
      std::size_t imax = 0, imin = 0;
      double vmax = -std::numeric_limits<double>::infinity(), vmin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double v = pts[i].dot(u);
        if (v > vmax) vmax = v, imax = i;
        if (v < vmin) vmin = v, imin = i;
      }
      cand.push_back(pts[imax]);
      cand.push_back(pts[imin]);
    }
  };
  auto best_axis = [&]() {
    double best = -1.0;
    Vector axis{0, 0, 1};
    for (std::size_t i = 0; i < cand.size(); ++i)
      for (std::size_t j = i + 1; j < cand.size(); ++j) {
        const double dd = distance(cand[i], cand[j]);
        if (dd > best) {
          best = dd;
          axis = cand[i] - cand[j];
        }
      }
    if (axis.norm() > 0) axis *= 1.0 / axis.norm();
    return std::pair{best, axis};
  };
  collect(sphere_directions(64, nullptr, 0.0));
  auto [d0, axis] = best_axis();
  for (double half : {0.35, 0.1, 0.03}) {
    collect(sphere_directions(24, &axis, half));
    std::tie(d0, axis) = best_axis();
  }
  return d0;
}

}  // namespace

namespace {

Vector cross(const Vector& a, const Vector& b) {
  return Vector{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

}  // namespace

TripleAnnulusResult triple_annulus_diameter(const Vector& a1, const Vector& a2, const Vector& a3, double delta,
                                            std::uint64_t samples, std::uint64_t seed, double cGeo) {
  require(a1.dim() == 3 && a2.dim() == 3 && a3.dim() == 3, "triple annulus diameter is defined in R^3");
  require(delta > 0 && delta <= 1e-2, "delta must lie in (0, 1e-2]");
  for (double s : {distance(a1, a2), distance(a1, a3), distance(a2, a3)})
    require(s >= 0.1 && s <= 1.9, "pairwise distances of the centers must lie in [0.1, 1.9]");
  const std::array<Vector, 3> pts{a1, a2, a3};
  if (!affinely_independent(std::span<const Vector>(pts.data(), 3), kGeomTol) ||
      cross(a2 - a1, a3 - a1).norm() <= 1e-9)
    throw PreconditionError("triple annulus centers are collinear");

  TripleAnnulusResult res;
  res.samples = samples;
  const Vector u2 = a2 - a1, u3 = a3 - a1;
  const double s12 = u2.norm(), s13 = u3.norm();
  res.sMin = std::min(s12, s13);
  res.sinTheta = cross(u2, u3).norm() / (s12 * s13);
  res.predictedBound = cGeo * std::sqrt(delta / (res.sMin * res.sinTheta));

  // Local frame: origin a1, e1 along a2 - a1, e2 in the plane, n normal.
  const Vector e1 = u2 * (1.0 / s12);
  Vector e2 = u3 - e1 * u3.dot(e1);
  e2 *= 1.0 / e2.norm();
  const Vector nrm = cross(e1, e2);
  const double x3 = u3.dot(e1), y3 = u3.dot(e2);

  const double w = kTripleShellMultiplier;
  const double rin = 1.0 - w * delta, rout = 1.0 + w * delta;
  const double spread = 0.5 * (rout * rout - rin * rin);
  // Bisector slabs: X s12 in [l2, h2], X x3 + Y y3 in [l3, h3].
  const double l2 = 0.5 * s12 * s12 - spread, h2 = 0.5 * s12 * s12 + spread;
  const double l3 = 0.5 * s13 * s13 - spread, h3 = 0.5 * s13 * s13 + spread;
  const double xlo = l2 / s12, xhi = h2 / s12;

  std::array<std::array<double, 2>, 4> corner;
  int ci = 0;
  for (double x : {xlo, xhi})
    for (double c : {l3, h3}) corner[ci++] = {x, (c - x * x3) / y3};
  // Corner order around the parallelogram: (xlo,l3) (xhi,l3) (xhi,h3) (xlo,h3).
  const std::array<std::array<double, 2>, 4> ring{corner[0], corner[2], corner[3], corner[1]};
  double rhoMax = 0.0;
  for (const auto& c : ring) rhoMax = std::max(rhoMax, std::hypot(c[0], c[1]));
  double rhoMin = 0.0;
  {
    // Origin inside iff it satisfies both slab constraints.
    const bool inside = (0.0 >= l2 && 0.0 <= h2 && 0.0 >= l3 && 0.0 <= h3);
    if (!inside) {
      rhoMin = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 4; ++k) {
        const auto& p = ring[k];
        const auto& q = ring[(k + 1) % 4];
        rhoMin = std::min(rhoMin, point_segment_distance(0, 0, p[0], p[1], q[0], q[1]));
      }
    }
  }
  const double zTop2 = rout * rout - rhoMin * rhoMin;
  if (zTop2 <= 0.0) return res;
  const double zhi = std::sqrt(zTop2);
  const double zlo = std::sqrt(std::max(0.0, rin * rin - rhoMax * rhoMax));
  const double zlen = zhi - zlo;
  const double area = (xhi - xlo) * (h3 - l3) / y3;
  res.regionVolume = area * 2.0 * zlen;

  const Annulus A1(a1, delta, w), A2(a2, delta, w), A3(a3, delta, w);
  const std::uint64_t chunks = kReductionChunks;
  std::vector<std::vector<Vector>> upper(chunks), lower(chunks);

#pragma omp parallel for schedule(dynamic)
  for (std::uint64_t c = 0; c < chunks; ++c) {
    const std::uint64_t begin = samples * c / chunks, end = samples * (c + 1) / chunks;
    std::mt19937_64 rng(derive_seed(seed, c));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::uint64_t i = begin; i < end; ++i) {
      const double X = xlo + (xhi - xlo) * unit(rng);
      const double Y = (l3 + (h3 - l3) * unit(rng) - X * x3) / y3;
      const double zs = 2.0 * zlen * unit(rng);
      const bool top = zs < zlen;
      const double Z = top ? zlo + zs : -(zlo + (zs - zlen));
      const Vector p = a1 + X * e1 + Y * e2 + Z * nrm;
      if (annulus_contains(A1, p) && annulus_contains(A2, p) && annulus_contains(A3, p))
        (top ? upper[c] : lower[c]).push_back(p);
    }
  }
  std::vector<Vector> up, lo;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    up.insert(up.end(), upper[c].begin(), upper[c].end());
    lo.insert(lo.end(), lower[c].begin(), lower[c].end());
  }
  res.hits = up.size() + lo.size();
  res.diameterEstimate = std::max(cloud_diameter(up), cloud_diameter(lo));
  return res;
}

}  // namespace udist
