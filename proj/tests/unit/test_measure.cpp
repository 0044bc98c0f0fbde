#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "udist/fractal.hpp"
#include "udist/measure.hpp"

using namespace udist;

namespace {

Rational d(std::int64_t n, int e) { return Rational::dyadic(n, e); }

IntervalUnion U(std::initializer_list<std::pair<Rational, Rational>> iv) {
  std::vector<Interval> v;
  for (const auto& [a, b] : iv) v.push_back({a, b});
  return IntervalUnion(v);
}

GridIndicator random_grid(int dim, std::int64_t n, double fill, double cell, double delta, std::uint64_t seed) {
  std::array<std::int64_t, 3> dims{1, 1, 1};
  for (int a = 0; a < dim; ++a) dims[a] = n;
  GridIndicator g(dim, Vector(dim), cell, dims, delta, 1.0);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution occ(fill), in(0.5);
  // Repeated rows exercise the row-class memo.
  for (std::uint64_t i = 0; i < g.cell_count(); ++i) {
    const auto c = g.coords(i);
    const bool stripe = c[1] % 3 == 0 && dim >= 2;
    const bool set = stripe ? (c[0] % 5 < 2) : occ(rng);
    if (set) {
      g.occupied.set(i);
      if (in(rng)) g.inner.set(i);
    }
  }
  return g;
}

// Midpoint-rule value of 4 int int corrF(s) corrB(u) 1{band} over s, u >= 0.
double product_oracle(const TrapezoidSum& cf, const TrapezoidSum& cb, double delta, double w, double sLo, double sHi,
                      double uHi, int n) {
  const double Rm = 1 - w * delta, Rp = 1 + w * delta;
  const double hs = (sHi - sLo) / n, hu = uHi / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = sLo + (i + 0.5) * hs;
    const double fs = cf.value(s);
    if (fs == 0) continue;
    for (int j = 0; j < n; ++j) {
      const double u = (j + 0.5) * hu;
      const double r = std::hypot(s, u);
      if (r >= Rm && r <= Rp) sum += fs * cb.value(u);
    }
  }
  return 4 * sum * hs * hu;
}

bool in_band(const Vector& a, const Vector& b, double lo, double hi) {
  const double r = distance(a, b);
  return r >= lo && r <= hi;
}

// The census definitions with quadratic loops.
void check_census(const GridIndicator& g, double lambda, double c, const IncidenceCensus& cen) {
  const double delta = g.delta;
  std::vector<Vector> occ, cand;
  for (auto i : g.occupied_indices()) {
    occ.push_back(g.center(i));
    if (section_measure(g, i) >= lambda) cand.push_back(g.center(i));
  }
  std::vector<Vector> centers, J;
  for (const auto& p : cand) {
    bool ok = true;
    for (const auto& k : centers) ok = ok && distance(p, k) >= 2 * delta;
    if (ok) centers.push_back(p);
  }
  for (const auto& p : occ) {
    bool ok = true;
    for (const auto& k : J) ok = ok && distance(p, k) >= delta;
    if (ok) J.push_back(p);
  }
  REQUIRE(centers.size() == cen.centers.size());
  REQUIRE(J.size() == cen.J.size());
  const double thr = c * std::pow(lambda / std::pow(delta, g.d - g.alpha), 1 / g.alpha);
  CHECK(cen.separationThreshold == doctest::Approx(thr));
  auto far = [&](std::size_t a, std::size_t b) { return distance(J[a], J[b]) >= thr; };
  std::map<std::array<std::size_t, 3>, std::uint64_t> fiber;
  std::uint64_t v = 0;
  bool anySection = false;
  for (std::size_t n = 0; n < centers.size(); ++n) {
    std::vector<std::size_t> S;
    for (std::size_t a = 0; a < J.size(); ++a)
      if (in_band(J[a], centers[n], 1 - 3 * delta - 1e-12, 1 + 3 * delta + 1e-12)) S.push_back(a);
    CHECK(S.size() == cen.sectionSizes[n]);
    anySection = anySection || !S.empty();
    for (std::size_t i = 0; i < S.size(); ++i)
      for (std::size_t j = i + 1; j < S.size(); ++j) {
        if (!far(S[i], S[j])) continue;
        if (g.d == 2) {
          ++v;
          ++fiber[{S[i], S[j], 0}];
          continue;
        }
        for (std::size_t k = j + 1; k < S.size(); ++k)
          if (far(S[i], S[k]) && far(S[j], S[k])) {
            ++v;
            ++fiber[{S[i], S[j], S[k]}];
          }
      }
  }
  std::uint64_t maxFiber = 0;
  for (const auto& [k, m] : fiber) maxFiber = std::max(maxFiber, m);
  CHECK(anySection);
  CHECK(cen.vCount == v);
  CHECK(cen.maxProjectionFiber == maxFiber);
}

}  // namespace

TEST_SUITE("measure") {
  TEST_CASE("index_band rounding") {
    const auto b = index_band(0.5, 1.0, 0.25, true);
    CHECK(b.lo == 4);
    CHECK(b.hi == 16);
    const auto c = index_band(0.5, 1.0, 0.25, false);
    CHECK(c.lo == 5);
    CHECK(c.hi == 15);
    CHECK(index_band(-1.0, 0.3, 0.25, true).lo == 0);
    CHECK(index_band(0.6, 0.4, 0.25, true).empty());
  }

  TEST_CASE("grid kernel equals the brute-force reference") {
    int trial = 0;
    for (int dim : {1, 2, 3}) {
      const std::int64_t n = dim == 1 ? 300 : (dim == 2 ? 40 : 14);
      for (double cell : {1.0 / 16, 1.0 / 8}) {
        for (double w : {1.0, 2.0, 3.0}) {
          const auto g = random_grid(dim, n, 0.3, cell, 1.0 / 32, 100 + trial++);
          const auto a = measure_D_delta_grid(g, w);
          const auto b = measure_D_delta_grid_reference(g, w);
          CHECK(a.outerPairs == b.outerPairs);
          CHECK(a.innerPairs == b.innerPairs);
          CHECK(a.inner <= a.outer);
        }
      }
    }
  }

  TEST_CASE("two points on the line bracket 8 delta^2") {
    const double delta = std::ldexp(1.0, -6);
    const auto g = rasterize({U({{Rational(0), Rational(0)}, {Rational(1), Rational(1)}})}, delta, std::ldexp(1.0, -8), 0.0);
    const auto r = measure_D_delta_grid(g);
    CHECK(r.inner <= 8 * delta * delta);
    CHECK(r.outer >= 8 * delta * delta);
    CHECK(r.inner > 0);
    GridIndicator empty(2, Vector(2), 0.25, {8, 8, 1}, 0.01, 1.0);
    const auto e = measure_D_delta_grid(empty);
    CHECK(e.inner == 0.0);
    CHECK(e.outer == 0.0);
  }

  TEST_CASE("product path against a planar midpoint oracle") {
    const double delta = std::ldexp(1.0, -7);
    const Rational dR = Rational::from_double(delta);
    const auto F = U({{-dR, dR}, {Rational(1) - dR, Rational(1) + dR}});
    const auto B = U({{-dR, dR}});
    for (double w : {1.0, 2.0}) {
      const auto r = measure_D_delta_product(F, B, delta, 0.0, w);
      const double oracle =
          product_oracle(autocorrelation_pairs(F), autocorrelation_pairs(B), delta, w, 1 - 3 * delta, 1 + 3 * delta,
                         2 * delta, 1500);
      CHECK(r.value == doctest::Approx(oracle).epsilon(5e-3));
      CHECK(r.quadError <= 1e-6 * r.value);
    }
    // Wider sets with long plateaus.
    const auto F2 = U({{Rational(0), d(1, 1)}, {d(3, 2), Rational(1)}});
    const auto B2 = U({{Rational(0), d(1, 2)}});
    const double delta2 = 1.0 / 64;
    const auto r2 = measure_D_delta_product(F2, B2, delta2, 0.0, 2.0);
    const double o2 = product_oracle(autocorrelation_pairs(F2), autocorrelation_pairs(B2), delta2, 2.0, 0.0,
                                     1 + 2 * delta2, 0.25, 3000);
    CHECK(r2.value == doctest::Approx(o2).epsilon(5e-3));
    CHECK(measure_D_delta_product(F, IntervalUnion(), delta, 0.0).value == 0.0);
    CHECK_THROWS_AS(measure_D_delta_product(F, B, delta, delta / 2), PreconditionError);
  }

  TEST_CASE("sampled product path tracks the exact path") {
    const double delta = std::ldexp(1.0, -8);
    const Rational dR = Rational::from_double(delta);
    const auto F = neighborhood(shift_union(cantor_stage({1, 2, 3}), Rational(1)), dR);
    const auto B = neighborhood(cantor_stage({1, 2, 3}), dR);
    const auto exact = measure_D_delta_product(F, B, delta, 0.0);
    const auto fft = measure_D_delta_product(F, B, delta, delta / 4);
    CHECK(fft.value == doctest::Approx(exact.value).epsilon(0.05));
  }

  TEST_CASE("Cantor product lies in the grid bracket at delta = 2^-10") {
    const Rational dR = d(1, 10);
    const double delta = dR.to_double();
    const int j = cantor_stage_for_delta(1, 2, dR);
    const auto A = cantor_stage({1, 2, j});
    const auto prod = measure_D_delta_cantor_product(1, 2, 1, 2, dR);
    const auto g = rasterize({shift_union(A, Rational(1)), A}, delta, delta / 4, 1.0);
    const auto br = measure_D_delta_grid(g);
    CHECK(prod.value >= br.inner - prod.quadError);
    CHECK(prod.value <= br.outer + prod.quadError);
    // Same sets through the generic interval-pair correlations.
    const auto generic = measure_D_delta_product(neighborhood(shift_union(A, Rational(1)), dR), neighborhood(A, dR), delta, 0.0);
    CHECK(prod.value == doctest::Approx(generic.value).epsilon(1e-9));
  }

  TEST_CASE("section measures") {
    const double delta = std::ldexp(1.0, -6), cell = delta / 8;
    const auto single = rasterize({U({{Rational(0), Rational(0)}}), U({{Rational(0), Rational(0)}})}, delta, cell, 0.0);
    const auto hs = section_histogram(single);
    REQUIRE(hs.counts.size() >= 1);
    CHECK(hs.counts[0] == single.occupied.count());

    // Two cube clusters at distance 1: the far cluster lies inside the band,
    // the near one outside it.
    const auto two = rasterize({U({{Rational(0), Rational(0)}, {Rational(1), Rational(1)}}), U({{Rational(0), Rational(0)}})},
                               delta, cell, 0.0);
    std::uint64_t origin = 0, farCells = 0;
    for (auto i : two.occupied_indices()) {
      const auto c = two.center(i);
      if (std::abs(c[0]) < cell && std::abs(c[1]) < cell) origin = i;
      if (c[0] > 0.5) ++farCells;
    }
    const double farArea = static_cast<double>(farCells) * cell * cell;
    CHECK(section_measure(two, origin) == doctest::Approx(farArea));
    CHECK(farArea == doctest::Approx(4 * delta * delta).epsilon(0.3));

    const double d8 = std::ldexp(1.0, -8);
    const auto k = rasterize({cantor_stage({1, 2, 4}), U({{Rational(0), Rational(2)}})}, d8, d8 / 2, 1.5);
    const auto h = section_histogram(k);
    CHECK(h.withinBinBound);
    std::uint64_t total = 0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      total += h.counts[b];
      CHECK(h.centers[b].size() == h.counts[b]);
    }
    CHECK(total == k.occupied.count());
    // Spot-check bins against the single-cell computation.
    const auto occ = k.occupied_indices();
    for (std::size_t i = 0; i < occ.size(); i += occ.size() / 17 + 1) {
      CHECK(h.lambda[i] == section_measure(k, occ[i]));
      CHECK(h.bin_of(h.lambda[i]) < static_cast<int>(h.counts.size()));
    }
  }

  TEST_CASE("annulus intersection area") {
    const double delta = 1e-3;
    CHECK(annulus_intersection_area(Vector{0, 0}, Vector{0, 0}, delta).area == doctest::Approx(8 * M_PI * delta));
    // Cartesian cell-count oracle around the two intersection points.
    const double s = 1.0;
    const auto a = annulus_intersection_area(Vector{0, 0}, Vector{s, 0}, delta);
    const int n = 2000;
    const double half = 12 * delta, h = 2 * half / n;
    std::uint64_t hits = 0;
    const double px = 0.5, py = std::sqrt(0.75);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vector x{px - half + (i + 0.5) * h, py - half + (j + 0.5) * h};
        if (in_band(x, Vector{0, 0}, 1 - 2 * delta, 1 + 2 * delta) && in_band(x, Vector{s, 0}, 1 - 2 * delta, 1 + 2 * delta))
          ++hits;
      }
    const double oracle = 2 * static_cast<double>(hits) * h * h;
    CHECK(a.area == doctest::Approx(oracle).epsilon(0.01));
    CHECK(a.ratio == doctest::Approx(a.area * (delta + s) / (delta * delta)));
    // The lens area falls while the crossing angle opens, up to s = sqrt(2),
    // and grows again toward tangency.
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
      const double si = std::sqrt(2.0) * i / 49.0;
      const double ar = annulus_intersection_area(Vector{0, 0}, Vector{si, 0}, delta).area;
      CHECK(ar <= prev * (1 + 1e-9));
      prev = ar;
    }
    CHECK(annulus_intersection_area(Vector{0, 0}, Vector{1.85, 0}, delta).area > prev);
    CHECK_THROWS_AS(annulus_intersection_area(Vector{0, 0}, Vector{1.9, 0}, delta), PreconditionError);
    CHECK_THROWS_AS(annulus_intersection_area(Vector{0, 0}, Vector{1.0, 0}, 0.02), PreconditionError);
  }

  TEST_CASE("separated subsets") {
    const auto s = separated_subset({Vector{0.0}, Vector{0.5}, Vector{1.1}}, 1.0);
    REQUIRE(s.size() == 2);
    CHECK(s[1][0] == 1.1);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Vector> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back(Vector{u(rng), u(rng)});
    CHECK(separated_subset(pts, 1e-12).size() == pts.size());
    const auto kept = separated_subset(pts, 0.1);
    CHECK(kept.size() <= 121);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j) CHECK(distance(kept[i], kept[j]) >= 0.1);
    for (const auto& p : pts) {
      double best = 1e9;
      for (const auto& k : kept) best = std::min(best, distance(p, k));
      CHECK(best < 0.1 + 1e-15);
    }
  }

  TEST_CASE("incidence census against direct enumeration") {
    const double delta = std::ldexp(1.0, -5);
    GridIndicator one(2, Vector(2), delta, {4, 4, 1}, delta, 1.0);
    one.occupied.set(5);
    const auto c1 = incidence_census(one, 1e-12, 0.1);
    CHECK(c1.J.size() == 1);
    CHECK(c1.vCount == 0);

    // Two spread clusters near distance 1.
    const double cell = delta;
    GridIndicator g(2, Vector{-0.25, -0.25}, cell, {48, 16, 1}, delta, 1.0);
    std::mt19937_64 rng(3);
    std::bernoulli_distribution b(0.4);
    for (std::int64_t y = 0; y < 16; ++y)
      for (std::int64_t x = 0; x < 48; ++x)
        if ((x < 12 || x >= 36) && b(rng)) g.occupied.set(g.index(x, y));
    const double lambda = 2 * cell * cell;
    const auto cen = incidence_census(g, lambda, 0.1);

    check_census(g, lambda, 0.1, cen);
  }

  TEST_CASE("incidence census on a 3-dimensional point set") {
    const double delta = std::ldexp(1.0, -4);
    const auto ends = U({{Rational(0), Rational(0)}, {Rational(1), Rational(1)}});
    auto g = rasterize({ends, ends, ends}, delta, delta, 0.0);
    g.alpha = 1.5;
    const auto h = section_histogram(g);
    const double lambda = h.lambdaEdges[2];
    const auto cen = incidence_census(g, lambda, 0.1);
    CHECK(cen.vCount > 0);
    CHECK(cen.fiberBound == doctest::Approx(std::pow(delta, -0.75) * std::pow(delta, 1.5) / lambda));
    check_census(g, lambda, 0.1, cen);
  }

  TEST_CASE("incidence fibers on C(1,2) x [0,2]") {
    const double delta = std::ldexp(1.0, -8);
    const auto g = rasterize({cantor_stage({1, 2, 4}), U({{Rational(0), Rational(2)}})}, delta, delta, 1.5);
    const auto h = section_histogram(g);
    // The highest geometric bin keeps the enumeration below the tuple cap.
    const double lambda = h.lambdaEdges.back();
    const auto cen = incidence_census(g, lambda, 0.1);
    MESSAGE("fiber ratio " << cen.fiberRatio << " max fiber " << cen.maxProjectionFiber << " bound " << cen.fiberBound);
    CHECK(cen.vCount > 0);
    CHECK(cen.fiberRatio <= 50.0);
  }

  TEST_CASE("Bonferroni inequality at cell resolution") {
    const double delta = std::ldexp(1.0, -6);
    const auto g = rasterize({cantor_stage({1, 2, 3}), U({{Rational(0), Rational(1)}})}, delta, delta / 2, 1.5);
    const auto occ = g.occupied_indices();
    std::vector<std::uint64_t> centers;
    for (std::size_t i = 0; i < occ.size(); i += 97) centers.push_back(occ[i]);
    const auto r = union_bound_check(g, centers);
    CHECK(r.holds);
    CHECK(r.sumSingles >= r.unionCells);
    std::uint64_t singles = 0;
    for (auto c : centers) singles += static_cast<std::uint64_t>(std::llround(section_measure(g, c) / g.cell_volume()));
    CHECK(singles == r.sumSingles);
  }
}
