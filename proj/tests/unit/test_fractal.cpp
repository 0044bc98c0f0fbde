#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "udist/fractal.hpp"

using namespace udist;

namespace {

Rational d(std::int64_t n, int e) { return Rational::dyadic(n, e); }

IntervalUnion U(std::initializer_list<std::pair<Rational, Rational>> iv) {
  std::vector<Interval> v;
  for (const auto& [a, b] : iv) v.push_back({a, b});
  return IntervalUnion(v);
}

// Cells [k h, (k+1) h) meeting a finer stage, counting every cell each
// interval spans.
std::uint64_t covering_oracle(int p, int q, int J, const Rational& h) {
  std::set<std::int64_t> cells;
  const auto stage = cantor_stage({p, q, J});
  for (const auto& i : stage.intervals())
    for (std::int64_t k = (i.lo / h).floor(); k <= (i.hi / h).floor(); ++k) cells.insert(k);
  return cells.size();
}

// Largest ratio over every occupied center and every radius at which the ball
// count can change.
double exhaustive_alpha_sup(const GridIndicator& g, double alpha) {
  const auto occ = g.occupied_indices();
  const double delta = g.delta;
  std::vector<double> radii{delta};
  const auto maxN = static_cast<std::int64_t>(std::ceil(std::pow(g.diameter() / g.cell, 2)));
  for (std::int64_t n2 = 1; n2 <= maxN; ++n2) {
    const double r = g.cell * std::sqrt(static_cast<double>(n2));
    if (r > delta && r <= g.diameter()) radii.push_back(r);
  }
  double best = 0.0;
  for (auto idx : occ) {
    const auto c = g.coords(idx);
    for (double r : radii) {
      std::uint64_t cnt = 0;
      for (auto o : occ) {
        const auto e = g.coords(o);
        double s = 0;
        for (int a = 0; a < g.d; ++a) s += static_cast<double>((e[a] - c[a]) * (e[a] - c[a]));
        if (std::sqrt(s) * g.cell <= r * (1 + 1e-15)) ++cnt;
      }
      best = std::max(best, static_cast<double>(cnt) * g.cell_volume() / (std::pow(r / delta, alpha) * std::pow(delta, g.d)));
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("fractal") {
  TEST_CASE("cantor_stage examples") {
    CHECK(cantor_stage({1, 2, 1}) == U({{Rational(0), d(1, 2)}, {d(3, 2), Rational(1)}}));
    CHECK(cantor_stage({3, 5, 0}) == U({{Rational(0), Rational(1)}}));
    CHECK(cantor_stage({1, 2, 2}) ==
          U({{Rational(0), d(1, 4)}, {d(3, 4), d(1, 2)}, {d(3, 2), d(13, 4)}, {d(15, 4), Rational(1)}}));
    CHECK_THROWS_AS(cantor_stage({1, 2, 21}), CapExceeded);
    CHECK_THROWS_AS(cantor_stage({2, 2, 1}), PreconditionError);
  }
  TEST_CASE("cardinality, length, nesting") {
    for (auto [p, q] : {std::pair{1, 2}, {1, 3}, {2, 3}, {2, 5}}) {
      for (int j = 0; j * q <= 15 && j * p <= 12; ++j) {
        const auto s = cantor_stage({p, q, j});
        CHECK(s.size() == (std::size_t{1} << (j * p)));
        for (const auto& i : s.intervals()) CHECK(i.length() == d(1, j * q));
        CHECK(s.measure() == d(std::int64_t{1} << (j * p), j * q));
        CHECK(cantor_stage({p, q, j}).contains(cantor_stage({p, q, j + 1})));
      }
    }
  }
  TEST_CASE("neighborhood of the limit set uses the minimal matching stage") {
    CHECK(cantor_stage_for_delta(1, 2, d(1, 10)) == 5);
    CHECK(cantor_stage_for_delta(1, 2, d(1, 11)) == 5);
    CHECK(cantor_stage_for_delta(1, 2, d(1, 12)) == 6);
    // One stage deeper gives the same neighborhood: C_j and C_{j+1} have the
    // same delta-neighborhood once 2^{-jq} <= 2 delta.
    for (int e = 3; e <= 12; ++e) {
      const int j = cantor_stage_for_delta(1, 2, d(1, e));
      CHECK(cantor_neighborhood(1, 2, d(1, e)) == neighborhood(cantor_stage({1, 2, j + 1}), d(1, e)));
      CHECK(cantor_neighborhood(2, 3, d(1, e)) ==
            neighborhood(cantor_stage({2, 3, cantor_stage_for_delta(2, 3, d(1, e)) + 1}), d(1, e)));
    }
  }
  TEST_CASE("covering_count matches a finer-stage oracle") {
    for (int e = 1; e <= 10; ++e) {
      CHECK(covering_count(1, 2, d(1, e)) == covering_oracle(1, 2, (e + 1) / 2 + 2, d(1, e)));
      CHECK(covering_count(1, 3, d(1, e)) == covering_oracle(1, 3, (e + 2) / 3 + 1, d(1, e)));
    }
    CHECK(covering_count(1, 2, Rational(1)) == 2);  // [0,1) and [1,2)
    CHECK(covering_count(1, 2, d(1, 2)) == 4);      // 0, 1/4, 3/4 and 1 lie in four cells
  }
  TEST_CASE("rasterize examples") {
    const auto g = rasterize({U({{Rational(0), Rational(1)}})}, 1.0 / 16, 1.0 / 16, 1.0);
    CHECK(g.occupied.count() == 18);
    CHECK(g.origin[0] == -1.0 / 16);
    CHECK(g.outer_measure() == doctest::Approx(18.0 / 16));
    CHECK(g.inner.count() == 18);
    CHECK(rasterize({IntervalUnion()}, 0.25, 0.25, 0.0).occupied.count() == 0);

    const double delta = 1.0 / 64;
    const auto c2 = cantor_stage({1, 2, 2});
    const auto strip = U({{Rational(0), Rational(2)}});
    const auto gx = rasterize({c2}, delta, delta, 0.5);
    const auto gy = rasterize({strip}, delta, delta, 1.0);
    const auto gxy = rasterize({c2, strip}, delta, delta, 1.5);
    CHECK(gxy.occupied.count() == gx.occupied.count() * gy.occupied.count());
    CHECK(gxy.inner.count() == gx.inner.count() * gy.inner.count());
  }
  TEST_CASE("rasterize sandwich and inner bracket") {
    for (int e = 4; e <= 9; ++e) {
      const double delta = std::ldexp(1.0, -e);
      for (double cell : {delta, delta / 2, delta / 4, 3 * delta / 8}) {
        const auto A = cantor_stage({1, 2, (e + 1) / 2});
        const auto B = cantor_stage({2, 3, 2});
        const auto g = rasterize({A, B}, delta, cell, 1.0);
        const Rational dR = Rational::from_double(delta);
        const Rational dcR = Rational::from_double(delta + cell);
        const double exact = (neighborhood(A, dR).measure() * neighborhood(B, dR).measure()).to_double();
        const double fat = (neighborhood(A, dcR).measure() * neighborhood(B, dcR).measure()).to_double();
        CHECK(g.outer_measure() >= exact * (1 - 1e-15));
        CHECK(g.outer_measure() <= fat * (1 + 1e-15));
        CHECK(g.inner_measure() <= exact * (1 + 1e-15));
        CHECK(g.outer_measure() <= exact * std::pow(1 + 2 * cell / delta, 2) * (1 + 1e-12));
      }
    }
    CHECK_THROWS_AS(rasterize({U({{Rational(0), Rational(1)}})}, 0.01, 0.02, 1.0), PreconditionError);
  }
  TEST_CASE("alpha_set_verify examples") {
    const double delta = 1.0 / 64;
    const auto line = rasterize({U({{Rational(0), Rational(1)}})}, delta, delta, 1.0);
    const auto r1 = alpha_set_verify(line, 1.0, 2000, 1);
    CHECK(r1.supRatio >= 1.0);
    CHECK(r1.supRatio <= 4.0);
    CHECK(r1.worstRadius >= delta);
    const auto point = rasterize({U({{Rational(0), Rational(0)}})}, delta, delta, 0.0);
    const auto r0 = alpha_set_verify(point, 0.0, 500, 2);
    CHECK(r0.supRatio >= 1.0);
    CHECK(r0.supRatio <= 4.0);
  }
  TEST_CASE("alpha_set_verify stays below the exhaustive supremum and reaches it") {
    const double delta = std::ldexp(1.0, -8);
    const auto g = rasterize({cantor_stage({1, 2, 4})}, delta, delta, 0.5);
    const double sup = exhaustive_alpha_sup(g, 0.5);
    const auto rep = alpha_set_verify(g, 0.5, 20000, 3);
    CHECK(rep.supRatio <= sup * (1 + 1e-12));
    CHECK(rep.supRatio >= 0.8 * sup);
    CHECK(sup <= 8.0);
  }
  TEST_CASE("alpha_set_verify is deterministic across thread counts") {
    const double delta = std::ldexp(1.0, -8);
    const auto g = rasterize({cantor_stage({1, 2, 4}), cantor_stage({1, 2, 4})}, delta, delta, 1.0);
    const auto a = alpha_set_verify(g, 1.0, 5000, 9);
    const auto b = alpha_set_verify(g, 1.0, 5000, 9);
    CHECK(a.supRatio == b.supRatio);
    CHECK(a.worstRadius == b.worstRadius);
  }
  TEST_CASE("band_pair_measure oracles") {
    const double delta = std::ldexp(1.0, -10);
    const auto A = neighborhood(U({{Rational(0), Rational(1)}}), Rational::from_double(delta));
    CHECK(band_pair_measure(A, 2 * delta, 2.5 * delta) == doctest::Approx(delta * (1 - delta / 4)).epsilon(1e-12));
    CHECK(band_pair_measure(IntervalUnion(), 0.1, 0.2) == 0.0);
    // Two unit intervals at distance 3: pairs with |x1 - x2| in [2, 4] cover
    // both cross blocks entirely.
    const auto two = U({{Rational(0), Rational(1)}, {Rational(3), Rational(4)}});
    CHECK(band_pair_measure(two, 2.0, 4.0) == doctest::Approx(2.0));
  }
  TEST_CASE("verify_L_estimates at n = 1") {
    const auto t = verify_L_estimates(1, 2, 1, 2, 1, 1);
    REQUIRE(t.rows.size() == 1);
    const auto& r = t.rows[0];
    CHECK(r.delta == std::ldexp(1.0, -10));
    // Oracle: the same integrals through the generic interval-pair path.
    const Rational dR = Rational::dyadic(1, 10);
    const auto Ad = cantor_neighborhood(1, 2, dR);
    const auto Fd = neighborhood(shift_union(cantor_stage({1, 2, cantor_stage_for_delta(1, 2, dR)}), Rational(1)), dR);
    CHECK(r.lhsL0 == doctest::Approx(band_pair_measure(Ad, 2 * r.delta, 2.5 * r.delta)).epsilon(1e-10));
    CHECK(r.lhsL1 == doctest::Approx(band_pair_measure(Ad, std::sqrt(3.5 * r.delta), 2 * std::sqrt(r.delta))).epsilon(1e-10));
    CHECK(r.lhsL2 == doctest::Approx(band_pair_measure(Fd, 1 - 2.5 * r.delta, 1 - 2 * r.delta)).epsilon(1e-10));
    CHECK(r.lhsL0 / r.rhsL0 > 0.0);
    CHECK(r.lhsL1 / r.rhsL1 > 0.0);
    CHECK(t.cL0 == r.lhsL0 / r.rhsL0);
    CHECK_THROWS_AS(verify_L_estimates(1, 2, 1, 2, 5, 5), CapExceeded);
  }
}
