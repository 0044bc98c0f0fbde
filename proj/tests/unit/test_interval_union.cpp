#include <sstream>

#include "doctest.h"
#include "udist/fractal.hpp"
#include "udist/interval_union.hpp"

using namespace udist;

namespace {

Rational d(std::int64_t n, int e) { return Rational::dyadic(n, e); }

IntervalUnion U(std::initializer_list<std::pair<Rational, Rational>> iv) {
  std::vector<Interval> v;
  for (const auto& [a, b] : iv) v.push_back({a, b});
  return IntervalUnion(v);
}

}  // namespace

TEST_SUITE("rational") {
  TEST_CASE("lowest terms and comparisons") {
    CHECK(Rational(6, 4) == Rational(3, 2));
    CHECK(Rational(-1, -2) == Rational(1, 2));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK((Rational(1, 3) + Rational(1, 6)) == Rational(1, 2));
    CHECK((Rational(1, 3) * Rational(3, 4)) == Rational(1, 4));
    CHECK(Rational(7, 2).floor() == 3);
    CHECK(Rational(-7, 2).floor() == -4);
    CHECK(Rational(-7, 2).ceil() == -3);
    CHECK(Rational(1, 6).str() == "1/6");
  }
  TEST_CASE("dyadic helpers") {
    CHECK(d(3, 4).is_dyadic());
    CHECK(d(3, 4).dyadic_exponent() == 4);
    CHECK_FALSE(Rational(1, 3).is_dyadic());
    CHECK(Rational::from_double(0.375) == d(3, 3));
    CHECK(Rational::from_double(-6.0) == Rational(-6));
    CHECK(Rational::from_double(std::ldexp(1.0, -40)) == d(1, 40));
    CHECK(Rational::from_double(0.1).to_double() == 0.1);
  }
  TEST_CASE("caps") {
    CHECK_THROWS_AS(Rational(1, 0), PreconditionError);
    CHECK_THROWS_AS(d(1, 62) * d(1, 62), CapExceeded);
    CHECK_THROWS_AS(Rational::from_double(1e30), CapExceeded);
  }
}

TEST_SUITE("interval_union") {
  TEST_CASE("normalization merges touching and overlapping intervals") {
    const auto u = U({{Rational(2), Rational(3)}, {Rational(0), Rational(1)}, {Rational(1), Rational(1, 1) + d(1, 1)}});
    REQUIRE(u.size() == 2);
    CHECK(u[0].lo == Rational(0));
    CHECK(u[0].hi == d(3, 1));
    CHECK(u.measure() == d(5, 1));
    CHECK_THROWS_AS(U({{Rational(1), Rational(0)}}), PreconditionError);
  }
  TEST_CASE("shift_union examples") {
    CHECK(shift_union(U({{Rational(0), d(1, 2)}}), Rational(1)) ==
          U({{Rational(0), d(1, 2)}, {Rational(1), d(5, 2)}}));
    CHECK(shift_union(U({{Rational(0), Rational(1)}}), Rational(1)) == U({{Rational(0), Rational(2)}}));
    // [3/4, 1] and [1, 5/4] share the point 1 and merge.
    CHECK(shift_union(cantor_stage({1, 2, 1}), Rational(1)).size() == 3);
    CHECK_THROWS_AS(shift_union(U({{Rational(0), Rational(1)}}), Rational(1, 3)), PreconditionError);
  }
  TEST_CASE("neighborhood examples") {
    CHECK(neighborhood(U({{Rational(0), Rational(0)}}), d(1, 2)) == U({{d(-1, 2), d(1, 2)}}));
    CHECK(neighborhood(cantor_stage({1, 2, 1}), d(1, 2)) == U({{d(-1, 2), d(5, 2)}}));
    CHECK(neighborhood(cantor_stage({1, 2, 2}), d(1, 6)).size() == 4);
    CHECK_THROWS_AS(neighborhood(U({{Rational(0), Rational(1)}}), Rational(0)), PreconditionError);
  }
  TEST_CASE("intersection and containment") {
    const auto a = U({{Rational(0), Rational(2)}, {Rational(3), Rational(5)}});
    const auto b = U({{Rational(1), Rational(4)}});
    CHECK(intersect(a, b) == U({{Rational(1), Rational(2)}, {Rational(3), Rational(4)}}));
    CHECK(a.contains(U({{Rational(3), Rational(4)}})));
    CHECK_FALSE(a.contains(b));
    CHECK(a.contains(Rational(5)));
    CHECK_FALSE(a.contains(d(5, 1)));
  }
  TEST_CASE("text round trip, dyadic and non-dyadic endpoints") {
    for (const auto& u : {cantor_stage({1, 2, 5}), cantor_stage({2, 3, 3}), neighborhood(cantor_stage({1, 3, 4}), d(1, 14))}) {
      std::stringstream ss;
      write_interval_union(ss, u);
      CHECK(read_interval_union(ss) == u);
    }
    std::stringstream s1("1 2 3 2\n");
    CHECK(read_interval_union(s1) == U({{d(1, 2), d(3, 2)}}));
    std::stringstream s2("1/3 0 2/3 0\n");
    CHECK(read_interval_union(s2) == U({{Rational(1, 3), Rational(2, 3)}}));
    std::stringstream bad1("1 2 3\n"), bad2("3 2 1 2\n"), bad3("0 0 2 0\n1 0 3 0\n"), bad4("x 0 1 0\n");
    CHECK_THROWS_AS(read_interval_union(bad1), ParseError);
    CHECK_THROWS_AS(read_interval_union(bad2), ParseError);
    CHECK_THROWS_AS(read_interval_union(bad3), ParseError);
    CHECK_THROWS_AS(read_interval_union(bad4), ParseError);
  }
}
