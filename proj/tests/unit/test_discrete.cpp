#include <functional>
#include <map>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "udist/discrete.hpp"
#include "udist/errors.hpp"

using namespace udist;

namespace {

PointSet triangle() {
  return PointSet({Vector{0, 0}, Vector{1, 0}, Vector{0.5, std::sqrt(3.0) / 2}}, 1e-9, "triangle");
}

PointSet square() { return PointSet({Vector{0, 0}, Vector{1, 0}, Vector{1, 1}, Vector{0, 1}}, 1e-9, "square"); }

PointSet random_box(std::size_t n, int d, double eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, std::pow(static_cast<double>(n), 1.0 / d));
  std::vector<Vector> pts;
  while (pts.size() < n) {
    Vector v(d);
    for (int a = 0; a < d; ++a) v[a] = u(rng);
    // Redraw points closer than eps to an earlier one (distinctness invariant).
    bool clash = false;
    for (const auto& p : pts) clash |= distance(p, v) <= eps;
    if (!clash) pts.push_back(v);
  }
  return PointSet(pts, eps);
}

// Direct enumeration of V and of the Phi fibers over tuples with distinct b_j.
struct DirectCensus {
  std::uint64_t v = 0;
  std::uint64_t maxFiber = 0;
};

DirectCensus direct_census(const PointSet& P) {
  const int d = P.dim();
  const std::size_t n = P.size();
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && is_unit_pair(P[i], P[j], P.eps())) nb[i].push_back(j);
  DirectCensus out;
  std::map<std::vector<std::size_t>, std::uint64_t> fibers;
  for (std::size_t p = 0; p < n; ++p) {
    std::uint64_t k = nb[p].size(), v = 1;
    for (int j = 0; j < d; ++j) v *= k;
    out.v += v;
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    if (k < static_cast<std::uint64_t>(d)) continue;
    // Ordered tuples of distinct neighbors (images p + b_j are the neighbors).
    std::function<void(int)> rec = [&](int depth) {
      if (depth == d) {
        std::vector<std::size_t> key;
        for (auto i : idx) key.push_back(nb[p][i]);
        ++fibers[key];
        return;
      }
      for (std::size_t i = 0; i < k; ++i) {
        bool used = false;
        for (int e = 0; e < depth; ++e) used |= idx[static_cast<std::size_t>(e)] == i;
        if (used) continue;
        idx[static_cast<std::size_t>(depth)] = i;
        rec(depth + 1);
      }
    };
    rec(0);
  }
  for (const auto& [key, c] : fibers) out.maxFiber = std::max(out.maxFiber, c);
  return out;
}

}  // namespace

TEST_SUITE("discrete") {
  TEST_CASE("small exact counts") {
    CHECK(count_unit_pairs_bruteforce(triangle()) == 6);
    CHECK(count_unit_pairs_grid(triangle()) == 6);
    CHECK(count_unit_pairs_bruteforce(square()) == 8);
    CHECK(count_unit_pairs_grid(square()) == 8);
    CHECK(count_unit_pairs_grid(PointSet()) == 0);
    CHECK(count_unit_pairs_bruteforce(PointSet()) == 0);
  }

  TEST_CASE("grid counter equals brute force") {
    for (int d : {2, 3, 4})
      for (double eps : {1e-9, 1e-3})
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
          const auto P = random_box(500, d, eps, seed * 31 + static_cast<std::uint64_t>(d));
          INFO("d=" << d << " eps=" << eps << " seed=" << seed);
          CHECK(count_unit_pairs_grid(P) == count_unit_pairs_bruteforce(P));
        }
    const auto P = random_box(500, 2, 1e-3, 99);
    const auto M = count_unit_pairs_bruteforce(P);
    CHECK(M > 0);
    CHECK(M % 2 == 0);
    CHECK_THROWS_AS(count_unit_pairs_grid(PointSet(P.points(), 0.1)), PreconditionError);
  }

  TEST_CASE("deleting a point never increases the count") {
    const auto P = random_box(300, 2, 1e-2, 5);
    const auto full = count_unit_pairs_grid(P);
    for (std::size_t i = 0; i < P.size(); i += 17) CHECK(count_unit_pairs_grid(P.without(i)) <= full);
  }

  TEST_CASE("two circles in R^4") {
    for (std::size_t N : {1, 10, 100, 500}) {
      const auto P = gen_two_circles_r4(N, 7);
      CHECK(P.size() == 2 * N);
      CHECK(P.dim() == 4);
      const auto c = count_unit_pairs_grid(P);
      CHECK(c >= N * N);
      if (N <= 100) CHECK(c == count_unit_pairs_bruteforce(P));
    }
    CHECK(count_unit_pairs_grid(gen_two_circles_r4(1, 3)) == 2);
    // Cross pairs are exactly at distance 1; chords within a circle of radius
    // 2^{-1/2} hit length 1 only at right angles.
    const auto P = gen_two_circles_r4(10, 7);
    std::uint64_t chords = 0;
    for (std::size_t i = 0; i < P.size(); ++i)
      for (std::size_t j = 0; j < P.size(); ++j) {
        const bool sameCircle = (i < 10) == (j < 10);
        if (i != j && sameCircle && is_unit_pair(P[i], P[j], P.eps())) ++chords;
      }
    CHECK(count_unit_pairs_grid(P) == 200 + chords);
  }

  TEST_CASE("general position generator") {
    const auto a = gen_general_position(3, 3, 1);
    CHECK(a.mode == CheckMode::exhaustive);
    CHECK(general_position_check(a.set.points(), kGeomTol, CheckMode::exhaustive).ok);
    const auto b = gen_general_position(2, 2, 4);
    CHECK(b.set.size() == 2);
    const auto c = gen_general_position(50, 3, 2);
    CHECK(general_position_check(c.set.points(), kGeomTol, CheckMode::sampled, 10'000, 2).ok);
    const auto side = std::pow(50.0, 1.0 / 3);
    for (const auto& p : c.set.points())
      for (int i = 0; i < 3; ++i) CHECK((p[i] >= 0 && p[i] <= side));
    CHECK(gen_general_position(50, 3, 2).set.points() == c.set.points());
    CHECK_THROWS_AS(gen_general_position(2, 3, 1), PreconditionError);
  }

  TEST_CASE("census of the triangle") {
    const auto r = g_v_census(triangle());
    CHECK(r.orderedPairCount == 6);
    CHECK(r.gCount == 6);
    CHECK(r.vCount == 12);
    CHECK(r.holderLhs == doctest::Approx(12.0));
    CHECK(r.holderHolds);
    CHECK(r.thm1Ratio == doctest::Approx(6 / std::pow(3.0, 1.5)));
    const auto e = g_v_census(PointSet());
    CHECK(e.gCount == 0);
    CHECK(e.vCount == 0);
  }

  TEST_CASE("census matches direct enumeration") {
    for (int d : {2, 3})
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto P = random_box(d == 2 ? 120 : 80, d, 0.05, 100 + seed);
        const auto r = g_v_census(P);
        const auto o = direct_census(P);
        INFO("d=" << d << " seed=" << seed);
        CHECK(r.gCount == r.orderedPairCount);
        CHECK(r.orderedPairCount == count_unit_pairs_bruteforce(P));
        CHECK(r.vCount == o.v);
        CHECK(r.maxPhiFiber == o.maxFiber);
        CHECK(r.holderHolds);
        CHECK(r.holderLhs <= static_cast<double>(r.vCount) * (1 + 1e-12));
      }
  }

  TEST_CASE("Phi fibers on general-position sets") {
    const auto g = gen_general_position(200, 3, 3, kGeomTol, 0.05);
    const auto r = g_v_census(g.set);
    CHECK(r.maxPhiFiber <= 2);
    CHECK(r.holderHolds);
    CHECK_THROWS_AS(g_v_census(random_box(2001, 3, 1e-9, 1)), CapExceeded);
  }

  TEST_CASE("unit pair density ratio") {
    CHECK(thm1_ratio(triangle()) == doctest::Approx(1.1547).epsilon(1e-4));
    CHECK(thm1_ratio(PointSet({Vector{0, 0}, Vector{1, 0}}, 1e-9)) == doctest::Approx(2 / std::pow(2.0, 1.5)));
    const auto P = gen_two_circles_r4(100, 1);
    CHECK(thm1_ratio(P) >= 1e4 / std::pow(200.0, 7.0 / 4.0));
    CHECK_THROWS_AS(thm1_ratio(PointSet({Vector{0, 0}}, 1e-9)), PreconditionError);
  }

  TEST_CASE("point set text format round-trips") {
    const auto P = random_box(40, 3, 1e-3, 8);
    std::stringstream io;
    write_point_set(io, P);
    const auto Q = read_point_set(io);
    CHECK(Q.points() == P.points());
    CHECK(Q.eps() == P.eps());
    std::stringstream bad("2 2 1e-9\n0 0\n1\n");
    CHECK_THROWS_AS(read_point_set(bad), ParseError);
    CHECK_THROWS_AS(PointSet({Vector{0, 0}, Vector{0, 0}}, 1e-9), PreconditionError);
  }
}
