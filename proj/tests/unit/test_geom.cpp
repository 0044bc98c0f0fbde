#include <array>
#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "udist/errors.hpp"
#include "udist/geom.hpp"

using namespace udist;
using namespace udist::testing;

namespace {

bool near(const Vector& a, const Vector& b, double tol) { return (a - b).norm() <= tol; }

void check_tuple_invariants(std::span<const Vector> a, const TupleSolution& s) {
  REQUIRE(s.b.size() == a.size() + 1);
  for (const auto& b : s.b) CHECK(std::abs(b.norm() - 1.0) < 1e-9);
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(near(s.b[j + 1] - s.b[0], a[j], 1e-9));
}

std::array<Vector, 3> equilateral(double s) {
  return {Vector{0, 0, 0}, Vector{s, 0, 0}, Vector{s / 2, s * std::sqrt(3.0) / 2, 0}};
}

}  // namespace

TEST_SUITE("geom") {
  TEST_CASE("affine independence") {
    const std::vector<Vector> p2{{0, 0}, {1, 1}};
    CHECK(affinely_independent(p2));
    const std::vector<Vector> col{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    CHECK_FALSE(affinely_independent(col));
    const std::vector<Vector> pl{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    CHECK(affinely_independent(pl));
    const std::vector<Vector> few{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(affinely_independent(few), PreconditionError);
    const std::vector<Vector> mixed{{0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(affinely_independent(mixed), PreconditionError);
  }

  TEST_CASE("general position check") {
    const std::vector<Vector> tri{{0, 0}, {1, 0}, {0, 1}};
    CHECK(general_position_check(tri, kGeomTol, CheckMode::exhaustive).ok);

    const std::vector<Vector> four{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 1}};
    const auto r = general_position_check(four, kGeomTol, CheckMode::exhaustive);
    CHECK_FALSE(r.ok);
    REQUIRE(r.witness.size() == 3);
    CHECK(r.witness == std::vector<std::size_t>{0, 1, 2});

    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    std::vector<Vector> g;
    for (int i = 0; i < 100; ++i) g.push_back(Vector{n01(rng), n01(rng), n01(rng)});
    const auto s = general_position_check(g, kGeomTol, CheckMode::sampled, 10'000, 1);
    CHECK(s.ok);
    CHECK(s.subsetsChecked == 10'000);
    CHECK(general_position_check(g, kGeomTol, CheckMode::exhaustive).ok);
    CHECK(binomial(100, 3) == 161'700);

    std::vector<Vector> big;
    for (int i = 0; i < 400; ++i) big.push_back(Vector{n01(rng), n01(rng), n01(rng)});
    CHECK_THROWS_AS(general_position_check(big, kGeomTol, CheckMode::exhaustive), CapExceeded);
  }

  TEST_CASE("circumsphere through the origin") {
    {
      const std::vector<Vector> a{{1, 0}};
      const auto c = circumsphere_through_origin(a);
      CHECK(near(c.center, Vector{0.5, 0}, 1e-15));
      CHECK(c.radius == doctest::Approx(0.5));
    }
    {
      const std::vector<Vector> a{{1, 0, 0}, {0, 1, 0}};
      const auto c = circumsphere_through_origin(a);
      // Direct solve of 2 c . a_j = |a_j|^2 in span(a).
      CHECK(near(c.center, Vector{0.5, 0.5, 0}, 1e-15));
      CHECK(c.radius == doctest::Approx(std::sqrt(2.0) / 2));
    }
    const std::vector<Vector> dep{{1, 0, 0}, {2, 0, 0}};
    CHECK_THROWS_AS(circumsphere_through_origin(dep), PreconditionError);

    std::mt19937_64 rng(3);
    for (int d = 2; d <= 8; ++d)
      for (int k = 0; k < 50; ++k) {
        std::vector<Vector> a;
        for (int j = 1; j < d; ++j) a.push_back(random_unit(d, rng) * 1.3);
        const auto c = circumsphere_through_origin(a);
        for (const auto& aj : a) CHECK(std::abs(c.center.norm() - (c.center - aj).norm()) < 1e-9);
        CHECK(std::abs(c.center.dot(unit_normal(a))) < 1e-9);
      }
  }

  TEST_CASE("unit normal orientation and sphere sections") {
    const std::vector<Vector> a{{1, 0, 0}, {0, 1, 0}};
    CHECK(near(unit_normal(a), Vector{0, 0, 1}, 1e-15));
    const std::vector<Vector> b{{0, 1, 0}, {0, 0, 1}};
    CHECK(near(unit_normal(b), Vector{1, 0, 0}, 1e-15));
    const auto s = sphere_section(Vector{0, 0, 1}, 0.6);
    CHECK(s.nonempty);
    CHECK(s.radius * s.radius + 0.36 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(sphere_section(Vector{0, 0, 1}, 1.2).nonempty);
  }

  TEST_CASE("unit tuple solver examples") {
    {
      const std::vector<Vector> a{{1, 0}};
      const auto s = lemma1_solve(a);
      REQUIRE(s.size() == 2);
      const double h = std::sqrt(3.0) / 2;
      // x^2 + y^2 = 1 and (x + 1)^2 + y^2 = 1 give x = -1/2.
      CHECK(((near(s[0].b[0], Vector{-0.5, h}, 1e-12) && near(s[1].b[0], Vector{-0.5, -h}, 1e-12)) ||
             (near(s[0].b[0], Vector{-0.5, -h}, 1e-12) && near(s[1].b[0], Vector{-0.5, h}, 1e-12))));
      CHECK(s[0].t > 0);
      for (const auto& t : s) check_tuple_invariants(a, t);
    }
    {
      const std::vector<Vector> a{{2, 0}};
      const auto s = lemma1_solve(a);
      REQUIRE(s.size() == 1);
      CHECK(near(s[0].b[0], Vector{-1, 0}, 1e-12));
      CHECK(near(s[0].b[1], Vector{1, 0}, 1e-12));
      CHECK(s[0].t == 0.0);
    }
    {
      const std::vector<Vector> a{{1, 0, 0}, {0, 1, 0}};
      const auto s = lemma1_solve(a);
      REQUIRE(s.size() == 2);
      const double h = std::sqrt(2.0) / 2;
      CHECK(near(s[0].b[0], Vector{-0.5, -0.5, h}, 1e-12));
      CHECK(near(s[1].b[0], Vector{-0.5, -0.5, -h}, 1e-12));
      for (const auto& t : s) check_tuple_invariants(a, t);
    }
    const std::vector<Vector> far{{3, 0}};
    CHECK(lemma1_solve(far).empty());
    const std::vector<Vector> dep{{1, 0, 0}, {-1, 0, 0}};
    CHECK_THROWS_AS(lemma1_solve(dep), PreconditionError);
  }

  TEST_CASE("unit tuple solver on random frames") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int d = 2; d <= 6; ++d)
      for (int k = 0; k < 300; ++k) {
        std::vector<Vector> a;
        if (k % 2 == 0) {
          a = random_solvable_frame(d, rng);
        } else {
          for (int j = 1; j < d; ++j) {
            Vector v(d);
            for (int i = 0; i < d; ++i) v[i] = u(rng);
            a.push_back(v);
          }
        }
        const auto s = lemma1_solve(a);
        CHECK(s.size() <= 2);
        if (k % 2 == 0) CHECK(!s.empty());
        for (const auto& t : s) check_tuple_invariants(a, t);
      }
  }

  TEST_CASE("unit tuple solutions are complete on a sphere mesh") {
    std::mt19937_64 rng(13);
    for (int k = 0; k < 10; ++k) {
      const auto a2 = random_solvable_frame(2, rng);
      const auto r2 = lemma1_mesh_oracle(a2, lemma1_solve(a2), 1e-3, 1e-2);
      CHECK(r2.families >= 1);
      CHECK(r2.extraFamilies == 0);
      CHECK(r2.missedSolutions == 0);
    }
    for (int k = 0; k < 3; ++k) {
      const auto a3 = random_solvable_frame(3, rng);
      const auto r3 = lemma1_mesh_oracle(a3, lemma1_solve(a3), 3e-3, 1e-2);
      CHECK(r3.families >= 1);
      CHECK(r3.extraFamilies == 0);
      CHECK(r3.missedSolutions == 0);
    }
  }

  TEST_CASE("mesh oracle detects a dropped solution") {
    std::mt19937_64 rng(17);
    const auto a = random_solvable_frame(2, rng);
    auto sols = lemma1_solve(a);
    REQUIRE(sols.size() == 2);
    sols.pop_back();
    const auto r = lemma1_mesh_oracle(a, sols, 1e-3, 1e-2);
    if (r.families == 2) CHECK(r.extraFamilies == 1);
  }

  TEST_CASE("annulus membership") {
    const Annulus A(Vector{0, 0}, 0.01);
    CHECK(annulus_contains(A, Vector{1, 0}));
    CHECK_FALSE(annulus_contains(A, Vector{0.97, 0}));
    CHECK(annulus_contains(A, Vector{1.02 / std::sqrt(2.0), 1.02 / std::sqrt(2.0)}));
    CHECK_FALSE(annulus_contains(A, Vector{1.0201, 0}));
    CHECK_THROWS_AS(annulus_contains(A, Vector{1, 0, 0}), PreconditionError);
    CHECK_THROWS_AS(Annulus(Vector{0, 0}, 0.0), PreconditionError);
  }

  TEST_CASE("triple annulus diameter against a dense grid") {
    const double delta = 1e-3;
    const auto a = equilateral(1.0);
    const auto r = triple_annulus_diameter(a[0], a[1], a[2], delta, 1'000'000, 1);
    CHECK(r.hits > 1000);
    CHECK(r.diameterEstimate <= r.predictedBound);
    // Upper triple point of the three unit spheres, then a grid over a box around it.
    const Vector c{0.5, std::sqrt(3.0) / 6, 0};
    const Vector top = c + Vector{0, 0, std::sqrt(1.0 - c.norm2())};
    const Annulus A1(a[0], delta, 3.0), A2(a[1], delta, 3.0), A3(a[2], delta, 3.0);
    const double half = 0.02, step = 2e-4;
    const int n = static_cast<int>(2 * half / step);
    std::vector<Vector> hits;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        for (int k = 0; k <= n; ++k) {
          const Vector p = top + Vector{-half + i * step, -half + j * step, -half + k * step};
          if (annulus_contains(A1, p) && annulus_contains(A2, p) && annulus_contains(A3, p)) hits.push_back(p);
        }
    REQUIRE(hits.size() > 100);
    double diam = 0;
    for (std::size_t i = 0; i < hits.size(); ++i)
      for (std::size_t j = i + 1; j < hits.size(); ++j) diam = std::max(diam, (hits[i] - hits[j]).norm());
    const double slack = 2 * std::sqrt(3.0) * step;
    CHECK(r.diameterEstimate <= diam + slack);
    CHECK(r.diameterEstimate >= 0.95 * diam - slack);
  }

  TEST_CASE("triple annulus diameter scales linearly for transversal shells") {
    const auto a = equilateral(0.5);
    const auto coarse = triple_annulus_diameter(a[0], a[1], a[2], 1e-3, 400'000, 2);
    const auto fine = triple_annulus_diameter(a[0], a[1], a[2], 1e-4, 400'000, 2);
    const double ratio = coarse.diameterEstimate / fine.diameterEstimate;
    CHECK(ratio >= 5.0);
    CHECK(ratio <= 20.0);
    CHECK(coarse.predictedBound / fine.predictedBound == doctest::Approx(std::sqrt(10.0)));
  }

  TEST_CASE("triple annulus preconditions and determinism") {
    const auto a = equilateral(1.0);
    CHECK_THROWS_AS(triple_annulus_diameter(a[0], a[1], a[2], 0.02), PreconditionError);
    CHECK_THROWS_AS(triple_annulus_diameter(Vector{0, 0, 0}, Vector{0.5, 0, 0}, Vector{1, 0, 0}, 1e-3), PreconditionError);
    CHECK_THROWS_AS(triple_annulus_diameter(Vector{0, 0, 0}, Vector{0.05, 0, 0}, Vector{0, 1, 0}, 1e-3), PreconditionError);
    const auto x = triple_annulus_diameter(a[0], a[1], a[2], 1e-3, 100'000, 9);
    const auto y = triple_annulus_diameter(a[0], a[1], a[2], 1e-3, 100'000, 9);
    CHECK(x.diameterEstimate == y.diameterEstimate);
    CHECK(x.hits == y.hits);
  }
}
