#include "udist/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "udist/parallel.hpp"

namespace udist {

IntervalUnion cantor_stage(const CantorSpec& s) {
  require(s.p >= 1 && s.q > s.p, "Cantor set needs 1 <= p < q");
  require(s.j >= 0, "Cantor stage must be nonnegative");
  if (s.j * s.q > kDyadicDepthCap) throw CapExceeded("Cantor stage exceeds the dyadic precision cap j*q <= 40");
  if (static_cast<std::uint64_t>(s.j) * s.p > 24) throw CapExceeded("Cantor stage has more than 2^24 intervals");
  const std::int64_t children = std::int64_t{1} << s.p;
  std::vector<Rational> starts{Rational(0)};
  Rational len(1);
  for (int level = 1; level <= s.j; ++level) {
    const Rational child = len * Rational::dyadic(1, s.q);
    const Rational step = (len - child) / Rational(children - 1);
    std::vector<Rational> next;
    next.reserve(starts.size() * static_cast<std::size_t>(children));
    for (const auto& x : starts)
      for (std::int64_t k = 0; k < children; ++k) next.push_back(x + step * Rational(k));
    starts.swap(next);
    len = child;
  }
  std::vector<Interval> iv;
  iv.reserve(starts.size());
  for (const auto& x : starts) iv.push_back({x, x + len});
  return IntervalUnion(std::move(iv));
}

int cantor_stage_for_delta(int p, int q, const Rational& delta) {
  require(p >= 1 && q > p, "Cantor set needs 1 <= p < q");
  require(delta > Rational(0), "delta must be positive");
  int j = 0;
  while (Rational::dyadic(1, j * q) > delta * Rational(2)) {
    ++j;
    if (j * q > kDyadicDepthCap) throw CapExceeded("Cantor stage needed for this delta exceeds j*q <= 40");
  }
  return j;
}

IntervalUnion cantor_neighborhood(int p, int q, const Rational& delta) {
  return neighborhood(cantor_stage({p, q, cantor_stage_for_delta(p, q, delta)}), delta);
}

std::uint64_t covering_count(int p, int q, const Rational& h) {
  require(p >= 1 && q > p, "Cantor set needs 1 <= p < q");
  require(h > Rational(0), "mesh size must be positive");
  int J = 0;
  while (Rational::dyadic(1, J * q) > h) {
    ++J;
    if (J * q > kDyadicDepthCap) throw CapExceeded("mesh finer than the dyadic precision cap");
  }
  // Stage-J intervals have length <= h, so each meets exactly the cells of
  // its two endpoints, both of which lie in C.
  const auto stage = cantor_stage({p, q, J});
  std::vector<std::int64_t> cells;
  cells.reserve(2 * stage.size());
  for (const auto& i : stage.intervals()) {
    cells.push_back((i.lo / h).floor());
    cells.push_back((i.hi / h).floor());
  }
  std::sort(cells.begin(), cells.end());
  return static_cast<std::uint64_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
}

GridIndicator rasterize(const std::vector<IntervalUnion>& axes, double delta, double cell, double alpha) {
  const int d = static_cast<int>(axes.size());
  require(d >= 1 && d <= 3, "rasterize needs 1 to 3 axes");
  require(delta > 0 && cell > 0, "delta and cell must be positive");
  require(cell <= delta, "cell must not exceed delta");
  const Rational dR = Rational::from_double(delta);
  const Rational cR = Rational::from_double(cell);
  bool empty = false;
  for (const auto& a : axes) empty = empty || a.empty();
  if (empty) return GridIndicator(d, Vector(d), cell, {1, 1, 1}, delta, alpha);

  std::vector<IntervalUnion> nb;
  for (const auto& a : axes) nb.push_back(neighborhood(a, dR));
  Vector origin(d);
  std::array<std::int64_t, 3> dims{1, 1, 1};
  std::vector<std::vector<char>> occ(d), inn(d);
  std::uint64_t occProduct = 1;
  for (int a = 0; a < d; ++a) {
    const Rational o = nb[a].lower();
    origin[a] = o.to_double();
    dims[a] = std::max<std::int64_t>(1, ((nb[a].upper() - o) / cR).ceil());
    occ[a].assign(static_cast<std::size_t>(dims[a]), 0);
    inn[a].assign(static_cast<std::size_t>(dims[a]), 0);
    for (const auto& iv : nb[a].intervals()) {
      const Rational lo = (iv.lo - o) / cR;
      const Rational hi = (iv.hi - o) / cR;
      const std::int64_t k0 = std::max<std::int64_t>(0, lo.ceil() - 1);
      const std::int64_t k1 = std::min<std::int64_t>(dims[a] - 1, hi.floor());
      for (std::int64_t k = k0; k <= k1; ++k) occ[a][static_cast<std::size_t>(k)] = 1;
      const std::int64_t i0 = std::max<std::int64_t>(0, lo.ceil());
      const std::int64_t i1 = std::min<std::int64_t>(dims[a] - 1, hi.floor() - 1);
      for (std::int64_t k = i0; k <= i1; ++k) inn[a][static_cast<std::size_t>(k)] = 1;
    }
    occProduct *= static_cast<std::uint64_t>(std::count(occ[a].begin(), occ[a].end(), 1));
    if (occProduct > kOccupancyCap) throw CapExceeded("rasterization exceeds 1e8 occupied cells");
  }
  GridIndicator g(d, origin, cell, dims, delta, alpha);

  auto fill = [&](const std::vector<std::vector<char>>& m, Bitset& bits) {
    // Maximal runs along axis 0, replicated over occupied rows.
    std::vector<std::pair<std::int64_t, std::int64_t>> runs;
    for (std::int64_t k = 0; k < dims[0];) {
      if (!m[0][static_cast<std::size_t>(k)]) {
        ++k;
        continue;
      }
      std::int64_t e = k;
      while (e < dims[0] && m[0][static_cast<std::size_t>(e)]) ++e;
      runs.emplace_back(k, e);
      k = e;
    }
    for (std::int64_t i2 = 0; i2 < dims[2]; ++i2) {
      if (d >= 3 && !m[2][static_cast<std::size_t>(i2)]) continue;
      for (std::int64_t i1 = 0; i1 < dims[1]; ++i1) {
        if (d >= 2 && !m[1][static_cast<std::size_t>(i1)]) continue;
        for (const auto& [b, e] : runs) bits.set_range(g.index(b, i1, i2), g.index(e - 1, i1, i2) + 1);
      }
    }
  };
  fill(occ, g.occupied);
  fill(inn, g.inner);
  return g;
}

namespace {

// Counts occupied cells with centers inside a ball via per-row prefix sums.
class BallCounter {
 public:
  explicit BallCounter(const GridIndicator& g) : g_(g) {
    if (g.cell_count() > (std::uint64_t{1} << 30)) throw CapExceeded("ball counting grid too large");
    const auto n0 = static_cast<std::size_t>(g.dims[0]);
    const std::size_t rows = static_cast<std::size_t>(g.dims[1] * g.dims[2]);
    prefix_.assign(rows * (n0 + 1), 0);
    for (std::size_t r = 0; r < rows; ++r) {
      std::uint32_t* p = &prefix_[r * (n0 + 1)];
      for (std::size_t x = 0; x < n0; ++x) p[x + 1] = p[x] + (g.occupied.get(r * n0 + x) ? 1u : 0u);
    }
  }

  std::uint64_t count(std::uint64_t idx, double r) const {
    const auto c = g_.coords(idx);
    const double rc = r / g_.cell;
    const double r2 = rc * rc;
    const auto R = static_cast<std::int64_t>(std::floor(rc));
    const auto n0 = static_cast<std::size_t>(g_.dims[0]);
    std::uint64_t total = 0;
    const std::int64_t zR = g_.d >= 3 ? R : 0;
    const std::int64_t yR = g_.d >= 2 ? R : 0;
    for (std::int64_t dz = -zR; dz <= zR; ++dz) {
      const std::int64_t z = c[2] + dz;
      if (z < 0 || z >= g_.dims[2]) continue;
      for (std::int64_t dy = -yR; dy <= yR; ++dy) {
        const std::int64_t y = c[1] + dy;
        if (y < 0 || y >= g_.dims[1]) continue;
        const double rem = r2 - static_cast<double>(dy * dy + dz * dz);
        if (rem < 0) continue;
        auto w = static_cast<std::int64_t>(std::sqrt(rem));
        while (static_cast<double>((w + 1) * (w + 1)) <= rem) ++w;
        while (w > 0 && static_cast<double>(w * w) > rem) --w;
        const std::int64_t lo = std::max<std::int64_t>(0, c[0] - w);
        const std::int64_t hi = std::min<std::int64_t>(g_.dims[0] - 1, c[0] + w);
        if (lo > hi) continue;
        const std::uint32_t* p = &prefix_[static_cast<std::size_t>(y + g_.dims[1] * z) * (n0 + 1)];
        total += p[hi + 1] - p[lo];
      }
    }
    return total;
  }

 private:
  const GridIndicator& g_;
  std::vector<std::uint32_t> prefix_;
};

}  // namespace

double ball_measure(const GridIndicator& g, std::uint64_t idx, double r) {
  return static_cast<double>(BallCounter(g).count(idx, r)) * g.cell_volume();
}

AlphaSetReport alpha_set_verify(const GridIndicator& g, double alpha, std::uint64_t samples, std::uint64_t seed) {
  require(g.delta > 0, "grid has no delta");
  require(samples >= 1, "sample count must be positive");
  require(alpha >= 0, "alpha must be nonnegative");
  const auto occ = g.occupied_indices();
  require(!occ.empty(), "alpha-set check on an empty grid");
  const BallCounter counter(g);
  const double delta = g.delta;
  const double diam = std::max(g.diameter(), delta);
  const double logSpan = std::log(diam / delta);
  const double cellVol = g.cell_volume();
  const double deltaD = std::pow(delta, g.d);

  struct Best {
    double ratio = -1.0;
    std::uint64_t idx = 0;
    double r = 0.0;
  };
  std::vector<Best> best(kReductionChunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t ch = 0; ch < kReductionChunks; ++ch) {
    const std::uint64_t s0 = samples * ch / kReductionChunks;
    const std::uint64_t s1 = samples * (ch + 1) / kReductionChunks;
    std::mt19937_64 rng(derive_seed(seed, ch));
    std::uniform_int_distribution<std::size_t> pick(0, occ.size() - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::uint64_t s = s0; s < s1; ++s) {
      const std::uint64_t idx = occ[pick(rng)];
      const double r = delta * std::exp(unif(rng) * logSpan);
      const double m = static_cast<double>(counter.count(idx, r)) * cellVol;
      const double ratio = m / (std::pow(r / delta, alpha) * deltaD);
      if (ratio > best[ch].ratio) best[ch] = {ratio, idx, r};
    }
  }
  Best top;
  for (const auto& b : best)
    if (b.ratio > top.ratio) top = b;
  AlphaSetReport rep;
  rep.supRatio = top.ratio;
  rep.samplesTested = samples;
  rep.worstCenter = g.center(top.idx);
  rep.worstRadius = top.r;
  return rep;
}

double band_pair_measure(const TrapezoidSum& corr, double lo, double hi) {
  require(lo >= 0 && lo <= hi, "band needs 0 <= lo <= hi");
  return 2.0 * corr.integral(lo, hi);
}

double band_pair_measure(const IntervalUnion& E, double lo, double hi) {
  if (E.empty()) return 0.0;
  return band_pair_measure(autocorrelation_pairs(E), lo, hi);
}

LEstimateTable verify_L_estimates(int p1, int q1, int p2, int q2, int nFirst, int nLast) {
  require(nFirst >= 1 && nFirst <= nLast, "n range must be nonempty and start at 1 or later");
  const double beta = static_cast<double>(p1) / q1;
  const double gamma = static_cast<double>(p2) / q2;
  LEstimateTable t;
  t.cL0 = t.cL1 = t.cL2 = std::numeric_limits<double>::infinity();
  for (int n = nFirst; n <= nLast; ++n) {
    const int e = 2 * q1 * q2 * n + 2;
    if (e > 62) throw CapExceeded("delta_n below 2^-62");
    const Rational dR = Rational::dyadic(1, e);
    cantor_stage_for_delta(p1, q1, dR);
    cantor_stage_for_delta(p2, q2, dR);
    const double delta = dR.to_double();
    LEstimateRow row;
    row.n = n;
    row.delta = delta;
    const auto cA = cantor_autocorrelation(p1, q1, dR, Rational(0));
    const auto cB = cantor_autocorrelation(p2, q2, dR, Rational(0));
    const auto cF = cantor_autocorrelation(p1, q1, dR, Rational(1));
    row.lhsL0 = band_pair_measure(cA, 2 * delta, 2.5 * delta);
    row.lhsL1 = band_pair_measure(cB, std::sqrt(3.5 * delta), 2 * std::sqrt(delta));
    row.lhsL2 = band_pair_measure(cF, 1 - 2.5 * delta, 1 - 2 * delta);
    row.rhsL0 = std::pow(delta, 2 - beta);
    row.rhsL1 = std::pow(delta, 2 - 2 * gamma) * std::pow(delta, gamma / 2);
    row.rhsL2 = std::pow(delta, 2 - beta);
    t.cL0 = std::min(t.cL0, row.lhsL0 / row.rhsL0);
    t.cL1 = std::min(t.cL1, row.lhsL1 / row.rhsL1);
    t.cL2 = std::min(t.cL2, row.lhsL2 / row.rhsL2);
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace udist
