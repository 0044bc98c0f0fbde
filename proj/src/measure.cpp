#include "udist/measure.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "udist/errors.hpp"
#include "udist/fractal.hpp"
#include "udist/parallel.hpp"
#include "udist/quadrature.hpp"

namespace udist {

namespace {

std::int64_t isqrt_floor(std::int64_t n) {
  if (n <= 0) return 0;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

std::int64_t isqrt_ceil(std::int64_t n) {
  const std::int64_t r = isqrt_floor(n);
  return r * r == n ? r : r + 1;
}

template <class Fn>
void for_each_set(const Bitset& b, std::uint64_t lo, std::uint64_t hi, Fn&& fn) {
  if (lo >= hi) return;
  const auto& w = b.words();
  const std::uint64_t first = lo >> 6, last = (hi - 1) >> 6;
  for (std::uint64_t wi = first; wi <= last; ++wi) {
    std::uint64_t word = w[wi];
    if (wi == first) word &= ~std::uint64_t{0} << (lo & 63);
    if (wi == last) {
      const unsigned e = (hi - 1) & 63;
      if (e < 63) word &= (std::uint64_t{2} << e) - 1;
    }
    while (word) {
      fn(wi * 64 + static_cast<std::uint64_t>(std::countr_zero(word)));
      word &= word - 1;
    }
  }
}

// Rows along axis 0 grouped into classes of identical occupancy; class 0 is
// the empty row.
struct RowTable {
  int d = 1;
  std::int64_t nx = 1, ny = 1, nz = 1;
  std::vector<std::uint32_t> rowClass;
  std::vector<std::vector<std::int32_t>> pos;

  std::int64_t rows() const { return ny * nz; }
};

RowTable build_rows(const GridIndicator& g, const Bitset& bits) {
  RowTable t;
  t.d = g.d;
  t.nx = g.dims[0];
  t.ny = g.dims[1];
  t.nz = g.dims[2];
  require(t.nx <= std::numeric_limits<std::int32_t>::max(), "grid row too long");
  t.rowClass.assign(static_cast<std::size_t>(t.rows()), 0);
  t.pos.emplace_back();
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> byHash;
  std::vector<std::int32_t> cur;
  for (std::int64_t r = 0; r < t.rows(); ++r) {
    cur.clear();
    const auto base = static_cast<std::uint64_t>(r * t.nx);
    for_each_set(bits, base, base + static_cast<std::uint64_t>(t.nx),
                 [&](std::uint64_t i) { cur.push_back(static_cast<std::int32_t>(i - base)); });
    if (cur.empty()) continue;
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : cur) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ULL;
    auto& bucket = byHash[h];
    std::uint32_t id = 0;
    for (auto c : bucket)
      if (t.pos[c] == cur) {
        id = c;
        break;
      }
    if (id == 0) {
      id = static_cast<std::uint32_t>(t.pos.size());
      t.pos.push_back(cur);
      bucket.push_back(id);
    }
    t.rowClass[static_cast<std::size_t>(r)] = id;
  }
  return t;
}

// sum over x in A of #{y in B : x + lo <= y <= x + hi}.
std::uint64_t count_window(const std::vector<std::int32_t>& A, const std::vector<std::int32_t>& B, std::int64_t lo,
                           std::int64_t hi) {
  std::uint64_t total = 0;
  std::size_t i0 = 0, i1 = 0;
  for (std::int64_t x : A) {
    while (i0 < B.size() && B[i0] < x + lo) ++i0;
    if (i1 < i0) i1 = i0;
    while (i1 < B.size() && B[i1] <= x + hi) ++i1;
    total += i1 - i0;
  }
  return total;
}

// Pairs (x1 in A, x2 in B) with dx^2 + dyz2 in the band.
std::uint64_t row_pair_count(const std::vector<std::int32_t>& A, const std::vector<std::int32_t>& B,
                             const IndexBand& band, std::int64_t dyz2) {
  if (dyz2 > band.hi) return 0;
  const std::int64_t b = isqrt_floor(band.hi - dyz2);
  const std::int64_t a = band.lo - dyz2 <= 0 ? 0 : isqrt_ceil(band.lo - dyz2);
  if (a > b) return 0;
  if (a == 0) return count_window(A, B, -b, b);
  return count_window(A, B, a, b) + count_window(A, B, -b, -a);
}

// Number of positions in sorted P within [lo, hi].
std::uint64_t count_range(const std::vector<std::int32_t>& P, std::int64_t lo, std::int64_t hi) {
  if (lo > hi) return 0;
  auto l = std::lower_bound(P.begin(), P.end(), lo, [](std::int32_t v, std::int64_t x) { return v < x; });
  auto h = std::upper_bound(P.begin(), P.end(), hi, [](std::int64_t x, std::int32_t v) { return x < v; });
  return static_cast<std::uint64_t>(h - l);
}

struct MemoKey {
  std::uint32_t c1, c2;
  std::int64_t dyz2;
  bool operator==(const MemoKey&) const = default;
};
struct MemoHash {
  std::size_t operator()(const MemoKey& k) const {
    std::uint64_t h = (static_cast<std::uint64_t>(k.c1) << 32) ^ k.c2;
    h ^= static_cast<std::uint64_t>(k.dyz2) * 0x9E3779B97F4A7C15ULL;
    h ^= h >> 31;
    return static_cast<std::size_t>(h * 0xBF58476D1CE4E5B9ULL);
  }
};

std::uint64_t count_band_pairs(const RowTable& t, const IndexBand& band) {
  if (band.empty() || t.pos.size() <= 1) return 0;
  const std::int64_t D = isqrt_floor(band.hi);
  std::uint64_t total = 0, work = 0;
  if (t.d <= 2) {
    struct Run {
      std::int64_t s, e;
      std::uint32_t c;
    };
    std::vector<Run> runs;
    for (std::int64_t r = 0; r < t.ny; ++r) {
      const auto c = t.rowClass[static_cast<std::size_t>(r)];
      if (!runs.empty() && runs.back().e == r && runs.back().c == c) {
        ++runs.back().e;
      } else {
        runs.push_back({r, r + 1, c});
      }
    }
    std::erase_if(runs, [](const Run& r) { return r.c == 0; });
    const auto nRuns = static_cast<std::int64_t>(runs.size());
#pragma omp parallel
    {
      std::unordered_map<MemoKey, std::uint64_t, MemoHash> memo;
#pragma omp for schedule(dynamic, 1) reduction(+ : total, work)
      for (std::int64_t i = 0; i < nRuns; ++i) {
        const Run& ri = runs[static_cast<std::size_t>(i)];
        auto jt = std::lower_bound(runs.begin(), runs.end(), ri.s - D,
                                   [](const Run& r, std::int64_t v) { return r.e - 1 < v; });
        for (; jt != runs.end() && jt->s <= ri.e - 1 + D; ++jt) {
          const Run& rj = *jt;
          const std::int64_t dlo = std::max(rj.s - (ri.e - 1), -D);
          const std::int64_t dhi = std::min((rj.e - 1) - ri.s, D);
          for (std::int64_t dy = dlo; dy <= dhi; ++dy) {
            const std::int64_t mult = std::min(ri.e, rj.e - dy) - std::max(ri.s, rj.s - dy);
            if (mult <= 0) continue;
            const MemoKey key{ri.c, rj.c, dy * dy};
            auto it = memo.find(key);
            ++work;
            if (it == memo.end()) {
              it = memo.emplace(key, row_pair_count(t.pos[ri.c], t.pos[rj.c], band, dy * dy)).first;
              work += 2 * (t.pos[ri.c].size() + t.pos[rj.c].size());
            }
            total += static_cast<std::uint64_t>(mult) * it->second;
          }
        }
      }
    }
  } else {
    const std::int64_t rows = t.rows();
#pragma omp parallel
    {
      std::unordered_map<MemoKey, std::uint64_t, MemoHash> memo;
#pragma omp for schedule(dynamic, 16) reduction(+ : total, work)
      for (std::int64_t r1 = 0; r1 < rows; ++r1) {
        const auto c1 = t.rowClass[static_cast<std::size_t>(r1)];
        if (c1 == 0) continue;
        const std::int64_t y = r1 % t.ny, z = r1 / t.ny;
        for (std::int64_t dz = -D; dz <= D; ++dz) {
          const std::int64_t z2 = z + dz;
          if (z2 < 0 || z2 >= t.nz) continue;
          const std::int64_t rem = isqrt_floor(band.hi - dz * dz);
          for (std::int64_t dy = -rem; dy <= rem; ++dy) {
            const std::int64_t y2 = y + dy;
            if (y2 < 0 || y2 >= t.ny) continue;
            const auto c2 = t.rowClass[static_cast<std::size_t>(y2 + t.ny * z2)];
            if (c2 == 0) continue;
            const std::int64_t dyz2 = dy * dy + dz * dz;
            const MemoKey key{c1, c2, dyz2};
            auto it = memo.find(key);
            ++work;
            if (it == memo.end()) {
              it = memo.emplace(key, row_pair_count(t.pos[c1], t.pos[c2], band, dyz2)).first;
              work += 2 * (t.pos[c1].size() + t.pos[c2].size());
            }
            total += it->second;
          }
        }
      }
    }
  }
  if (work > kCellPairCap) throw CapExceeded("cell-pair work cap exceeded: " + std::to_string(work) + " cell visits");
  return total;
}

// Calls fn(x, y, z) for every set cell of t whose index offset from (cx, cy,
// cz) has squared length in band. Rows are visited in ascending (z, y) order.
template <class Fn>
void visit_band(const RowTable& t, std::int64_t cx, std::int64_t cy, std::int64_t cz, const IndexBand& band,
                Fn&& fn) {
  if (band.empty()) return;
  const std::int64_t D = isqrt_floor(band.hi);
  const std::int64_t Dz = t.d == 3 ? D : 0, Dy = t.d >= 2 ? D : 0;
  for (std::int64_t dz = -Dz; dz <= Dz; ++dz) {
    const std::int64_t z = cz + dz;
    if (z < 0 || z >= t.nz) continue;
    const std::int64_t remY = std::min(Dy, isqrt_floor(band.hi - dz * dz));
    for (std::int64_t dy = -remY; dy <= remY; ++dy) {
      const std::int64_t y = cy + dy;
      if (y < 0 || y >= t.ny) continue;
      const auto c = t.rowClass[static_cast<std::size_t>(y + t.ny * z)];
      if (c == 0) continue;
      const std::int64_t dyz2 = dy * dy + dz * dz;
      if (dyz2 > band.hi) continue;
      const std::int64_t b = isqrt_floor(band.hi - dyz2);
      const std::int64_t a = band.lo - dyz2 <= 0 ? 0 : isqrt_ceil(band.lo - dyz2);
      if (a > b) continue;
      fn(c, y, z, cx - b, a == 0 ? cx + b : cx - a);
      if (a > 0) fn(c, y, z, cx + a, cx + b);
    }
  }
}

std::uint64_t band_count(const RowTable& t, std::int64_t cx, std::int64_t cy, std::int64_t cz, const IndexBand& band) {
  std::uint64_t n = 0;
  visit_band(t, cx, cy, cz, band, [&](std::uint32_t c, std::int64_t, std::int64_t, std::int64_t lo, std::int64_t hi) {
    n += count_range(t.pos[c], lo, hi);
  });
  return n;
}

template <class Fn>
void band_cells(const RowTable& t, std::int64_t cx, std::int64_t cy, std::int64_t cz, const IndexBand& band,
                Fn&& fn) {
  visit_band(t, cx, cy, cz, band, [&](std::uint32_t c, std::int64_t y, std::int64_t z, std::int64_t lo, std::int64_t hi) {
    const auto& P = t.pos[c];
    auto it = std::lower_bound(P.begin(), P.end(), lo, [](std::int32_t v, std::int64_t x) { return v < x; });
    for (; it != P.end() && *it <= hi; ++it)
      fn(static_cast<std::uint64_t>(*it + t.nx * (y + t.ny * z)));
  });
}

void require_grid_band(const GridIndicator& g, double w) {
  require(g.d >= 1 && g.d <= 3, "grid dimension must be 1, 2 or 3");
  require(w > 0 && std::isfinite(w), "width multiplier must be positive");
  require(w * g.delta < 1, "band 1 - w delta must be positive");
}

}  // namespace

IndexBand index_band(double lo, double hi, double cell, bool outward) {
  require(cell > 0, "cell must be positive");
  IndexBand b;
  if (hi < 0 || hi < lo) return b;
  constexpr long double kSlack = 4 * std::numeric_limits<double>::epsilon();
  const long double l = lo <= 0 ? 0.0L : std::pow(static_cast<long double>(lo) / cell, 2);
  const long double h = std::pow(static_cast<long double>(hi) / cell, 2);
  require(h < 9e18L, "band too wide for the cell size");
  if (outward) {
    b.lo = static_cast<std::int64_t>(std::ceil(l * (1 - kSlack)));
    b.hi = static_cast<std::int64_t>(std::floor(h * (1 + kSlack)));
  } else {
    b.lo = static_cast<std::int64_t>(std::ceil(l * (1 + kSlack)));
    b.hi = static_cast<std::int64_t>(std::floor(h * (1 - kSlack)));
  }
  return b;
}

namespace {

struct GridBands {
  IndexBand outer, inner;
};

GridBands grid_bands(const GridIndicator& g, double w) {
  const double slack = std::sqrt(static_cast<double>(g.d)) * g.cell;
  const double rm = 1 - w * g.delta, rp = 1 + w * g.delta;
  GridBands b;
  b.outer = index_band(rm - slack, rp + slack, g.cell, true);
  if (rm + slack <= rp - slack) b.inner = index_band(rm + slack, rp - slack, g.cell, false);
  return b;
}

DeltaBracket finish_bracket(const GridIndicator& g, std::uint64_t innerPairs, std::uint64_t outerPairs) {
  const double v2 = std::pow(g.cell_volume(), 2);
  return {static_cast<double>(innerPairs) * v2, static_cast<double>(outerPairs) * v2, innerPairs, outerPairs};
}

}  // namespace

DeltaBracket measure_D_delta_grid(const GridIndicator& g, double w) {
  require_grid_band(g, w);
  const auto bands = grid_bands(g, w);
  const auto occ = build_rows(g, g.occupied);
  const std::uint64_t outer = count_band_pairs(occ, bands.outer);
  const auto inn = build_rows(g, g.inner);
  const std::uint64_t inner = count_band_pairs(inn, bands.inner);
  return finish_bracket(g, inner, outer);
}

DeltaBracket measure_D_delta_grid_reference(const GridIndicator& g, double w) {
  require_grid_band(g, w);
  const auto bands = grid_bands(g, w);
  auto count = [&](const Bitset& bits, const IndexBand& band) {
    std::vector<std::array<std::int64_t, 3>> pts;
    for (std::uint64_t i = 0; i < bits.size(); ++i)
      if (bits.get(i)) pts.push_back(g.coords(i));
    std::uint64_t n = 0;
    if (band.empty()) return n;
    if (static_cast<double>(pts.size()) * static_cast<double>(pts.size()) > static_cast<double>(kCellPairCap))
      throw CapExceeded("reference pair loop exceeds the cell-pair cap");
    for (const auto& a : pts)
      for (const auto& b : pts) {
        std::int64_t s = 0;
        for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
        if (s >= band.lo && s <= band.hi) ++n;
      }
    return n;
  };
  return finish_bracket(g, count(g.inner, bands.inner), count(g.occupied, bands.outer));
}

// ---------------------------------------------------------------------------
// Product path

namespace {

struct PieceSums {
  double value = 0.0, error = 0.0;
  std::uint64_t pieces = 0;
};

// Integrates g over [t0, t1] in subpieces no longer than half the distance to
// the complex singularity at +-i sqrt(e0).
template <class G>
void integrate_tau(const G& g, double t0, double t1, double e0, PieceSums& acc) {
  double t = t0;
  while (t < t1) {
    const double h = 0.5 * std::sqrt(t * t + e0);
    const double next = std::min(t1, t + h);
    const double a = gauss_legendre10(g, t, next), b = gauss_legendre5(g, t, next);
    acc.value += a;
    acc.error += std::abs(a - b);
    ++acc.pieces;
    t = next;
  }
}

}  // namespace

ProductMeasure measure_D_delta_product(const PiecewiseLinear& F, const PiecewiseLinear& B, double delta, double w) {
  require(delta > 0 && w > 0 && w * delta < 1, "need delta > 0, w > 0 and w delta < 1");
  if (F.size() < 2 || B.size() < 2) return {};
  const double Rm = 1 - w * delta, Rp = 1 + w * delta, e0 = 2 * w * delta;
  const auto& fx = F.x();
  const auto& bx = B.x();
  const std::size_t nseg = fx.size() - 1;
  const long double P0 = B.primitive(0.0);

  auto kinks_in = [&](double lo, double hi, std::vector<double>& out) {
    auto it = std::upper_bound(bx.begin(), bx.end(), lo);
    for (; it != bx.end() && *it < hi; ++it) out.push_back(*it);
  };

  auto inner_part = [&](std::size_t k, double a, double b, PieceSums& acc) {
    const double ta = std::sqrt(Rm - a), tb = std::sqrt(std::max(0.0, Rm - b));
    auto um = [&](double t) { return t * std::sqrt(2 * Rm - t * t); };
    auto up = [&](double t) { return std::sqrt((e0 + t * t) * (2 - t * t)); };
    if (B.vanishes_on(um(tb), up(ta))) return;
    std::vector<double> taus{tb, ta}, ks;
    kinks_in(um(tb), um(ta), ks);
    for (double kap : ks) taus.push_back(std::sqrt(kap * kap / (Rm + std::sqrt(std::max(0.0, Rm * Rm - kap * kap)))));
    ks.clear();
    kinks_in(up(tb), up(ta), ks);
    for (double kap : ks) {
      const double e = kap * kap / (Rp + std::sqrt(std::max(0.0, Rp * Rp - kap * kap)));
      taus.push_back(std::sqrt(std::clamp(e - e0, tb * tb, ta * ta)));
    }
    std::sort(taus.begin(), taus.end());
    for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
      const double t0 = taus[i], t1 = taus[i + 1];
      if (!(t1 > t0)) continue;
      const double tm = 0.5 * (t0 + t1);
      const std::size_t kp = B.segment(up(tm)), km = B.segment(um(tm));
      auto g = [&](double t) {
        const double h = static_cast<double>(B.primitive_in(kp, up(t)) - B.primitive_in(km, um(t)));
        return F.value_in(k, Rm - t * t) * h * 2 * t;
      };
      integrate_tau(g, t0, t1, e0, acc);
    }
  };

  auto outer_part = [&](std::size_t k, double a, double b, PieceSums& acc) {
    const double ta = std::sqrt(Rp - a), tb = std::sqrt(std::max(0.0, Rp - b));
    auto up = [&](double t) { return t * std::sqrt(2 * Rp - t * t); };
    if (B.vanishes_on(0.0, up(ta))) return;
    std::vector<double> taus{tb, ta}, ks;
    kinks_in(up(tb), up(ta), ks);
    for (double kap : ks)
      taus.push_back(std::clamp(std::sqrt(kap * kap / (Rp + std::sqrt(std::max(0.0, Rp * Rp - kap * kap)))), tb, ta));
    std::sort(taus.begin(), taus.end());
    for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
      const double t0 = taus[i], t1 = taus[i + 1];
      if (!(t1 > t0)) continue;
      const std::size_t kp = B.segment(up(0.5 * (t0 + t1)));
      auto g = [&](double t) {
        const double h = static_cast<double>(B.primitive_in(kp, up(t)) - P0);
        return F.value_in(k, Rp - t * t) * h * 2 * t;
      };
      // The outer substitution is smooth at t = 0, so the subpiece scale is
      // the piece length itself.
      integrate_tau(g, t0, t1, 4 * (t1 - t0) * (t1 - t0) + e0, acc);
    }
  };

  std::vector<PieceSums> parts(kReductionChunks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t c = 0; c < kReductionChunks; ++c) {
    const std::size_t lo = nseg * c / kReductionChunks, hi = nseg * (c + 1) / kReductionChunks;
    PieceSums acc;
    for (std::size_t k = lo; k < hi; ++k) {
      const double s0 = std::max(fx[k], 0.0), s1 = std::min(fx[k + 1], Rp);
      if (!(s1 > s0)) continue;
      if (F.value_in(k, s0) == 0.0 && F.value_in(k, s1) == 0.0) continue;
      if (s0 < Rm) inner_part(k, s0, std::min(s1, Rm), acc);
      if (s1 > Rm) outer_part(k, std::max(s0, Rm), s1, acc);
    }
    parts[c] = acc;
  }
  ProductMeasure r;
  for (const auto& p : parts) {
    r.value += p.value;
    r.quadError += p.error;
    r.pieces += p.pieces;
  }
  r.value *= 4;
  r.quadError *= 4;
  return r;
}

ProductMeasure measure_D_delta_product(const IntervalUnion& F, const IntervalUnion& B, double delta, double spacing,
                                       double w) {
  require(spacing >= 0 && spacing <= delta / 4, "spacing must be in [0, delta / 4]");
  if (F.empty() || B.empty()) return {};
  const double Rp = 1 + w * delta;
  if (spacing == 0) {
    return measure_D_delta_product(PiecewiseLinear::tabulate(autocorrelation_pairs(F), 0.0, Rp),
                                   PiecewiseLinear::tabulate(autocorrelation_pairs(B), 0.0, Rp), delta, w);
  }
  return measure_D_delta_product(correlogram_fft(F, spacing).interpolant(), correlogram_fft(B, spacing).interpolant(),
                                 delta, w);
}

ProductMeasure measure_D_delta_cantor_product(int p1, int q1, int p2, int q2, const Rational& delta, double w) {
  const double dd = delta.to_double();
  const double Rp = 1 + w * dd;
  const auto cF = cantor_autocorrelation(p1, q1, delta, Rational(1));
  const auto cB = cantor_autocorrelation(p2, q2, delta, Rational(0));
  return measure_D_delta_product(PiecewiseLinear::tabulate(cF, 0.0, Rp), PiecewiseLinear::tabulate(cB, 0.0, Rp), dd,
                                 w);
}

// ---------------------------------------------------------------------------
// Sections

namespace {

std::vector<double> all_sections(const GridIndicator& g, const RowTable& t, const std::vector<std::uint64_t>& occ,
                                 double w) {
  const IndexBand band = index_band(1 - w * g.delta, 1 + w * g.delta, g.cell, true);
  const double vol = g.cell_volume();
  std::vector<double> lam(occ.size());
  const auto n = static_cast<std::int64_t>(occ.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto c = g.coords(occ[static_cast<std::size_t>(i)]);
    lam[static_cast<std::size_t>(i)] = static_cast<double>(band_count(t, c[0], c[1], c[2], band)) * vol;
  }
  return lam;
}

}  // namespace

double section_measure(const GridIndicator& g, std::uint64_t idx, double w) {
  require_grid_band(g, w);
  require(idx < g.cell_count(), "cell index out of range");
  const auto t = build_rows(g, g.occupied);
  const IndexBand band = index_band(1 - w * g.delta, 1 + w * g.delta, g.cell, true);
  const auto c = g.coords(idx);
  return static_cast<double>(band_count(t, c[0], c[1], c[2], band)) * g.cell_volume();
}

int SectionHistogram::bin_of(double value) const {
  if (value <= 0) return 0;
  const double floorV = std::pow(delta, d);
  if (value < floorV) return 1;
  int m = static_cast<int>(std::floor(std::log2(value / floorV)));
  // Correct log2 roundoff at exact powers of two.
  while (m > 0 && value < floorV * std::ldexp(1.0, m)) --m;
  while (value >= floorV * std::ldexp(1.0, m + 1)) ++m;
  return m + 2;
}

SectionHistogram section_histogram(const GridIndicator& g, double w) {
  require(g.d == 2 || g.d == 3, "section histogram needs d = 2 or 3");
  require_grid_band(g, w);
  SectionHistogram h;
  h.delta = g.delta;
  h.d = g.d;
  const auto t = build_rows(g, g.occupied);
  const auto occ = g.occupied_indices();
  h.lambda = all_sections(g, t, occ, w);
  int maxBin = 1;
  std::vector<int> bins(occ.size());
  for (std::size_t i = 0; i < occ.size(); ++i) {
    bins[i] = h.bin_of(h.lambda[i]);
    maxBin = std::max(maxBin, bins[i]);
  }
  const int nb = maxBin + 1;
  h.counts.assign(static_cast<std::size_t>(nb), 0);
  h.centers.assign(static_cast<std::size_t>(nb), {});
  h.lambdaEdges.assign(static_cast<std::size_t>(nb), 0.0);
  for (int b = 2; b < nb; ++b) h.lambdaEdges[static_cast<std::size_t>(b)] = std::pow(g.delta, g.d) * std::ldexp(1.0, b - 2);
  for (std::size_t i = 0; i < occ.size(); ++i) {
    ++h.counts[static_cast<std::size_t>(bins[i])];
    h.centers[static_cast<std::size_t>(bins[i])].push_back(occ[i]);
  }
  h.geometricBins = std::max(0, nb - 2);
  h.withinBinBound = h.geometricBins <= 4 * std::log2(1 / g.delta);
  return h;
}

// ---------------------------------------------------------------------------
// Annulus intersection

AnnulusArea annulus_intersection_area(const Vector& c1, const Vector& c2, double delta) {
  require_same_dim(c1, c2);
  require(c1.dim() == 2, "annulus intersection is planar");
  require(delta > 0 && delta <= 1e-2, "delta must be in (0, 1e-2]");
  const double s = distance(c1, c2);
  require(s < 2 - kAnnulusEta, "center distance must be below 2 - eta");
  const double Rm = 1 - 2 * delta, Rp = 1 + 2 * delta;
  AnnulusArea out;
  if (s == 0) {
    out.area = 8 * M_PI * delta;
  } else {
    auto theta = [&](double r) {
      const double L = (r * r + s * s - Rp * Rp) / (2 * r * s);
      const double U = (r * r + s * s - Rm * Rm) / (2 * r * s);
      return 2 * r * (std::acos(std::clamp(L, -1.0, 1.0)) - std::acos(std::clamp(U, -1.0, 1.0)));
    };
    std::vector<double> cuts{Rm, Rp};
    for (double R : {Rm, Rp})
      for (double v : {R + s, R - s, s - R})
        if (v > Rm && v < Rp) cuts.push_back(v);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (!(cuts[i + 1] > cuts[i])) continue;
      const auto q = integrate_adaptive(theta, cuts[i], cuts[i + 1], 1e-10, 1e-18, 50);
      out.area += q.value;
      out.quadError += q.error;
    }
  }
  out.ratio = out.area * (delta + s) / (delta * delta);
  return out;
}

// ---------------------------------------------------------------------------
// Separated subsets

std::vector<std::size_t> separated_subset_indices(const std::vector<Vector>& points, double r) {
  require(r > 0 && std::isfinite(r), "separation must be positive");
  std::vector<std::size_t> kept;
  if (points.empty()) return kept;
  const int d = points[0].dim();
  using Key = std::array<std::int64_t, kMaxDim>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 1469598103934665603ULL;
      for (auto v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ULL;
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<Key, std::vector<std::size_t>, KeyHash> buckets;
  auto key_of = [&](const Vector& p) {
    Key k{};
    for (int i = 0; i < d; ++i) k[i] = static_cast<std::int64_t>(std::floor(p[i] / r));
    return k;
  };
  std::int64_t neighbors = 1;
  for (int i = 0; i < d; ++i) neighbors *= 3;
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(points[i].dim() == d, "points must share one dimension");
    const Key k = key_of(points[i]);
    bool ok = true;
    for (std::int64_t code = 0; code < neighbors && ok; ++code) {
      Key n = k;
      std::int64_t c = code;
      for (int a = 0; a < d; ++a) {
        n[a] += c % 3 - 1;
        c /= 3;
      }
      auto it = buckets.find(n);
      if (it == buckets.end()) continue;
      for (auto j : it->second)
        if (distance(points[i], points[j]) < r) {
          ok = false;
          break;
        }
    }
    if (ok) {
      kept.push_back(i);
      buckets[k].push_back(i);
    }
  }
  return kept;
}

std::vector<Vector> separated_subset(const std::vector<Vector>& points, double r) {
  std::vector<Vector> out;
  for (auto i : separated_subset_indices(points, r)) out.push_back(points[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Incidence census

IncidenceCensus incidence_census(const GridIndicator& g, double lambda, double c) {
  require(g.d == 2 || g.d == 3, "incidence census needs d = 2 or 3");
  require(lambda > 0 && c > 0, "lambda and c must be positive");
  require(g.alpha > 0, "grid alpha must be positive");
  require_grid_band(g, 3.0);
  IncidenceCensus out;
  out.delta = g.delta;
  out.lambda = lambda;
  out.c = c;
  const int d = g.d;
  const double delta = g.delta, alpha = g.alpha;

  const auto occ = g.occupied_indices();
  const auto occRows = build_rows(g, g.occupied);
  const auto lam = all_sections(g, occRows, occ, 2.0);

  std::vector<std::uint64_t> candIdx;
  std::vector<Vector> candPts, occPts;
  occPts.reserve(occ.size());
  for (std::size_t i = 0; i < occ.size(); ++i) {
    occPts.push_back(g.center(occ[i]));
    if (lam[i] >= lambda) {
      candIdx.push_back(occ[i]);
      candPts.push_back(occPts.back());
    }
  }
  std::vector<std::uint64_t> centerIdx;
  for (auto i : separated_subset_indices(candPts, 2 * delta)) {
    centerIdx.push_back(candIdx[i]);
    out.centers.push_back(candPts[i]);
  }
  std::vector<std::uint64_t> jIdx;  // ascending linear indices
  for (auto i : separated_subset_indices(occPts, delta)) {
    jIdx.push_back(occ[i]);
    out.J.push_back(occPts[i]);
  }

  Bitset jBits(g.cell_count());
  for (auto i : jIdx) jBits.set(i);
  const auto jRows = build_rows(g, jBits);
  const IndexBand band = index_band(1 - 3 * delta, 1 + 3 * delta, g.cell, true);

  std::vector<std::vector<std::uint32_t>> S(centerIdx.size());
  for (std::size_t n = 0; n < centerIdx.size(); ++n) {
    const auto cc = g.coords(centerIdx[n]);
    band_cells(jRows, cc[0], cc[1], cc[2], band, [&](std::uint64_t lin) {
      const auto it = std::lower_bound(jIdx.begin(), jIdx.end(), lin);
      S[n].push_back(static_cast<std::uint32_t>(it - jIdx.begin()));
    });
    std::sort(S[n].begin(), S[n].end());
    out.sectionSizes.push_back(S[n].size());
  }

  out.separationThreshold = c * std::pow(lambda / std::pow(delta, d - alpha), 1 / alpha);
  const double thr = out.separationThreshold;
  auto far = [&](std::uint32_t a, std::uint32_t b) { return distance(out.J[a], out.J[b]) >= thr; };

  // Tuples of each center in ascending order; visit(first, key).
  using Key = std::array<std::uint32_t, 3>;
  auto enumerate = [&](auto&& visit) {
    for (const auto& s : S) {
      const std::size_t m = s.size();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
          if (!far(s[i], s[j])) continue;
          if (d == 2) {
            visit(Key{s[i], s[j], 0});
            continue;
          }
          for (std::size_t k = j + 1; k < m; ++k)
            if (far(s[i], s[k]) && far(s[j], s[k])) visit(Key{s[i], s[j], s[k]});
        }
    }
  };

  std::vector<std::uint64_t> perFirst(jIdx.size() + 1, 0);
  std::uint64_t total = 0;
  enumerate([&](const Key& k) {
    ++perFirst[k[0]];
    if (++total > kTupleCap) throw CapExceeded("tuple-enumeration cap exceeded");
  });
  out.vCount = total;

  // Fibers are counted by sorting the tuples of a range of first elements.
  constexpr std::uint64_t kBuffer = std::uint64_t{1} << 23;
  std::size_t first = 0;
  std::vector<Key> buf;
  while (first < jIdx.size()) {
    std::size_t last = first;
    std::uint64_t n = 0;
    while (last < jIdx.size() && (n == 0 || n + perFirst[last] <= kBuffer)) n += perFirst[last++];
    if (n > 0) {
      buf.clear();
      buf.reserve(static_cast<std::size_t>(n));
      enumerate([&](const Key& k) {
        if (k[0] >= first && k[0] < last) buf.push_back(k);
      });
      std::sort(buf.begin(), buf.end());
      for (std::size_t i = 0; i < buf.size();) {
        std::size_t j = i;
        while (j < buf.size() && buf[j] == buf[i]) ++j;
        out.maxProjectionFiber = std::max<std::uint64_t>(out.maxProjectionFiber, j - i);
        i = j;
      }
    }
    first = last;
  }
  out.fiberBound = d == 2 ? std::pow(delta, 2 - alpha) / lambda
                          : std::pow(delta, -alpha / 2) * std::pow(delta, 3 - alpha) / lambda;
  out.fiberRatio = static_cast<double>(out.maxProjectionFiber) / out.fiberBound;
  return out;
}

UnionBoundCheck union_bound_check(const GridIndicator& g, const std::vector<std::uint64_t>& centers, double w) {
  require_grid_band(g, w);
  const auto t = build_rows(g, g.occupied);
  const IndexBand band = index_band(1 - w * g.delta, 1 + w * g.delta, g.cell, true);
  std::unordered_map<std::uint64_t, std::uint64_t> mult;
  for (auto idx : centers) {
    require(idx < g.cell_count(), "center index out of range");
    const auto c = g.coords(idx);
    band_cells(t, c[0], c[1], c[2], band, [&](std::uint64_t lin) { ++mult[lin]; });
  }
  UnionBoundCheck r;
  r.unionCells = mult.size();
  for (const auto& [k, m] : mult) {
    r.sumSingles += m;
    r.sumPairs += m * (m - 1) / 2;
  }
  r.holds = r.unionCells + r.sumPairs >= r.sumSingles;
  return r;
}

}  // namespace udist
