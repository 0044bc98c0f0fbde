#include "udist/discrete.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "udist/parallel.hpp"

namespace udist {

namespace {

using CellKey = std::array<std::int64_t, kMaxDim>;

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 0x100000001b3ULL + (h >> 29);
    return static_cast<std::size_t>(h);
  }
};

CellKey cell_of(const Vector& p, double side) {
  CellKey k{};
  for (int i = 0; i < p.dim(); ++i) {
    const double c = std::floor(p[i] / side);
    if (std::abs(c) > 4e18) throw CapExceeded("coordinate too large for the bucket grid");
    k[i] = static_cast<std::int64_t>(c);
  }
  return k;
}

// Buckets point indices by cell.
struct Buckets {
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> cells;
  std::vector<CellKey> keyOf;

  Buckets(const std::vector<Vector>& pts, double side) : keyOf(pts.size()) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      keyOf[i] = cell_of(pts[i], side);
      cells[keyOf[i]].push_back(static_cast<std::uint32_t>(i));
    }
  }
  const std::vector<std::uint32_t>* find(const CellKey& k) const {
    auto it = cells.find(k);
    return it == cells.end() ? nullptr : &it->second;
  }
};

// Offsets k in Z^d whose cell boxes can hold a pair at distance in
// [lo, hi]; `side` is the cell side. Returns false when more than `cap`
// offsets would be produced.
bool shell_offsets(int d, double side, double lo, double hi, std::size_t cap, std::vector<CellKey>& out) {
  const double slack = 1e-9;
  const std::int64_t K = static_cast<std::int64_t>(std::ceil(hi / side)) + 1;
  const double hi2 = (hi / side + slack) * (hi / side + slack);
  const double loCells = std::max(0.0, lo / side - slack);
  CellKey cur{};
  bool ok = true;
  auto rec = [&](auto&& self, int axis, double minPart, double maxPart) -> void {
    if (!ok) return;
    if (axis == d) {
      if (minPart <= hi2 && std::sqrt(maxPart) >= loCells) {
        if (out.size() >= cap) {
          ok = false;
          return;
        }
        out.push_back(cur);
      }
      return;
    }
    for (std::int64_t k = -K; k <= K; ++k) {
      const double a = static_cast<double>(std::max<std::int64_t>(0, std::abs(k) - 1));
      const double b = static_cast<double>(std::abs(k) + 1);
      if (minPart + a * a > hi2) continue;
      cur[axis] = k;
      self(self, axis + 1, minPart + a * a, maxPart + b * b);
    }
    cur[axis] = 0;
  };
  rec(rec, 0, 0.0, 0.0);
  return ok;
}

CellKey add(const CellKey& a, const CellKey& b, int d) {
  CellKey r{};
  for (int i = 0; i < d; ++i) r[i] = a[i] + b[i];
  return r;
}

// Calls visit(i, j) for every ordered pair i != j with |p_i - p_j| within
// `eps` of 1. Offsets are processed per source point, so calls for a fixed i
// are made from one thread.
template <class Visit>
void for_each_unit_pair(const PointSet& P, Visit&& visit) {
  const std::size_t n = P.size();
  if (n < 2) return;
  require(P.eps() < 0.1, "grid counter requires eps < 0.1");
  const int d = P.dim();
  const double side = 1.0 / std::sqrt(static_cast<double>(d));
  const Buckets buckets(P.points(), side);
  std::vector<CellKey> offsets;
  const std::size_t occupied = buckets.cells.size();
  const std::size_t cap = std::min<std::size_t>(2'000'000, occupied * occupied + 64);
  const bool useOffsets = shell_offsets(d, side, 1.0 - P.eps(), 1.0 + P.eps(), cap, offsets);
  std::vector<const std::vector<std::uint32_t>*> occupiedLists;
  if (!useOffsets)
    for (const auto& kv : buckets.cells) occupiedLists.push_back(&kv.second);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i) {
    const Vector& p = P[i];
    auto scan = [&](const std::vector<std::uint32_t>& list) {
      for (std::uint32_t j : list)
        if (j != i && is_unit_pair(p, P[j], P.eps())) visit(i, j);
    };
    if (useOffsets) {
      for (const auto& k : offsets)
        if (const auto* list = buckets.find(add(buckets.keyOf[i], k, d))) scan(*list);
    } else {
      for (const auto* list : occupiedLists) scan(*list);
    }
  }
}

int leading_dim(const std::vector<Vector>& points) { return points.empty() ? 0 : points.front().dim(); }

}  // namespace

PointSet::PointSet(std::vector<Vector> points, double eps, std::string label)
    : points_(std::move(points)), eps_(eps), label_(std::move(label)), dim_(leading_dim(points_)) {
  validate();
}

PointSet::PointSet(int dim, std::vector<Vector> points, double eps, std::string label)
    : points_(std::move(points)), eps_(eps), label_(std::move(label)), dim_(dim) {
  validate();
}

void PointSet::validate() const {
  require(std::isfinite(eps_) && eps_ >= 0, "eps must be finite and nonnegative");
  require(points_.empty() || (dim_ >= 1 && dim_ <= kMaxDim), "point set dimension must be in [1, 8]");
  for (const auto& p : points_) require(p.dim() == dim_, "all points of a set must share one dimension");
  if (points_.size() < 2) return;
  // Distinctness: any pair within eps sits in the same or an adjacent cell.
  const double side = std::max(eps_, 1e-9);
  const Buckets buckets(points_, side);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    CellKey k = buckets.keyOf[i];
    CellKey off{};
    for (int a = 0; a < dim_; ++a) off[a] = -1;
    while (true) {
      if (const auto* list = buckets.find(add(k, off, dim_)))
        for (std::uint32_t j : *list)
          if (j > i && distance(points_[i], points_[j]) <= eps_)
            throw PreconditionError("points " + std::to_string(i) + " and " + std::to_string(j) +
                                    " are not distinct at tolerance eps");
      int a = 0;
      while (a < dim_ && off[a] == 1) off[a++] = -1;
      if (a == dim_) break;
      ++off[a];
    }
  }
}

PointSet PointSet::without(std::size_t i) const {
  require(i < points_.size(), "index out of range");
  std::vector<Vector> pts = points_;
  pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
  return PointSet(dim_, std::move(pts), eps_, label_);
}

std::uint64_t count_unit_pairs_bruteforce(const PointSet& P) {
  std::uint64_t count = 0;
  const std::size_t n = P.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && is_unit_pair(P[i], P[j], P.eps())) ++count;
  return count;
}

std::uint64_t count_unit_pairs_grid(const PointSet& P) {
  if (P.empty()) return 0;
  require(P.eps() < 0.1, "grid counter requires eps < 0.1");
  std::vector<std::uint64_t> perPoint(P.size(), 0);
  for_each_unit_pair(P, [&](std::size_t i, std::size_t) { ++perPoint[i]; });
  std::uint64_t total = 0;
  for (auto c : perPoint) total += c;
  return total;
}

std::vector<std::vector<std::uint32_t>> unit_neighbors(const PointSet& P) {
  std::vector<std::vector<std::uint32_t>> nb(P.size());
  if (P.empty()) return nb;
  require(P.eps() < 0.1, "grid counter requires eps < 0.1");
  for_each_unit_pair(P, [&](std::size_t i, std::size_t j) { nb[i].push_back(static_cast<std::uint32_t>(j)); });
  for (auto& l : nb) std::sort(l.begin(), l.end());
  return nb;
}

PointSet gen_two_circles_r4(std::size_t N, std::uint64_t seed, double eps) {
  require(N >= 1, "two-circle generator needs N >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  const double r = std::sqrt(0.5);
  std::vector<Vector> pts;
  pts.reserve(2 * N);
  std::vector<double> th(N);
  for (auto& t : th) t = angle(rng);
  for (double t : th) pts.push_back(Vector{r * std::cos(t), r * std::sin(t), 0.0, 0.0});
  for (double t : th) pts.push_back(Vector{0.0, 0.0, r * std::cos(t), r * std::sin(t)});
  return PointSet(4, std::move(pts), eps, "two_circles_r4 N=" + std::to_string(N));
}

GeneratedSet gen_general_position(std::size_t n, int d, std::uint64_t seed, double tol, double eps) {
  require(d >= 2 && d <= kMaxDim, "general position generator needs d in [2, 8]");
  require(n >= static_cast<std::size_t>(d), "general position generator needs n >= d");
  const double side = std::pow(static_cast<double>(n), 1.0 / d);
  const bool exhaustive = binomial(n, d) <= kGeneratorExhaustiveCap;
  for (int round = 0; round < kGeneratorMaxRounds; ++round) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(round)));
    std::uniform_real_distribution<double> u(0.0, side);
    std::vector<Vector> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vector v(d);
      for (int a = 0; a < d; ++a) v[a] = u(rng);
      pts.push_back(v);
    }
    const auto mode = exhaustive ? CheckMode::exhaustive : CheckMode::sampled;
    const auto rep = general_position_check(pts, tol, mode, kGeneratorSampleCount,
                                            derive_seed(seed, 1'000'000 + static_cast<std::uint64_t>(round)));
    if (!rep.ok) continue;
    try {
      GeneratedSet g{PointSet(d, std::move(pts), eps, "general_position n=" + std::to_string(n)), mode, round + 1};
      return g;
    } catch (const PreconditionError&) {
      continue;  // two points closer than eps; draw again
    }
  }
  throw Error("general position generator failed after 100 resampling rounds");
}

namespace {

bool mul_checked(unsigned __int128 a, unsigned __int128 b, unsigned __int128& out) {
  if (a != 0 && b > std::numeric_limits<unsigned __int128>::max() / a) return false;
  out = a * b;
  return true;
}

bool pow_checked(std::uint64_t base, int e, unsigned __int128& out) {
  out = 1;
  for (int i = 0; i < e; ++i)
    if (!mul_checked(out, base, out)) return false;
  return true;
}

struct VecKeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto x : v) h = (h ^ x) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h);
  }
};

// Total number of d-combinations enumerated by the fiber census.
inline constexpr std::uint64_t kFiberEnumerationCap = 200'000'000;

}  // namespace

UnitPairReport g_v_census(const PointSet& P) {
  UnitPairReport rep;
  const std::size_t n = P.size();
  if (n == 0) return rep;
  const int d = P.dim();
  if (d >= 3 && n > kCensusSizeCap) throw CapExceeded("census is capped at |P| <= 2000 for d >= 3");
  const auto nb = unit_neighbors(P);

  unsigned __int128 v = 0, vd = 0;
  std::uint64_t g = 0;
  std::uint64_t combos = 0;
  for (const auto& l : nb) {
    const std::uint64_t deg = l.size();
    g += deg;
    unsigned __int128 pw, ff = 1;
    if (!pow_checked(deg, d, pw)) throw CapExceeded("|V| overflows 128-bit arithmetic");
    v += pw;
    for (int k = 0; k < d; ++k) ff *= deg >= static_cast<std::uint64_t>(k) ? deg - k : 0;
    vd += ff;
    combos += static_cast<std::uint64_t>(binomial(deg, d));
  }
  if (v > std::numeric_limits<std::uint64_t>::max()) throw CapExceeded("|V| exceeds the 64-bit report range");
  rep.orderedPairCount = g;
  rep.gCount = g;
  rep.vCount = static_cast<std::uint64_t>(v);
  rep.vDistinctCount = static_cast<std::uint64_t>(vd);
  rep.holderLhs = std::pow(static_cast<double>(g), d) / std::pow(static_cast<double>(n), d - 1);

  unsigned __int128 lhs, np, rhs;
  if (pow_checked(g, d, lhs) && pow_checked(n, d - 1, np) && mul_checked(v, np, rhs)) {
    rep.holderHolds = lhs <= rhs;
  } else {
    const long double l = d * std::log(static_cast<long double>(g));
    const long double r = std::log(static_cast<long double>(rep.vCount)) + (d - 1) * std::log(static_cast<long double>(n));
    rep.holderHolds = l <= r + 1e-15L * std::abs(r);
  }

  if (combos > kFiberEnumerationCap) throw CapExceeded("Phi fiber enumeration exceeds 2e8 tuples");
  std::unordered_map<std::vector<std::uint32_t>, std::uint64_t, VecKeyHash> fiber;
  std::vector<std::size_t> idx(d);
  std::vector<std::uint32_t> key(d);
  for (const auto& l : nb) {
    const std::size_t deg = l.size();
    if (deg < static_cast<std::size_t>(d)) continue;
    for (int k = 0; k < d; ++k) idx[k] = k;
    while (true) {
      for (int k = 0; k < d; ++k) key[k] = l[idx[k]];
      const auto c = ++fiber[key];
      rep.maxPhiFiber = std::max(rep.maxPhiFiber, c);
      int j = d - 1;
      while (j >= 0 && idx[j] == deg - d + j) --j;
      if (j < 0) break;
      ++idx[j];
      for (int k = j + 1; k < d; ++k) idx[k] = idx[k - 1] + 1;
    }
  }
  if (n >= 2) rep.thm1Ratio = static_cast<double>(g) / std::pow(static_cast<double>(n), (2.0 * d - 1.0) / d);
  return rep;
}

double thm1_ratio(const PointSet& P) {
  require(P.size() >= 2, "thm1_ratio needs |P| >= 2");
  const std::uint64_t c = P.eps() < 0.1 ? count_unit_pairs_grid(P) : count_unit_pairs_bruteforce(P);
  const int d = P.dim();
  return static_cast<double>(c) / std::pow(static_cast<double>(P.size()), (2.0 * d - 1.0) / d);
}

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(std::string_view tok, const char* what) {
  double v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(std::string("malformed ") + what + ": '" + std::string(tok) + "'");
  return v;
}

}  // namespace

void write_point_set(std::ostream& os, const PointSet& P) {
  os << P.dim() << ' ' << P.size() << ' ' << fmt17(P.eps()) << '\n';
  for (const auto& p : P.points()) {
    for (int i = 0; i < p.dim(); ++i) os << (i ? " " : "") << fmt17(p[i]);
    os << '\n';
  }
}

PointSet read_point_set(std::istream& is, const std::string& label) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("point set: missing header line");
  std::istringstream hs(line);
  std::string dtok, ntok, etok;
  if (!(hs >> dtok >> ntok >> etok)) throw ParseError("point set: header must be 'd n eps'");
  const int d = static_cast<int>(parse_double(dtok, "dimension"));
  const double nd = parse_double(ntok, "point count");
  if (d < 1 || d > kMaxDim || nd < 0 || nd != std::floor(nd)) throw ParseError("point set: invalid header values");
  const double eps = parse_double(etok, "eps");
  const auto n = static_cast<std::size_t>(nd);
  std::vector<Vector> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw ParseError("point set: expected " + std::to_string(n) + " point lines");
    std::istringstream ls(line);
    std::vector<double> c;
    std::string tok;
    while (ls >> tok) c.push_back(parse_double(tok, "coordinate"));
    if (static_cast<int>(c.size()) != d)
      throw ParseError("point set: line " + std::to_string(i + 2) + " has " + std::to_string(c.size()) + " coordinates");
    pts.emplace_back(std::span<const double>(c));
  }
  return PointSet(d, std::move(pts), eps, label);
}

}  // namespace udist
