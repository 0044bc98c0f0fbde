#include "udist/correlation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>

namespace udist {

double trapezoid(double a, double b, double z) { return std::max(0.0, std::min(z + a, b) - std::max(z, 0.0)); }

double trapezoid_integral(double a, double b, double z) {
  const double m = std::min(a, b);
  if (z <= -a) return 0.0;
  if (z <= -a + m) return 0.5 * (z + a) * (z + a);
  if (z <= b - m) return 0.5 * m * m + m * (z + a - m);
  if (z < b) return a * b - 0.5 * (b - z) * (b - z);
  return a * b;
}

void TrapezoidComponent::finalize() {
  require(offsets.size() == weights.size(), "trapezoid component: offsets and weights differ in length");
  std::vector<std::size_t> ord(offsets.size());
  for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
  const bool sorted = std::is_sorted(offsets.begin(), offsets.end());
  if (!sorted) std::sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) { return offsets[x] < offsets[y]; });
  std::vector<double> o, w;
  o.reserve(ord.size());
  w.reserve(ord.size());
  for (std::size_t i : ord) {
    if (!o.empty() && o.back() == offsets[i])
      w.back() += weights[i];
    else {
      o.push_back(offsets[i]);
      w.push_back(weights[i]);
    }
  }
  offsets.clear();
  weights.clear();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (w[i] == 0.0) continue;
    offsets.push_back(o[i]);
    weights.push_back(w[i]);
  }
  prefix.assign(offsets.size() + 1, 0.0);
  for (std::size_t i = 0; i < offsets.size(); ++i) prefix[i + 1] = prefix[i] + weights[i];
}

TrapezoidSum::TrapezoidSum(std::vector<TrapezoidComponent> comps) : comps_(std::move(comps)) {
  for (auto& c : comps_) {
    require(c.a > 0 && c.b > 0, "trapezoid component needs positive lengths");
    c.finalize();
  }
}

double TrapezoidSum::value(double u) const {
  double s = 0.0;
  for (const auto& c : comps_) {
    auto lo = std::upper_bound(c.offsets.begin(), c.offsets.end(), u - c.b);
    auto hi = std::lower_bound(lo, c.offsets.end(), u + c.a);
    for (auto it = lo; it != hi; ++it) s += c.weights[it - c.offsets.begin()] * trapezoid(c.a, c.b, u - *it);
  }
  return s;
}

// Sum over offsets in (x - b, x + a) of w * KI(x - o); fullCount receives the
// number of offsets <= x - b, whose terms equal a * b.
double TrapezoidSum::primitive_window(const TrapezoidComponent& c, double x, std::size_t& fullCount) const {
  auto lo = std::upper_bound(c.offsets.begin(), c.offsets.end(), x - c.b);
  auto hi = std::lower_bound(lo, c.offsets.end(), x + c.a);
  fullCount = static_cast<std::size_t>(lo - c.offsets.begin());
  double s = 0.0;
  for (auto it = lo; it != hi; ++it) s += c.weights[it - c.offsets.begin()] * trapezoid_integral(c.a, c.b, x - *it);
  return s;
}

double TrapezoidSum::integral(double lo, double hi) const {
  double s = 0.0;
  for (const auto& c : comps_) {
    std::size_t nlo = 0, nhi = 0;
    const double wlo = primitive_window(c, lo, nlo);
    const double whi = primitive_window(c, hi, nhi);
    s += c.a * c.b * (c.prefix[nhi] - c.prefix[nlo]) + (whi - wlo);
  }
  return s;
}

double TrapezoidSum::total() const {
  double s = 0.0;
  for (const auto& c : comps_) s += c.a * c.b * c.prefix.back();
  return s;
}

std::size_t TrapezoidSum::term_count() const {
  std::size_t n = 0;
  for (const auto& c : comps_) n += c.offsets.size();
  return n;
}

std::vector<double> TrapezoidSum::kinks(double lo, double hi) const {
  std::vector<double> out;
  for (const auto& c : comps_) {
    const double m = std::min(c.a, c.b);
    const double rel[4] = {-c.a, -c.a + m, c.b - m, c.b};
    auto first = std::lower_bound(c.offsets.begin(), c.offsets.end(), lo - c.b);
    auto last = std::upper_bound(first, c.offsets.end(), hi + c.a);
    for (auto it = first; it != last; ++it)
      for (double r : rel) {
        const double k = *it + r;
        if (k >= lo && k <= hi) out.push_back(k);
      }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

struct LengthGroups {
  std::vector<double> length;
  std::vector<std::vector<long double>> starts;
};

LengthGroups group_by_length(const IntervalUnion& A) {
  std::map<Rational, std::vector<long double>> m;
  for (const auto& i : A.intervals()) m[i.length()].push_back(i.lo.to_long_double());
  LengthGroups g;
  for (auto& [len, st] : m) {
    require(len > Rational(0), "correlation of a degenerate interval");
    g.length.push_back(len.to_double());
    g.starts.push_back(std::move(st));
  }
  return g;
}

std::vector<TrapezoidComponent> pair_components(const LengthGroups& f, const LengthGroups& g) {
  std::uint64_t pairs = 0;
  for (const auto& sf : f.starts)
    for (const auto& sg : g.starts) pairs += sf.size() * sg.size();
  if (pairs > kCorrelationPairCap)
    throw CapExceeded("interval-pair correlation needs " + std::to_string(pairs) + " pairs");
  std::vector<TrapezoidComponent> comps;
  for (std::size_t i = 0; i < f.length.size(); ++i)
    for (std::size_t j = 0; j < g.length.size(); ++j) {
      TrapezoidComponent c;
      c.a = f.length[i];
      c.b = g.length[j];
      c.offsets.reserve(f.starts[i].size() * g.starts[j].size());
      for (long double x : f.starts[i])
        for (long double y : g.starts[j]) c.offsets.push_back(static_cast<double>(y - x));
      c.weights.assign(c.offsets.size(), 1.0);
      comps.push_back(std::move(c));
    }
  return comps;
}

}  // namespace

TrapezoidSum autocorrelation_pairs(const IntervalUnion& A) {
  const auto g = group_by_length(A);
  return TrapezoidSum(pair_components(g, g));
}

TrapezoidSum cross_correlation_pairs(const IntervalUnion& f, const IntervalUnion& g) {
  return TrapezoidSum(pair_components(group_by_length(f), group_by_length(g)));
}

namespace {

inline constexpr std::size_t kCantorStartCap = std::size_t{1} << 24;

// Multiset of differences of the digit expansions sum k_i g_i, k_i in [0, base).
std::vector<std::pair<std::int64_t, double>> digit_differences(const std::vector<std::int64_t>& g, std::int64_t base,
                                                                std::int64_t shift) {
  std::vector<std::pair<std::int64_t, double>> cur{{0, 1.0}};
  auto apply = [&](const std::vector<std::pair<std::int64_t, double>>& level) {
    std::vector<std::pair<std::int64_t, double>> next;
    next.reserve(cur.size() * level.size());
    for (const auto& [o, w] : cur)
      for (const auto& [e, m] : level) next.emplace_back(o + e, w * m);
    std::sort(next.begin(), next.end());
    cur.clear();
    for (const auto& t : next) {
      if (!cur.empty() && cur.back().first == t.first)
        cur.back().second += t.second;
      else
        cur.push_back(t);
    }
  };
  for (std::int64_t gi : g) {
    std::vector<std::pair<std::int64_t, double>> level;
    for (std::int64_t e = -(base - 1); e <= base - 1; ++e)
      level.emplace_back(e * gi, static_cast<double>(base - std::abs(e)));
    apply(level);
  }
  if (shift != 0) apply({{-shift, 1.0}, {0, 2.0}, {shift, 1.0}});
  return cur;
}

}  // namespace

TrapezoidSum cantor_autocorrelation(int p, int q, const Rational& delta, const Rational& shift) {
  require(p >= 1 && q > p, "Cantor set needs 1 <= p < q");
  require(delta > Rational(0) && delta.is_dyadic(), "delta must be a positive dyadic");
  require(shift >= Rational(0) && shift.is_dyadic(), "shift must be a nonnegative dyadic");
  int j = 0;
  while (Rational::dyadic(1, j * q) > delta * Rational(2)) {
    ++j;
    if (j * q > 40) throw CapExceeded("Cantor stage needed for this delta exceeds the dyadic precision cap");
  }
  if (static_cast<std::uint64_t>(j) * p > 24) throw CapExceeded("Cantor stage has more than 2^24 intervals");
  const std::int64_t base = std::int64_t{1} << p;
  const std::int64_t unitDen = (base - 1) * (std::int64_t{1} << (j * q));  // unit = 1 / unitDen
  std::vector<std::int64_t> g;
  for (int i = 1; i <= j; ++i) g.push_back((std::int64_t{1} << ((j - i) * q)) * ((std::int64_t{1} << q) - 1));

  const Rational shiftUnits = shift * Rational(unitDen);
  if (shiftUnits.den() != 1) throw PreconditionError("shift is not a multiple of the stage lattice");
  const std::int64_t S = shiftUnits.num();

  std::vector<std::int64_t> starts{0};
  for (std::int64_t gi : g) {
    std::vector<std::int64_t> next;
    next.reserve(starts.size() * static_cast<std::size_t>(base));
    for (std::int64_t s : starts)
      for (std::int64_t k = 0; k < base; ++k) next.push_back(s + k * gi);
    starts.swap(next);
  }
  require(starts.size() <= kCantorStartCap, "Cantor stage too large");
  if (S != 0) {
    const std::size_t n = starts.size();
    for (std::size_t i = 0; i < n; ++i) starts.push_back(starts[i] + S);
  }
  std::sort(starts.begin(), starts.end());

  const Rational L = Rational::dyadic(1, j * q);
  const Rational ell = L + delta * Rational(2);
  const Rational ellUnits = ell * Rational(unitDen);
  const double ellD = ell.to_double();
  const double unit = 1.0 / static_cast<double>(unitDen);

  // Overlaps of consecutive fattened intervals, in lattice units.
  std::vector<std::pair<Rational, Rational>> overlaps;  // (start, length) in units
  for (std::size_t k = 0; k + 1 < starts.size(); ++k) {
    const Rational endK = Rational(starts[k]) + ellUnits;
    const Rational next = Rational(starts[k + 1]);
    if (next < endK) overlaps.emplace_back(next, endK - next);
    if (k + 2 < starts.size() && Rational(starts[k + 2]) < endK)
      throw PreconditionError("fattened Cantor intervals cover a point three times");
  }

  std::vector<TrapezoidComponent> comps;
  {
    TrapezoidComponent uu;
    uu.a = uu.b = ellD;
    for (const auto& [d, w] : digit_differences(g, base, S)) {
      uu.offsets.push_back(static_cast<double>(d) * unit);
      uu.weights.push_back(w);
    }
    comps.push_back(std::move(uu));
  }
  if (!overlaps.empty()) {
    const std::uint64_t cross = static_cast<std::uint64_t>(overlaps.size()) * starts.size();
    if (2 * cross + overlaps.size() * overlaps.size() > kCorrelationPairCap)
      throw CapExceeded("too many overlapping fattened intervals");
    std::map<Rational, std::vector<Rational>> byLen;
    for (const auto& [s, len] : overlaps) byLen[len].push_back(s);
    auto toReal = [&](const Rational& units) { return units.to_double() * unit; };
    for (const auto& [len, ostarts] : byLen) {
      const double b = toReal(len);
      TrapezoidComponent uo, ou;
      uo.a = ellD;
      uo.b = b;
      ou.a = b;
      ou.b = ellD;
      for (const Rational& y : ostarts)
        for (std::int64_t x : starts) {
          const double off = toReal(y - Rational(x));
          uo.offsets.push_back(off);
          uo.weights.push_back(-1.0);
          ou.offsets.push_back(-off);
          ou.weights.push_back(-1.0);
        }
      comps.push_back(std::move(uo));
      comps.push_back(std::move(ou));
      for (const auto& [len2, ostarts2] : byLen) {
        TrapezoidComponent oo;
        oo.a = b;
        oo.b = toReal(len2);
        for (const Rational& x : ostarts)
          for (const Rational& y : ostarts2) {
            oo.offsets.push_back(toReal(y - x));
            oo.weights.push_back(1.0);
          }
        comps.push_back(std::move(oo));
      }
    }
  }
  return TrapezoidSum(std::move(comps));
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> x, std::vector<double> v) : x_(std::move(x)), v_(std::move(v)) {
  require(x_.size() == v_.size(), "piecewise-linear: breakpoints and values differ in length");
  for (std::size_t k = 1; k < x_.size(); ++k)
    require(x_[k - 1] < x_[k], "piecewise-linear breakpoints must increase strictly");
  cum_.assign(x_.size(), 0.0L);
  nonzeroPrefix_.assign(x_.size(), 0);
  for (std::size_t k = 1; k < x_.size(); ++k) {
    cum_[k] = cum_[k - 1] + 0.5L * (static_cast<long double>(x_[k]) - x_[k - 1]) *
                                (static_cast<long double>(v_[k - 1]) + v_[k]);
    nonzeroPrefix_[k] = nonzeroPrefix_[k - 1] + ((v_[k - 1] != 0.0 || v_[k] != 0.0) ? 1u : 0u);
  }
}

PiecewiseLinear PiecewiseLinear::tabulate(const TrapezoidSum& f, double lo, double hi) {
  require(lo < hi, "tabulation range is empty");
  auto xs = f.kinks(lo, hi);
  if (xs.empty() || xs.front() > lo) xs.insert(xs.begin(), lo);
  if (xs.back() < hi) xs.push_back(hi);
  std::vector<double> vs(xs.size());
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < xs.size(); ++k) vs[k] = f.value(xs[k]);
  return PiecewiseLinear(std::move(xs), std::move(vs));
}

std::size_t PiecewiseLinear::segment(double u) const {
  if (x_.size() < 2) return npos;
  auto it = std::upper_bound(x_.begin(), x_.end(), u);
  std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(k, x_.size() - 2);
}

double PiecewiseLinear::value_in(std::size_t k, double u) const {
  const double t = (u - x_[k]) / (x_[k + 1] - x_[k]);
  return v_[k] + (v_[k + 1] - v_[k]) * t;
}

double PiecewiseLinear::value(double u) const {
  if (x_.size() < 2 || u < x_.front() || u > x_.back()) return 0.0;
  return value_in(segment(u), u);
}

long double PiecewiseLinear::primitive_in(std::size_t k, double u) const {
  if (u <= x_[k]) return cum_[k];
  if (u >= x_[k + 1]) return cum_[k + 1];
  return cum_[k] + 0.5L * (static_cast<long double>(u) - x_[k]) * (static_cast<long double>(v_[k]) + value_in(k, u));
}

long double PiecewiseLinear::primitive(double u) const {
  if (x_.size() < 2 || u <= x_.front()) return 0.0L;
  if (u >= x_.back()) return cum_.back();
  return primitive_in(segment(u), u);
}

bool PiecewiseLinear::vanishes_on(double lo, double hi) const {
  if (x_.size() < 2 || hi < x_.front() || lo > x_.back()) return true;
  const std::size_t a = segment(std::max(lo, x_.front()));
  const std::size_t b = segment(std::min(hi, x_.back()));
  return nonzeroPrefix_[b + 1] == nonzeroPrefix_[a];
}

PiecewiseLinear Correlogram::interpolant() const {
  require(sampleSpacing > 0 && !values.empty(), "empty correlogram");
  const std::size_t n = values.size();
  std::vector<double> x, v;
  const bool pad = values.back() != 0.0;
  const std::size_t m = pad ? n + 1 : n;
  x.reserve(2 * m - 1);
  v.reserve(2 * m - 1);
  auto val = [&](std::size_t i) { return i < n ? values[i] : 0.0; };
  for (std::size_t i = m - 1; i > 0; --i) {
    x.push_back(-static_cast<double>(i) * sampleSpacing);
    v.push_back(val(i));
  }
  for (std::size_t i = 0; i < m; ++i) {
    x.push_back(static_cast<double>(i) * sampleSpacing);
    v.push_back(val(i));
  }
  return PiecewiseLinear(std::move(x), std::move(v));
}

namespace {

std::size_t lag_count(const IntervalUnion& A, double spacing) {
  require(spacing > 0 && std::isfinite(spacing), "correlogram spacing must be positive");
  const double extent = (A.upper() - A.lower()).to_double();
  const double n = std::floor(extent / spacing) + 2;
  if (n > 1e9) throw CapExceeded("correlogram would need more than 1e9 samples");
  return static_cast<std::size_t>(n);
}

}  // namespace

Correlogram correlogram_exact(const IntervalUnion& A, double spacing) {
  Correlogram c;
  c.sampleSpacing = spacing;
  if (A.empty()) {
    c.values = {0.0};
    return c;
  }
  const auto f = autocorrelation_pairs(A);
  const std::size_t n = lag_count(A, spacing);
  c.values.resize(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) c.values[i] = f.value(static_cast<double>(i) * spacing);
  c.totalMass = A.measure().to_double();
  return c;
}

Correlogram correlogram_fft(const IntervalUnion& A, double spacing) {
  Correlogram c;
  c.sampleSpacing = spacing;
  if (A.empty()) {
    c.values = {0.0};
    return c;
  }
  const std::size_t n = lag_count(A, spacing);
  std::size_t M = 1;
  while (M < 2 * n) M <<= 1;
  if (M > (std::size_t{1} << 30)) throw CapExceeded("correlogram FFT longer than 2^30");
  const long double o = A.lower().to_long_double();
  double* in = fftw_alloc_real(M);
  fftw_complex* out = fftw_alloc_complex(M / 2 + 1);
  std::fill(in, in + M, 0.0);
  for (const auto& iv : A.intervals()) {
    const long double lo = (iv.lo.to_long_double() - o) / spacing;
    const long double hi = (iv.hi.to_long_double() - o) / spacing;
    auto k0 = static_cast<std::size_t>(std::floor(lo));
    auto k1 = static_cast<std::size_t>(std::floor(hi));
    for (std::size_t k = k0; k <= k1 && k < n; ++k) {
      const long double a = std::max<long double>(lo, static_cast<long double>(k));
      const long double b = std::min<long double>(hi, static_cast<long double>(k + 1));
      if (b > a) in[k] += static_cast<double>(b - a);
    }
  }
  fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(M), in, out, FFTW_ESTIMATE);
  fftw_execute(fwd);
  for (std::size_t k = 0; k <= M / 2; ++k) {
    const double re = out[k][0], im = out[k][1];
    out[k][0] = re * re + im * im;
    out[k][1] = 0.0;
  }
  fftw_plan inv = fftw_plan_dft_c2r_1d(static_cast<int>(M), out, in, FFTW_ESTIMATE);
  fftw_execute(inv);
  c.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.values[i] = std::max(0.0, in[i] * spacing / static_cast<double>(M));
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(inv);
  fftw_free(in);
  fftw_free(out);
  c.totalMass = A.measure().to_double();
  return c;
}

double correlogram_fft_tolerance(const IntervalUnion& A, double spacing) {
  return 2.0 * spacing * static_cast<double>(A.size());
}

void write_correlogram(std::ostream& os, const Correlogram& c) {
  os.write("UDCORR01", 8);
  const std::uint64_t n = c.values.size();
  os.write(reinterpret_cast<const char*>(&c.sampleSpacing), sizeof(double));
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&c.totalMass), sizeof(double));
  os.write(reinterpret_cast<const char*>(c.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

Correlogram read_correlogram(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, "UDCORR01", 8) != 0) throw ParseError("correlogram: bad magic");
  Correlogram c;
  std::uint64_t n = 0;
  if (!is.read(reinterpret_cast<char*>(&c.sampleSpacing), sizeof(double)) ||
      !is.read(reinterpret_cast<char*>(&n), sizeof n) ||
      !is.read(reinterpret_cast<char*>(&c.totalMass), sizeof(double)))
    throw ParseError("correlogram: truncated header");
  if (n > (std::uint64_t{1} << 32)) throw ParseError("correlogram: implausible length");
  c.values.resize(n);
  if (!is.read(reinterpret_cast<char*>(c.values.data()), static_cast<std::streamsize>(n * sizeof(double))))
    throw ParseError("correlogram: truncated values");
  return c;
}

}  // namespace udist
