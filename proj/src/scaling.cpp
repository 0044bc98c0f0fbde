#include "udist/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "udist/correlation.hpp"
#include "udist/csv.hpp"
#include "udist/errors.hpp"
#include "udist/fractal.hpp"
#include "udist/measure.hpp"

namespace udist {

AxisSpec AxisSpec::interval(Rational lo, Rational hi) {
  require(lo <= hi, "interval axis needs lo <= hi");
  AxisSpec a;
  a.kind = Kind::Interval;
  a.lo = lo;
  a.hi = hi;
  return a;
}

AxisSpec AxisSpec::point_set(std::vector<Rational> pts) {
  AxisSpec a;
  a.kind = Kind::Points;
  a.points = std::move(pts);
  return a;
}

AxisSpec AxisSpec::cantor(int p, int q) {
  require(p >= 1 && q > p, "Cantor axis needs 1 <= p < q");
  AxisSpec a;
  a.kind = Kind::Cantor;
  a.p = p;
  a.q = q;
  return a;
}

AxisSpec AxisSpec::cantor_pair(int p, int q) {
  AxisSpec a = cantor(p, q);
  a.kind = Kind::CantorPair;
  return a;
}

IntervalUnion AxisSpec::base(const Rational& delta) const {
  switch (kind) {
    case Kind::Interval:
      return IntervalUnion({{lo, hi}});
    case Kind::Points: {
      std::vector<Interval> v;
      for (const auto& x : points) v.push_back({x, x});
      return IntervalUnion(v);
    }
    case Kind::Cantor:
      return cantor_stage({p, q, cantor_stage_for_delta(p, q, delta)});
    case Kind::CantorPair:
      return shift_union(cantor_stage({p, q, cantor_stage_for_delta(p, q, delta)}), Rational(1));
  }
  throw Error("unknown axis kind");
}

std::string AxisSpec::str() const {
  switch (kind) {
    case Kind::Interval:
      return "[" + lo.str() + "," + hi.str() + "]";
    case Kind::Points: {
      std::string s = "{";
      for (std::size_t i = 0; i < points.size(); ++i) s += (i ? "," : "") + points[i].str();
      return s + "}";
    }
    case Kind::Cantor:
      return "C(" + std::to_string(p) + "," + std::to_string(q) + ")";
    case Kind::CantorPair:
      return "C(" + std::to_string(p) + "," + std::to_string(q) + ")+shift1";
  }
  return "?";
}

const char* method_name(SweepMethod m) { return m == SweepMethod::Grid ? "grid" : "product"; }

namespace {

TrapezoidSum exact_correlation(const AxisSpec& a, const Rational& delta) {
  if (a.kind == AxisSpec::Kind::Cantor) return cantor_autocorrelation(a.p, a.q, delta, Rational(0));
  if (a.kind == AxisSpec::Kind::CantorPair) return cantor_autocorrelation(a.p, a.q, delta, Rational(1));
  return autocorrelation_pairs(neighborhood(a.base(delta), delta));
}

PiecewiseLinear correlation_table(const SetSpec& spec, const AxisSpec& a, const Rational& delta, double hi) {
  if (spec.spacing > 0) {
    const double h = spec.spacing * delta.to_double();
    return correlogram_fft(neighborhood(a.base(delta), delta), h).interpolant();
  }
  return PiecewiseLinear::tabulate(exact_correlation(a, delta), 0.0, hi);
}

ScalingSample sample_at(const SetSpec& spec, double delta, SweepMethod method) {
  const Rational dR = Rational::from_double(delta);
  const double w = spec.widthMultiplier;
  ScalingSample s;
  s.delta = delta;
  if (method == SweepMethod::Grid) {
    std::vector<IntervalUnion> bases;
    for (const auto& a : spec.axes) bases.push_back(a.base(dR));
    const auto g = rasterize(bases, delta, spec.cellFactor * delta, spec.alpha);
    const auto b = measure_D_delta_grid(g, w);
    s.valueLow = b.inner;
    s.valueHigh = b.outer;
    s.value = b.inner > 0 ? std::sqrt(b.inner * b.outer) : 0.5 * b.outer;
    return s;
  }
  require(spec.d() == 1 || spec.d() == 2, "product method needs d = 1 or 2");
  const double rp = 1 + w * delta, rm = 1 - w * delta;
  if (spec.d() == 1) {
    if (spec.spacing > 0) {
      const auto t = correlation_table(spec, spec.axes[0], dR, rp);
      s.value = 2 * t.integral(rm, rp);
    } else {
      s.value = band_pair_measure(exact_correlation(spec.axes[0], dR), rm, rp);
    }
    s.valueLow = s.valueHigh = s.value;
    return s;
  }
  const auto r = measure_D_delta_product(correlation_table(spec, spec.axes[0], dR, rp),
                                         correlation_table(spec, spec.axes[1], dR, rp), delta, w);
  s.value = r.value;
  s.valueLow = std::max(0.0, r.value - r.quadError);
  s.valueHigh = r.value + r.quadError;
  return s;
}

}  // namespace

ScalingSeries sweep(const SetSpec& spec, const std::vector<double>& deltas, SweepMethod method) {
  require(spec.d() >= 1 && spec.d() <= 3, "set dimension must be 1, 2 or 3");
  require(!deltas.empty(), "delta list must not be empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require(deltas[i] > 0 && std::isfinite(deltas[i]), "delta must be positive");
    if (i) require(deltas[i] < deltas[i - 1], "delta list must be strictly decreasing");
  }
  require(spec.spacing == 0 || spec.spacing <= 0.25, "spacing must be at most delta / 4");
  ScalingSeries out;
  out.label = spec.label;
  out.d = spec.d();
  out.alpha = spec.alpha;
  out.method = method_name(method);
  for (double delta : deltas) {
    try {
      out.samples.push_back(sample_at(spec, delta, method));
    } catch (const CapExceeded& e) {
      throw CapExceeded("delta = " + format_double(delta) + ": " + e.what());
    }
    if (!(out.samples.back().value > 0)) out.degenerate = true;
  }
  return out;
}

std::vector<double> lemma_deltas(int q1, int q2, int nFirst, int nLast) {
  require(nFirst >= 1 && nLast >= nFirst, "need 1 <= nFirst <= nLast");
  std::vector<double> v;
  for (int n = nFirst; n <= nLast; ++n) {
    const int e = 2 * q1 * q2 * n + 2;
    require(e <= 1000, "delta_n underflows");
    v.push_back(std::ldexp(1.0, -e));
  }
  return v;
}

ScalingSeries covering_series(int p, int q, const std::vector<double>& hs) {
  ScalingSeries out;
  out.label = "C(" + std::to_string(p) + "," + std::to_string(q) + ") covering";
  out.d = 1;
  out.alpha = static_cast<double>(p) / q;
  out.method = "covering";
  for (double h : hs) {
    const auto n = covering_count(p, q, Rational::from_double(h));
    const double v = static_cast<double>(n) * h;
    out.samples.push_back({h, v, v, v});
  }
  return out;
}

ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "fit needs matching sample lists");
  require(x.size() >= 2, "fit needs at least 2 samples");
  const auto n = static_cast<double>(x.size());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw PreconditionError("fit needs positive values");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0, "fit needs distinct abscissae");
  ExponentFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < lx.size(); ++i)
    f.maxResidual = std::max(f.maxResidual, std::abs(ly[i] - (f.intercept + f.slope * lx[i])));
  f.nPoints = static_cast<int>(lx.size());
  return f;
}

ExponentFit fit_exponent(const ScalingSeries& s, SeriesColumn column) {
  require(s.samples.size() >= 2, "fit needs at least 2 samples");
  const std::size_t first = s.samples.size() >= 4 ? 1 : 0;
  std::vector<double> x, y;
  for (std::size_t i = first; i < s.samples.size(); ++i) {
    const auto& smp = s.samples[i];
    x.push_back(smp.delta);
    y.push_back(column == SeriesColumn::Value ? smp.value : column == SeriesColumn::Low ? smp.valueLow : smp.valueHigh);
  }
  return fit_loglog(x, y);
}

namespace {

void finish_table(BoundTable& t) {
  t.upper = 2.0 * t.d;
  for (const auto& b : t.upperBounds) t.upper = std::min(t.upper, b.value);
  t.lower = 0.0;
  for (const auto& b : t.lowerBounds) t.lower = std::max(t.lower, b.value);
  t.exponentLower = 2.0 * t.d - t.upper;
}

// Lower bounds on g_2 that hold in every d >= 2 through g_{d+1} >= g_d.
void planar_lower(BoundTable& t, double a, const std::string& suffix) {
  if (a > 0 && a <= 1) t.lowerBounds.push_back({"3alpha/2" + suffix, 1.5 * a, 0.0, 1.0});
  if (a > 1 && a <= 1.5) t.lowerBounds.push_back({"alpha+1/2" + suffix, a + 0.5, 1.0, 1.5});
}

}  // namespace

BoundTable theory_bounds(int d, double alpha) {
  require(d >= 1 && d <= 8, "d must be in [1, 8]");
  require(alpha >= 0 && alpha <= d && std::isfinite(alpha), "alpha must be in [0, d]");
  BoundTable t;
  t.d = d;
  t.alpha = alpha;
  const double a = alpha;
  if (d == 1) {
    t.upperBounds.push_back({"g1=alpha", a, 0.0, 1.0});
    t.lowerBounds.push_back({"g1=alpha", a, 0.0, 1.0});
    finish_table(t);
    return t;
  }
  t.upperBounds.push_back({"trivial alpha+d-1", a + d - 1, 0.0, static_cast<double>(d)});
  t.upperBounds.push_back({"trivial 2alpha", 2 * a, 0.0, static_cast<double>(d)});
  const double knee = (d + 1) / 2.0;
  if (a >= knee) {
    t.upperBounds.push_back({"large alpha 2alpha-1", 2 * a - 1, knee, static_cast<double>(d)});
    t.lowerBounds.push_back({"large alpha 2alpha-1", 2 * a - 1, knee, static_cast<double>(d)});
  } else {
    t.upperBounds.push_back({"alpha+(d-1)/2", a + (d - 1) / 2.0, 0.0, knee});
  }
  if (a <= 1) t.lowerBounds.push_back({"line embedding alpha", a, 0.0, 1.0});
  if (a >= 1) t.lowerBounds.push_back({"product example 2alpha-1", 2 * a - 1, 1.0, static_cast<double>(d)});
  if (d == 2) {
    if (a > 0 && a <= 1) {
      t.upperBounds.push_back({"5alpha/3", 5 * a / 3, 0.0, 1.0});
      t.upperBounds.push_back({"alpha(2+alpha)/(1+alpha)", a * (2 + a) / (1 + a), 0.0, 1.0});
    }
    if (a >= 1 && a <= 1.5) t.upperBounds.push_back({"alpha+1/2", a + 0.5, 1.0, 1.5});
    planar_lower(t, a, "");
  } else {
    planar_lower(t, a, " (from d=2)");
    if (a > 1.5 && a <= 2) t.lowerBounds.push_back({"2alpha-1 (from d=2)", 2 * a - 1, 1.5, 2.0});
  }
  if (d == 3) t.upperBounds.push_back({"15alpha/8", 15 * a / 8, 0.0, 3.0});
  if (d >= 4) {
    const double cut = std::floor(d / 2.0) - 1;
    if (a <= cut) t.lowerBounds.push_back({"sphere example 2alpha", 2 * a, 0.0, cut});
    t.open = a > cut && a < (d - 1) / 2.0;
  }
  finish_table(t);
  return t;
}

BoundTable construction_bounds(double beta, double gamma) {
  require(beta > 0 && gamma > 0 && beta + gamma <= 2, "need beta, gamma > 0 with beta + gamma <= 2");
  BoundTable t;
  t.d = 2;
  t.alpha = beta + gamma;
  // |D^delta| >~ delta^{4 - (beta + 3 gamma / 2)} along the construction scales.
  t.lowerBounds.push_back({"construction beta+3gamma/2", beta + 1.5 * gamma, 0.0, 2.0});
  const auto g = theory_bounds(2, beta + gamma);
  t.upperBounds.push_back({"g2 upper", g.upper, 0.0, 2.0});
  finish_table(t);
  return t;
}

Verdict compare_report(const ExponentFit& fit, const BoundTable& table, double tol) {
  require(tol >= 0, "tolerance must be nonnegative");
  Verdict v;
  v.dimEstimate = 2.0 * table.d - fit.slope;
  v.lower = table.lower;
  v.upper = table.upper;
  v.tol = tol;
  v.withinBounds = table.lower - tol <= v.dimEstimate && v.dimEstimate <= table.upper + tol;
  for (const auto& b : table.upperBounds) v.margins.push_back({"upper: " + b.name, b.value - v.dimEstimate});
  for (const auto& b : table.lowerBounds) v.margins.push_back({"lower: " + b.name, v.dimEstimate - b.value});
  return v;
}

void write_series_csv(std::ostream& os, const ScalingSeries& s) {
  CsvTable t({"label", "d", "alpha", "delta", "value", "valueLow", "valueHigh"});
  for (const auto& smp : s.samples)
    t.add({s.label, csv_field(s.d), csv_field(s.alpha), csv_field(smp.delta), csv_field(smp.value),
           csv_field(smp.valueLow), csv_field(smp.valueHigh)});
  t.write(os);
}

}  // namespace udist
