#include "udist/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "udist/csv.hpp"
#include "udist/discrete.hpp"
#include "udist/errors.hpp"
#include "udist/fractal.hpp"
#include "udist/geom.hpp"
#include "udist/measure.hpp"
#include "udist/parallel.hpp"
#include "udist/scaling.hpp"
#include "udist/spectral.hpp"

namespace udist {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Strict reader over one JSON object: every field must be consumed or
// finish() reports it as unknown. Paths name nested fields as "set.axes[1].q".
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError("config: " + where() + " must be an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  const json& at(const std::string& k) {
    used_.insert(k);
    if (!j_.contains(k)) throw ParseError("config: missing required field \"" + name(k) + "\"");
    return j_.at(k);
  }

  template <class T>
  T get(const std::string& k) {
    return convert<T>(at(k), name(k));
  }

  template <class T>
  T get_or(const std::string& k, T fallback) {
    used_.insert(k);
    return j_.contains(k) ? convert<T>(j_.at(k), name(k)) : fallback;
  }

  Fields child(const std::string& k) { return Fields(at(k), name(k)); }

  std::vector<Fields> children(const std::string& k) {
    const json& arr = at(k);
    if (!arr.is_array()) throw ParseError("config: field \"" + name(k) + "\" must be an array");
    std::vector<Fields> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.emplace_back(arr[i], name(k) + "[" + std::to_string(i) + "]");
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ParseError("config: unknown field \"" + name(k) + "\"");
  }

  std::string name(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  template <class T>
  static T convert(const json& v, const std::string& field) {
    auto fail = [&](const char* what) -> T {
      throw ParseError("config: field \"" + field + "\" must be " + what);
    };
    if constexpr (std::is_same_v<T, bool>) {
      return v.is_boolean() ? v.get<bool>() : fail("a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return v.is_string() ? v.get<std::string>() : fail("a string");
    } else if constexpr (std::is_same_v<T, double>) {
      return v.is_number() ? v.get<double>() : fail("a number");
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      return v.is_number_unsigned() ? v.get<std::uint64_t>() : fail("a non-negative integer");
    } else {
      static_assert(std::is_same_v<T, int>);
      if (!v.is_number_integer()) return fail("an integer");
      const auto x = v.get<std::int64_t>();
      if (x < -1'000'000'000 || x > 1'000'000'000) return fail("an integer of moderate size");
      return static_cast<int>(x);
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "field \"" + path_ + "\""; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

struct Range {
  int first = 0, last = 0;
};

Range read_range(Fields& f, const std::string& k) {
  auto r = f.child(k);
  Range out{r.get<int>("first"), r.get<int>("last")};
  r.finish();
  if (out.last < out.first) throw ParseError("config: field \"" + f.name(k) + "\" needs first <= last");
  return out;
}

// Integer, finite double or "a/b" string.
Rational read_rational(const json& v, const std::string& field) {
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_number()) return Rational::from_double(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::istringstream is(s);
    std::int64_t n = 0, d = 1;
    char slash = 0;
    if (is >> n) {
      if (is >> slash) {
        if (slash == '/' && (is >> d) && is.eof() && d != 0) return Rational(n, d);
      } else {
        return Rational(n);
      }
    }
  }
  throw ParseError("config: field \"" + field + "\" must be a rational (integer, number or \"a/b\")");
}

AxisSpec read_axis(Fields& a) {
  const auto type = a.get<std::string>("type");
  AxisSpec out;
  if (type == "interval") {
    out = AxisSpec::interval(read_rational(a.at("lo"), a.name("lo")), read_rational(a.at("hi"), a.name("hi")));
  } else if (type == "points") {
    const json& arr = a.at("points");
    if (!arr.is_array()) throw ParseError("config: field \"" + a.name("points") + "\" must be an array");
    std::vector<Rational> pts;
    for (std::size_t i = 0; i < arr.size(); ++i)
      pts.push_back(read_rational(arr[i], a.name("points") + "[" + std::to_string(i) + "]"));
    out = AxisSpec::point_set(std::move(pts));
  } else if (type == "cantor" || type == "cantor-pair") {
    const int p = a.get<int>("p");
    const int q = a.get<int>("q");
    out = type == "cantor" ? AxisSpec::cantor(p, q) : AxisSpec::cantor_pair(p, q);
  } else {
    throw ParseError("config: field \"" + a.name("type") + "\" must be interval, points, cantor or cantor-pair");
  }
  a.finish();
  return out;
}

struct SetConfig {
  SetSpec spec;
  bool construction = false;
  int q1 = 0, q2 = 0;
  double beta = 0, gamma = 0;
};

SetConfig read_set(Fields& s) {
  SetConfig out;
  const auto type = s.get_or<std::string>("type", "product");
  if (type == "construction") {
    const int p1 = s.get<int>("p1"), q1 = s.get<int>("q1");
    const int p2 = s.get<int>("p2"), q2 = s.get<int>("q2");
    require(p1 >= 1 && p1 < q1 && p2 >= 1 && p2 < q2, "construction needs 1 <= p < q");
    out.construction = true;
    out.q1 = q1;
    out.q2 = q2;
    out.beta = static_cast<double>(p1) / q1;
    out.gamma = static_cast<double>(p2) / q2;
    out.spec.axes = {AxisSpec::cantor_pair(p1, q1), AxisSpec::cantor(p2, q2)};
    out.spec.alpha = out.beta + out.gamma;
    out.spec.widthMultiplier = s.get_or<double>("widthMultiplier", 1.0);
    out.spec.label = s.get_or<std::string>("label", "construction");
  } else if (type == "product") {
    for (auto& a : s.children("axes")) out.spec.axes.push_back(read_axis(a));
    out.spec.alpha = s.get<double>("alpha");
    out.spec.widthMultiplier = s.get_or<double>("widthMultiplier", 2.0);
    std::string label;
    for (const auto& a : out.spec.axes) label += (label.empty() ? "" : " x ") + a.str();
    out.spec.label = s.get_or<std::string>("label", label);
  } else {
    throw ParseError("config: field \"" + s.name("type") + "\" must be product or construction");
  }
  out.spec.cellFactor = s.get_or<double>("cellFactor", 0.5);
  out.spec.spacing = s.get_or<double>("spacing", 0.0);
  s.finish();
  require(out.spec.d() >= 1 && out.spec.d() <= 3, "set needs 1 to 3 axes");
  require(out.spec.widthMultiplier > 0, "widthMultiplier must be positive");
  require(out.spec.cellFactor > 0 && out.spec.cellFactor <= 1, "cellFactor must lie in (0, 1]");
  return out;
}

std::vector<double> dyadic_deltas(const Range& r) {
  std::vector<double> v;
  for (int k = r.first; k <= r.last; ++k) v.push_back(std::ldexp(1.0, -k));
  return v;
}

std::vector<IntervalUnion> bases_at(const SetSpec& spec, double delta) {
  const auto dR = Rational::from_double(delta);
  std::vector<IntervalUnion> b;
  for (const auto& a : spec.axes) b.push_back(a.base(dR));
  return b;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

// Experiment context: output directory, resolved seed and produced files.
class Run {
 public:
  Run(fs::path dir, std::optional<std::uint64_t> seed) : dir_(std::move(dir)), seed_(seed) {}

  std::uint64_t seed(Fields& top) {
    if (!seed_) seed_ = top.get<std::uint64_t>("seed");
    return *seed_;
  }
  std::optional<std::uint64_t> resolved_seed() const { return seed_; }

  void csv(const std::string& name, const CsvTable& t) {
    t.write_file((dir_ / name).string());
    files_.push_back(name);
  }
  void text(const std::string& name, const std::string& body) {
    std::ofstream os(dir_ / name, std::ios::binary);
    os << body;
    if (!os) throw Error("cannot write " + (dir_ / name).string());
    files_.push_back(name);
  }
  void verdict(const json& v) { text("verdict.json", json_text(v)); }
  std::ofstream binary(const std::string& name) {
    files_.push_back(name);
    return std::ofstream(dir_ / name, std::ios::binary);
  }

  void fail(const std::string& why) {
    ok_ = false;
    if (!why_.empty()) why_ += "; ";
    why_ += why;
  }
  bool ok() const { return ok_; }
  const std::string& why() const { return why_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::optional<std::uint64_t> seed_;
  std::vector<std::string> files_;
  bool ok_ = true;
  std::string why_;
};

json verdict_json(const Verdict& v) {
  json j;
  j["dimEstimate"] = v.dimEstimate;
  j["lower"] = v.lower;
  j["upper"] = v.upper;
  j["tol"] = v.tol;
  j["withinBounds"] = v.withinBounds;
  json m = json::array();
  for (const auto& x : v.margins) m.push_back({{"name", x.name}, {"value", x.value}});
  j["margins"] = m;
  return j;
}

// ---- count ----

PointSet read_points(Fields& top, Run& run, double eps) {
  const int sources = top.has("points") + top.has("pointsFile") + top.has("generator");
  if (sources != 1) throw ParseError("config: exactly one of \"points\", \"pointsFile\" or \"generator\" is required");
  const auto label = top.get_or<std::string>("label", "");
  if (top.has("points")) {
    const json& arr = top.at("points");
    if (!arr.is_array()) throw ParseError("config: field \"points\" must be an array");
    std::vector<Vector> pts;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = "points[" + std::to_string(i) + "]";
      if (!arr[i].is_array()) throw ParseError("config: field \"" + f + "\" must be an array");
      std::vector<double> c;
      for (const auto& x : arr[i]) c.push_back(Fields::convert<double>(x, f));
      pts.emplace_back(std::span<const double>(c));
    }
    return PointSet(std::move(pts), eps, label);
  }
  if (top.has("pointsFile")) {
    const auto path = top.get<std::string>("pointsFile");
    std::ifstream is(path);
    if (!is) throw Error("cannot open points file " + path);
    const auto P = read_point_set(is, label);
    return PointSet(P.dim(), P.points(), eps, label);
  }
  auto g = top.child("generator");
  const auto type = g.get<std::string>("type");
  const std::uint64_t seed = run.seed(top);
  PointSet P;
  if (type == "two-circles") {
    P = gen_two_circles_r4(g.get<std::uint64_t>("N"), seed, eps);
  } else if (type == "general-position") {
    P = gen_general_position(g.get<std::uint64_t>("n"), g.get<int>("d"), seed, kGeomTol, eps).set;
  } else if (type == "uniform") {
    const auto n = g.get<std::uint64_t>("n");
    const int d = g.get<int>("d");
    require(d >= 1 && d <= 8, "generator.d must be in [1, 8]");
    const double side = g.get_or<double>("side", std::pow(static_cast<double>(n), 1.0 / d));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, side);
    std::vector<Vector> pts;
    while (pts.size() < n) {
      Vector v(d);
      for (int a = 0; a < d; ++a) v[a] = u(rng);
      bool clash = false;
      for (const auto& p : pts) clash = clash || distance(p, v) <= eps;
      if (!clash) pts.push_back(v);
    }
    P = PointSet(d, std::move(pts), eps, label);
  } else {
    throw ParseError("config: field \"generator.type\" must be two-circles, general-position or uniform");
  }
  g.finish();
  return PointSet(P.dim(), P.points(), eps, label.empty() ? type : label);
}

void run_count(Fields& top, Run& run) {
  const double eps = top.get_or<double>("eps", kDefaultUnitEps);
  const auto P = read_points(top, run, eps);
  const bool verify = top.get_or<bool>("bruteforce", true);
  const bool census = top.get_or<bool>("census", true);
  const auto maxFiber = top.get_or<std::uint64_t>("maxPhiFiber", 0);
  top.finish();

  const auto grid = count_unit_pairs_grid(P);
  CsvTable t({"label", "d", "n", "eps", "orderedPairCount", "bruteforceCount", "gCount", "vCount", "holderLhs",
              "holderHolds", "maxPhiFiber", "thm1Ratio"});
  std::string brute = "";
  if (verify) {
    const auto b = count_unit_pairs_bruteforce(P);
    brute = csv_field(b);
    if (b != grid) run.fail("grid count " + std::to_string(grid) + " differs from brute force " + brute);
  }
  std::vector<std::string> row{P.label(), csv_field(P.dim()), csv_field(P.size()), csv_field(P.eps()),
                               csv_field(grid), brute};
  if (census) {
    const auto r = g_v_census(P);
    row.insert(row.end(), {csv_field(r.gCount), csv_field(r.vCount), csv_field(r.holderLhs),
                           r.holderHolds ? "true" : "false", csv_field(r.maxPhiFiber), csv_field(r.thm1Ratio)});
    if (!r.holderHolds) run.fail("Hoelder inequality fails");
    if (maxFiber > 0 && r.maxPhiFiber > maxFiber) run.fail("Phi fiber exceeds " + std::to_string(maxFiber));
  } else {
    const std::string ratio = P.size() >= 2 ? csv_field(thm1_ratio(P)) : "";
    row.insert(row.end(), {"", "", "", "", "", ratio});
  }
  t.add(std::move(row));
  run.csv("counts.csv", t);
}

// ---- lemma1 ----

Vector random_unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  for (;;) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = n01(rng);
    const double r = v.norm();
    if (r > 1e-6) return v * (1.0 / r);
  }
}

void run_lemma1(Fields& top, Run& run) {
  const int d = top.get<int>("d");
  const auto frames = top.get<std::uint64_t>("frames");
  const double tol = top.get_or<double>("tol", 1e-9);
  const std::uint64_t seed = run.seed(top);
  top.finish();
  require(d >= 2 && d <= 8, "d must be in [2, 8]");

  std::mt19937_64 rng(seed);
  std::uint64_t byCount[3] = {0, 0, 0}, overTwo = 0, redrawn = 0;
  double worst = 0;
  for (std::uint64_t f = 0; f < frames; ++f) {
    std::vector<TupleSolution> sols;
    std::vector<Vector> a;
    for (;;) {
      std::vector<Vector> u;
      for (int i = 0; i < d; ++i) u.push_back(random_unit(d, rng));
      a.clear();
      for (int j = 1; j < d; ++j) a.push_back(u[j] - u[0]);
      try {
        sols = lemma1_solve(a);
        break;
      } catch (const PreconditionError&) {
        ++redrawn;
      }
    }
    if (sols.size() > 2) ++overTwo;
    else ++byCount[sols.size()];
    for (const auto& s : sols)
      for (int j = 0; j < d; ++j) {
        worst = std::max(worst, std::abs(s.b[j].norm() - 1.0));
        if (j) worst = std::max(worst, (s.b[j] - s.b[0] - a[j - 1]).norm());
      }
  }
  CsvTable t({"d", "frames", "seed", "zeroSolutions", "oneSolution", "twoSolutions", "moreSolutions",
              "redrawnFrames", "maxResidual", "tol"});
  t.add({csv_field(d), csv_field(frames), csv_field(seed), csv_field(byCount[0]), csv_field(byCount[1]),
         csv_field(byCount[2]), csv_field(overTwo), csv_field(redrawn), csv_field(worst), csv_field(tol)});
  run.csv("lemma1.csv", t);
  if (overTwo) run.fail(std::to_string(overTwo) + " frames returned more than 2 solutions");
  if (worst > tol) run.fail("solution residual " + format_double(worst) + " exceeds " + format_double(tol));
}

// ---- cantor ----

void run_cantor(Fields& top, Run& run) {
  const int p = top.get<int>("p");
  const int q = top.get<int>("q");
  const auto hr = read_range(top, "hExponents");
  const double tol = top.get_or<double>("tol", 0.03);
  top.finish();
  const auto s = covering_series(p, q, dyadic_deltas(hr));
  const auto fit = fit_exponent(s);
  const double dim = 1.0 - fit.slope;
  const double expected = static_cast<double>(p) / q;
  std::ostringstream os;
  write_series_csv(os, s);
  run.text("covering.csv", os.str());
  const bool ok = std::abs(dim - expected) <= tol;
  run.verdict({{"dimEstimate", dim},
               {"expected", expected},
               {"slope", fit.slope},
               {"maxResidual", fit.maxResidual},
               {"tol", tol},
               {"withinBounds", ok}});
  if (!ok) run.fail("covering dimension " + format_double(dim) + " outside " + format_double(expected) + " +- " +
                    format_double(tol));
}

// ---- sweep ----

void run_sweep(Fields& top, Run& run) {
  auto sf = top.child("set");
  const auto set = read_set(sf);
  const auto methodName = top.get_or<std::string>("method", set.construction ? "product" : "grid");
  if (methodName != "grid" && methodName != "product")
    throw ParseError("config: field \"method\" must be grid or product");
  const auto method = methodName == "grid" ? SweepMethod::Grid : SweepMethod::Product;
  const int sources = top.has("deltas") + top.has("deltaExponents") + top.has("n");
  if (sources != 1) throw ParseError("config: exactly one of \"deltas\", \"deltaExponents\" or \"n\" is required");
  std::vector<double> deltas;
  if (top.has("n")) {
    if (!set.construction) throw ParseError("config: field \"n\" needs a construction set");
    const auto r = read_range(top, "n");
    deltas = lemma_deltas(set.q1, set.q2, r.first, r.last);
  } else if (top.has("deltaExponents")) {
    deltas = dyadic_deltas(read_range(top, "deltaExponents"));
  } else {
    const json& arr = top.at("deltas");
    if (!arr.is_array()) throw ParseError("config: field \"deltas\" must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      deltas.push_back(Fields::convert<double>(arr[i], "deltas[" + std::to_string(i) + "]"));
  }
  const double tol = top.get_or<double>("tol", 0.15);
  top.finish();

  const auto series = sweep(set.spec, deltas, method);
  std::ostringstream os;
  write_series_csv(os, series);
  run.text("scaling.csv", os.str());
  const auto table = set.construction ? construction_bounds(set.beta, set.gamma) : theory_bounds(set.spec.d(), set.spec.alpha);
  json v;
  if (series.degenerate || series.samples.size() < 2) {
    v = {{"withinBounds", false}, {"reason", "degenerate series"}};
    run.verdict(v);
    run.fail("degenerate scaling series");
    return;
  }
  const auto fit = fit_exponent(series);
  const auto verdict = compare_report(fit, table, tol);
  v = verdict_json(verdict);
  v["slope"] = fit.slope;
  v["maxResidual"] = fit.maxResidual;
  v["method"] = series.method;
  run.verdict(v);
  if (!verdict.withinBounds)
    run.fail("dimension estimate " + format_double(verdict.dimEstimate) + " outside [" +
             format_double(verdict.lower - tol) + ", " + format_double(verdict.upper + tol) + "]");
}

// ---- alpha-verify ----

void run_alpha_verify(Fields& top, Run& run) {
  const int p = top.get<int>("p");
  const int q = top.get<int>("q");
  const int k = top.get<int>("deltaExponent");
  const auto samples = top.get<std::uint64_t>("samples");
  const double bound = top.get_or<double>("bound", 8.0);
  const double cellFactor = top.get_or<double>("cellFactor", 1.0);
  const std::uint64_t seed = run.seed(top);
  top.finish();
  const double delta = std::ldexp(1.0, -k);
  const double alpha = static_cast<double>(p) / q;
  const auto g = rasterize({cantor_stage({p, q, cantor_stage_for_delta(p, q, Rational::from_double(delta))})}, delta,
                           cellFactor * delta, alpha);
  const auto r = alpha_set_verify(g, alpha, samples, seed);
  CsvTable t({"p", "q", "alpha", "delta", "samples", "seed", "supRatio", "worstCenter", "worstRadius", "bound"});
  t.add({csv_field(p), csv_field(q), csv_field(alpha), csv_field(delta), csv_field(r.samplesTested), csv_field(seed),
         csv_field(r.supRatio), r.worstCenter.dim() ? csv_field(r.worstCenter[0]) : "", csv_field(r.worstRadius),
         csv_field(bound)});
  run.csv("alpha.csv", t);
  if (r.supRatio > bound) run.fail("supRatio " + format_double(r.supRatio) + " exceeds " + format_double(bound));
}

// ---- spectral ----

void run_spectral(Fields& top, Run& run) {
  auto sf = top.child("set");
  auto set = read_set(sf);
  const auto dr = read_range(top, "deltaExponents");
  const double slopeTol = top.get_or<double>("slopeTol", 0.25);
  const double parsevalTol = top.get_or<double>("parsevalTol", 1e-6);
  const double cellFactor = top.get_or<double>("sampleFactor", 0.25);
  const bool writeSpectra = top.get_or<bool>("writeSpectra", false);
  std::optional<Fields> ball;
  if (top.has("ball")) ball.emplace(top.child("ball"));
  top.finish();
  const auto& spec = set.spec;
  require(spec.d() == 1 || spec.d() == 2, "spectral experiments need 1 or 2 axes");
  require(!set.construction, "spectral experiments need a product set");

  CsvTable et({"label", "d", "alpha", "delta", "energy", "reference", "ratio", "spectralL2", "spatialL2",
               "parsevalError"});
  std::vector<double> ds, ratios;
  double worstParseval = 0;
  for (double delta : dyadic_deltas(dr)) {
    const auto g = rasterize(bases_at(spec, delta), delta, cellFactor * delta, spec.alpha);
    const auto s = mollify_transform(g, delta);
    const auto e = weighted_energy(s, spec.d(), spec.alpha, delta);
    const double l2 = s.spectral_l2_squared();
    const double perr = std::abs(l2 - s.spatialL2Squared) / s.spatialL2Squared;
    worstParseval = std::max(worstParseval, perr);
    ds.push_back(delta);
    ratios.push_back(e.ratio);
    et.add({spec.label, csv_field(spec.d()), csv_field(spec.alpha), csv_field(delta), csv_field(e.energy),
            csv_field(e.reference), csv_field(e.ratio), csv_field(l2), csv_field(s.spatialL2Squared), csv_field(perr)});
    if (writeSpectra) {
      auto os = run.binary("spectrum_" + std::to_string(static_cast<int>(std::lround(-std::log2(delta)))) + ".bin");
      write_spectrum(os, s);
    }
  }
  run.csv("energy.csv", et);
  json v;
  v["parsevalWorst"] = worstParseval;
  v["parsevalTol"] = parsevalTol;
  if (worstParseval > parsevalTol) run.fail("Parseval error " + format_double(worstParseval));
  if (ds.size() >= 2) {
    const auto fit = fit_loglog(ds, ratios);
    v["energySlope"] = fit.slope;
    v["slopeTol"] = slopeTol;
    if (std::abs(fit.slope) > slopeTol) run.fail("energy ratio slope " + format_double(fit.slope));
  }

  if (ball) {
    const int k = ball->get<int>("deltaExponent");
    const auto rr = read_range(*ball, "rExponents");
    const double spread = ball->get_or<double>("maxSpread", 4.0);
    ball->finish();
    const double delta = std::ldexp(1.0, -k);
    const auto bases = bases_at(spec, delta);
    std::optional<GridIndicator> g;
    if (spec.d() == 2) g = rasterize(bases, delta, cellFactor * delta, spec.alpha);
    const auto K1 = spec.d() == 1 ? neighborhood(bases[0], Rational::from_double(delta)) : IntervalUnion();
    CsvTable bt({"label", "d", "alpha", "delta", "r", "norm", "reference", "ratio"});
    double lo = INFINITY, hi = 0;
    for (int e = rr.first; e <= rr.last; ++e) {
      const double r = std::ldexp(1.0, -e);
      const auto b = g ? ball_convolution_l2(*g, r) : ball_convolution_l2(K1, r, delta, spec.alpha);
      lo = std::min(lo, b.ratio);
      hi = std::max(hi, b.ratio);
      bt.add({spec.label, csv_field(spec.d()), csv_field(spec.alpha), csv_field(delta), csv_field(r),
              csv_field(b.norm), csv_field(b.reference), csv_field(b.ratio)});
    }
    run.csv("ball.csv", bt);
    v["ballSpread"] = hi / lo;
    v["ballMaxSpread"] = spread;
    if (!(hi / lo <= spread)) run.fail("ball ratio spread " + format_double(hi / lo));
  }
  v["withinBounds"] = run.ok();
  run.verdict(v);
}

// ---- incidence ----

void run_incidence(Fields& top, Run& run) {
  auto sf = top.child("set");
  const auto set = read_set(sf);
  const int k = top.get<int>("deltaExponent");
  const double c = top.get_or<double>("c", 0.1);
  const double cellFactor = top.get_or<double>("gridFactor", 1.0);
  const json binField = top.has("bin") ? top.at("bin") : json("last");
  const double fiberBound = top.get_or<double>("maxFiberRatio", 50.0);
  top.finish();
  const auto& spec = set.spec;
  require(spec.d() == 2 || spec.d() == 3, "incidence census needs 2 or 3 axes");
  const double delta = std::ldexp(1.0, -k);
  const auto g = rasterize(bases_at(spec, delta), delta, cellFactor * delta, spec.alpha);
  const auto h = section_histogram(g, spec.widthMultiplier);

  CsvTable ht({"bin", "lambdaLow", "count"});
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    ht.add({csv_field(b), csv_field(h.lambdaEdges[b]), csv_field(h.counts[b])});
  run.csv("histogram.csv", ht);

  std::size_t bin = h.counts.size() - 1;
  if (binField.is_string() && binField.get<std::string>() == "last") {
    while (bin > 2 && h.counts[bin] == 0) --bin;
  } else {
    bin = static_cast<std::size_t>(Fields::convert<int>(binField, "bin"));
    require(bin >= 2 && bin < h.counts.size(), "bin must name a geometric histogram bin");
  }
  require(bin >= 2 && bin < h.lambdaEdges.size(), "histogram has no geometric bin");
  const double lambda = h.lambdaEdges[bin];
  const auto cen = incidence_census(g, lambda, c);
  CsvTable t({"label", "d", "alpha", "delta", "lambda", "c", "centers", "J", "separationThreshold", "vCount",
              "maxProjectionFiber", "fiberBound", "fiberRatio", "geometricBins", "withinBinBound"});
  t.add({spec.label, csv_field(spec.d()), csv_field(spec.alpha), csv_field(delta), csv_field(lambda), csv_field(c),
         csv_field(cen.centers.size()), csv_field(cen.J.size()), csv_field(cen.separationThreshold),
         csv_field(cen.vCount), csv_field(cen.maxProjectionFiber), csv_field(cen.fiberBound),
         csv_field(cen.fiberRatio), csv_field(h.geometricBins), h.withinBinBound ? "true" : "false"});
  run.csv("incidence.csv", t);
  if (!h.withinBinBound) run.fail("histogram uses more than 4 log2(1/delta) bins");
  if (cen.fiberRatio > fiberBound) run.fail("fiber ratio " + format_double(cen.fiberRatio));
}

// ---- report ----

void run_report(Fields& top, Run& run) {
  auto entries = top.children("entries");
  top.finish();
  CsvTable t({"d", "alpha", "lower", "upper", "open", "exponentLower", "lowerSources", "upperSources"});
  json arr = json::array();
  for (auto& e : entries) {
    const int d = e.get<int>("d");
    const double alpha = e.get<double>("alpha");
    e.finish();
    const auto b = theory_bounds(d, alpha);
    auto names = [](const std::vector<NamedBound>& v) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : "; ") + x.name + " = " + format_double(x.value);
      return s;
    };
    t.add({csv_field(d), csv_field(alpha), csv_field(b.lower), csv_field(b.upper), b.open ? "true" : "false",
           csv_field(b.exponentLower), names(b.lowerBounds), names(b.upperBounds)});
    arr.push_back({{"d", d}, {"alpha", alpha}, {"lower", b.lower}, {"upper", b.upper}, {"open", b.open}});
  }
  run.csv("bounds.csv", t);
  run.text("bounds.json", json_text(arr));
}

using Runner = void (*)(Fields&, Run&);

Runner runner_for(const std::string& kind) {
  if (kind == "count") return run_count;
  if (kind == "lemma1") return run_lemma1;
  if (kind == "cantor") return run_cantor;
  if (kind == "sweep") return run_sweep;
  if (kind == "alpha-verify") return run_alpha_verify;
  if (kind == "spectral") return run_spectral;
  if (kind == "incidence") return run_incidence;
  if (kind == "report") return run_report;
  throw ParseError("config: field \"kind\" names no experiment: " + kind);
}

}  // namespace

RunResult run_config_json(const json& config, const RunOptions& opts) {
  RunResult res;
  const auto start = std::chrono::steady_clock::now();
  try {
    Fields top(config, "");
    std::string kind;
    if (top.has("kind")) {
      kind = top.get<std::string>("kind");
      if (opts.kind && *opts.kind != kind)
        throw ParseError("config: field \"kind\" is " + kind + " but the command is " + *opts.kind);
    } else if (opts.kind) {
      kind = *opts.kind;
    } else {
      top.at("kind");
    }
    const auto runner = runner_for(kind);
    const auto outField = top.get_or<std::string>("output", "");
    res.outDir = opts.outDir ? *opts.outDir : outField;
    if (res.outDir.empty()) throw ParseError("config: missing required field \"output\" (or pass --out)");
    top.get_or<std::string>("description", "");
    if (opts.threads > 0) set_threads(opts.threads);

    fs::create_directories(res.outDir);
    std::optional<std::uint64_t> seed = opts.seed;
    if (top.has("seed")) {
      const auto configSeed = top.get<std::uint64_t>("seed");
      if (!seed) seed = configSeed;
    }
    Run run(res.outDir, seed);
    runner(top, run);

    json echo = config;
    echo["kind"] = kind;
    echo.erase("output");
    if (run.resolved_seed()) echo["seed"] = *run.resolved_seed();
    run.text("config.json", json_text(echo));

    res.exitCode = run.ok() ? kExitOk : kExitVerdictFailed;
    res.message = run.ok() ? kind + ": ok" : kind + ": verdict failed: " + run.why();
    res.artifacts = run.files();

    json m;
    m["tool"] = "udist";
    m["version"] = kVersion;
    m["compiler"] = __VERSION__;
    m["cxxStandard"] = static_cast<long>(__cplusplus);
#ifdef _OPENMP
    m["openmp"] = _OPENMP;
#endif
    m["threads"] = thread_count();
    m["kind"] = kind;
    m["seed"] = run.resolved_seed() ? json(*run.resolved_seed()) : json(nullptr);
    m["config"] = echo;
    m["rerun"] = "udist " + kind + " --config config.json --out <dir>";
    m["artifacts"] = res.artifacts;
    m["exitCode"] = res.exitCode;
    m["message"] = res.message;
    m["wallSeconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream os(fs::path(res.outDir) / "manifest.json", std::ios::binary);
    os << json_text(m);
    if (!os) throw Error("cannot write manifest");
    res.artifacts.push_back("manifest.json");
  } catch (const std::exception& e) {
    res.exitCode = kExitError;
    res.message = e.what();
  }
  return res;
}

RunResult run_config(const std::string& path, const RunOptions& opts) {
  json config;
  try {
    std::ifstream is(path);
    if (!is) throw Error("cannot open config " + path);
    config = json::parse(is);
  } catch (const json::parse_error& e) {
    return {kExitError, std::string("config: ") + e.what(), {}, {}};
  } catch (const std::exception& e) {
    return {kExitError, e.what(), {}, {}};
  }
  return run_config_json(config, opts);
}

}  // namespace udist
