#include "udist/grid.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace udist {

void Bitset::set_range(std::size_t lo, std::size_t hi) {
  for (std::size_t i = lo; i < hi;) {
    if ((i & 63) == 0 && i + 64 <= hi) {
      w_[i >> 6] = ~std::uint64_t{0};
      i += 64;
    } else {
      set(i);
      ++i;
    }
  }
}

std::size_t Bitset::count() const {
  std::size_t c = 0;
  for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

GridIndicator::GridIndicator(int d_, Vector origin_, double cell_, std::array<std::int64_t, 3> dims_, double delta_,
                             double alpha_)
    : d(d_), origin(origin_), cell(cell_), dims(dims_), delta(delta_), alpha(alpha_) {
  require(d >= 1 && d <= 3, "grid dimension must be 1, 2 or 3");
  require(origin.dim() == d, "grid origin dimension mismatch");
  require(cell > 0 && std::isfinite(cell), "grid cell must be positive");
  for (int i = 0; i < 3; ++i) require(dims[i] >= 1 && (i < d || dims[i] == 1), "grid extents must be positive");
  const long double total = static_cast<long double>(dims[0]) * dims[1] * dims[2];
  if (total > static_cast<long double>(kGridCellCap)) throw CapExceeded("grid needs more than 2^32 cells");
  occupied = Bitset(cell_count());
  inner = Bitset(cell_count());
}

std::array<std::int64_t, 3> GridIndicator::coords(std::uint64_t idx) const {
  const auto i = static_cast<std::int64_t>(idx);
  return {i % dims[0], (i / dims[0]) % dims[1], i / (dims[0] * dims[1])};
}

Vector GridIndicator::center(std::uint64_t idx) const {
  const auto c = coords(idx);
  Vector v(d);
  for (int a = 0; a < d; ++a) v[a] = origin[a] + (static_cast<double>(c[a]) + 0.5) * cell;
  return v;
}

double GridIndicator::cell_volume() const { return std::pow(cell, d); }

double GridIndicator::diameter() const {
  double s = 0;
  for (int a = 0; a < d; ++a) s += static_cast<double>(dims[a]) * static_cast<double>(dims[a]);
  return cell * std::sqrt(s);
}

std::vector<std::uint64_t> GridIndicator::occupied_indices() const {
  std::vector<std::uint64_t> out;
  out.reserve(occupied.count());
  const auto& w = occupied.words();
  for (std::size_t k = 0; k < w.size(); ++k) {
    std::uint64_t x = w[k];
    while (x) {
      out.push_back(k * 64 + static_cast<std::size_t>(std::countr_zero(x)));
      x &= x - 1;
    }
  }
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_runs(std::ostream& os, const char* tag, const Bitset& b) {
  std::vector<std::uint64_t> runs;
  bool cur = false;
  std::uint64_t len = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.get(i) != cur) {
      runs.push_back(len);
      cur = !cur;
      len = 0;
    }
    ++len;
  }
  runs.push_back(len);
  os << tag << ' ' << runs.size();
  for (auto r : runs) os << ' ' << r;
  os << '\n';
}

std::istringstream expect_line(std::istream& is, const std::string& tag) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("grid: missing '" + tag + "' line");
  std::istringstream ls(line);
  std::string t;
  ls >> t;
  if (t != tag) throw ParseError("grid: expected '" + tag + "', found '" + t + "'");
  return ls;
}

double read_double(std::istringstream& ls, const std::string& what) {
  std::string tok;
  if (!(ls >> tok)) throw ParseError("grid: missing value for " + what);
  double v = 0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) throw ParseError("grid: bad number '" + tok + "'");
  return v;
}

std::int64_t read_int(std::istringstream& ls, const std::string& what) {
  std::string tok;
  if (!(ls >> tok)) throw ParseError("grid: missing value for " + what);
  std::int64_t v = 0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) throw ParseError("grid: bad integer '" + tok + "'");
  return v;
}

void read_runs(std::istream& is, const std::string& tag, Bitset& b) {
  auto ls = expect_line(is, tag);
  const std::int64_t n = read_int(ls, tag);
  if (n < 1) throw ParseError("grid: empty run list");
  bool cur = false;
  std::uint64_t pos = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    const std::int64_t r = read_int(ls, tag);
    if (r < 0 || pos + static_cast<std::uint64_t>(r) > b.size()) throw ParseError("grid: runs exceed the grid");
    if (cur) b.set_range(pos, pos + static_cast<std::uint64_t>(r));
    pos += static_cast<std::uint64_t>(r);
    cur = !cur;
  }
  if (pos != b.size()) throw ParseError("grid: runs do not cover the grid");
}

}  // namespace

void write_grid(std::ostream& os, const GridIndicator& g) {
  os << "udist-grid 1\n";
  os << "d " << g.d << '\n';
  os << "origin";
  for (int a = 0; a < g.d; ++a) os << ' ' << fmt(g.origin[a]);
  os << "\ncell " << fmt(g.cell) << '\n';
  os << "dims";
  for (int a = 0; a < g.d; ++a) os << ' ' << g.dims[a];
  os << "\ndelta " << fmt(g.delta) << '\n';
  os << "alpha " << fmt(g.alpha) << '\n';
  write_runs(os, "occupied", g.occupied);
  write_runs(os, "inner", g.inner);
}

GridIndicator read_grid(std::istream& is) {
  {
    auto ls = expect_line(is, "udist-grid");
    if (read_int(ls, "version") != 1) throw ParseError("grid: unsupported version");
  }
  auto ls = expect_line(is, "d");
  const auto d = read_int(ls, "d");
  if (d < 1 || d > 3) throw ParseError("grid: d must be 1, 2 or 3");
  ls = expect_line(is, "origin");
  Vector origin(static_cast<int>(d));
  for (int a = 0; a < d; ++a) origin[a] = read_double(ls, "origin");
  ls = expect_line(is, "cell");
  const double cell = read_double(ls, "cell");
  ls = expect_line(is, "dims");
  std::array<std::int64_t, 3> dims{1, 1, 1};
  for (int a = 0; a < d; ++a) dims[a] = read_int(ls, "dims");
  ls = expect_line(is, "delta");
  const double delta = read_double(ls, "delta");
  ls = expect_line(is, "alpha");
  const double alpha = read_double(ls, "alpha");
  GridIndicator g;
  try {
    g = GridIndicator(static_cast<int>(d), origin, cell, dims, delta, alpha);
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("grid: ") + e.what());
  }
  read_runs(is, "occupied", g.occupied);
  read_runs(is, "inner", g.inner);
  return g;
}

}  // namespace udist
