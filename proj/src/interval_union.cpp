#include "udist/interval_union.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace udist {

IntervalUnion::IntervalUnion(std::vector<Interval> intervals) {
  for (const auto& i : intervals) require(i.lo <= i.hi, "interval with lo > hi");
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  for (const auto& i : intervals) {
    if (!iv_.empty() && i.lo <= iv_.back().hi) {
      iv_.back().hi = max(iv_.back().hi, i.hi);
    } else {
      iv_.push_back(i);
    }
  }
}

Rational IntervalUnion::measure() const {
  Rational m;
  for (const auto& i : iv_) m += i.length();
  return m;
}

Rational IntervalUnion::lower() const {
  require(!iv_.empty(), "empty interval union has no lower endpoint");
  return iv_.front().lo;
}

Rational IntervalUnion::upper() const {
  require(!iv_.empty(), "empty interval union has no upper endpoint");
  return iv_.back().hi;
}

bool IntervalUnion::contains(const Rational& x) const {
  auto it = std::upper_bound(iv_.begin(), iv_.end(), x, [](const Rational& v, const Interval& i) { return v < i.lo; });
  if (it == iv_.begin()) return false;
  --it;
  return x <= it->hi;
}

bool IntervalUnion::contains(const IntervalUnion& other) const {
  std::size_t k = 0;
  for (const auto& o : other.iv_) {
    while (k < iv_.size() && iv_[k].hi < o.lo) ++k;
    if (k == iv_.size() || iv_[k].lo > o.lo || iv_[k].hi < o.hi) return false;
  }
  return true;
}

IntervalUnion IntervalUnion::shifted(const Rational& s) const {
  IntervalUnion r;
  r.iv_.reserve(iv_.size());
  for (const auto& i : iv_) r.iv_.push_back({i.lo + s, i.hi + s});
  return r;
}

IntervalUnion unite(const IntervalUnion& a, const IntervalUnion& b) {
  std::vector<Interval> all = a.intervals();
  all.insert(all.end(), b.intervals().begin(), b.intervals().end());
  return IntervalUnion(std::move(all));
}

IntervalUnion intersect(const IntervalUnion& a, const IntervalUnion& b) {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  const auto& A = a.intervals();
  const auto& B = b.intervals();
  while (i < A.size() && j < B.size()) {
    const Rational lo = max(A[i].lo, B[j].lo);
    const Rational hi = min(A[i].hi, B[j].hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (A[i].hi < B[j].hi)
      ++i;
    else
      ++j;
  }
  return IntervalUnion(std::move(out));
}

IntervalUnion shift_union(const IntervalUnion& A, const Rational& s) {
  if (!s.is_dyadic()) throw PreconditionError("shift must be dyadic, got " + s.str());
  return unite(A, A.shifted(s));
}

IntervalUnion neighborhood(const IntervalUnion& A, const Rational& delta) {
  require(delta > Rational(0), "neighborhood radius must be positive");
  if (!delta.is_dyadic()) throw PreconditionError("neighborhood radius must be dyadic, got " + delta.str());
  std::vector<Interval> iv;
  iv.reserve(A.size());
  for (const auto& i : A.intervals()) iv.push_back({i.lo - delta, i.hi + delta});
  return IntervalUnion(std::move(iv));
}

namespace {

// v = (a/m) / 2^e with m odd.
void write_endpoint(std::ostream& os, const Rational& v) {
  std::int64_t den = v.den();
  int e = 0;
  while ((den & 1) == 0) {
    den >>= 1;
    ++e;
  }
  os << v.num();
  if (den != 1) os << '/' << den;
  os << ' ' << e;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (...) {
    throw ParseError("interval union: malformed integer '" + s + "'");
  }
  if (pos != s.size()) throw ParseError("interval union: malformed integer '" + s + "'");
  return v;
}

Rational parse_endpoint(const std::string& numTok, const std::string& expTok) {
  const std::int64_t e = parse_int(expTok);
  if (e < 0 || e > 62) throw ParseError("interval union: exponent out of range '" + expTok + "'");
  const auto slash = numTok.find('/');
  Rational num = slash == std::string::npos
                     ? Rational(parse_int(numTok))
                     : Rational(parse_int(numTok.substr(0, slash)), parse_int(numTok.substr(slash + 1)));
  return num * Rational::dyadic(1, static_cast<int>(e));
}

}  // namespace

void write_interval_union(std::ostream& os, const IntervalUnion& u) {
  for (const auto& i : u.intervals()) {
    write_endpoint(os, i.lo);
    os << ' ';
    write_endpoint(os, i.hi);
    os << '\n';
  }
}

IntervalUnion read_interval_union(std::istream& is) {
  std::vector<Interval> iv;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    std::istringstream ls(line);
    std::string t[4], extra;
    int k = 0;
    while (k < 4 && ls >> t[k]) ++k;
    if (k == 0) continue;
    if (k != 4 || (ls >> extra))
      throw ParseError("interval union: line " + std::to_string(lineNo) + " needs 4 fields");
    const Rational lo = parse_endpoint(t[0], t[1]);
    const Rational hi = parse_endpoint(t[2], t[3]);
    if (hi < lo) throw ParseError("interval union: line " + std::to_string(lineNo) + " has lo > hi");
    if (!iv.empty() && lo <= iv.back().hi)
      throw ParseError("interval union: line " + std::to_string(lineNo) + " is not sorted and disjoint");
    iv.push_back({lo, hi});
  }
  return IntervalUnion(std::move(iv));
}

}  // namespace udist
