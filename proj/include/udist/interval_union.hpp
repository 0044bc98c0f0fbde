#pragma once

#include <iosfwd>
#include <vector>

#include "udist/rational.hpp"

namespace udist {

struct Interval {
  Rational lo, hi;
  Rational length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Sorted union of pairwise disjoint closed intervals with exact rational
// endpoints. Construction normalizes: intervals are sorted and any two that
// overlap or touch are merged.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> intervals);

  const std::vector<Interval>& intervals() const { return iv_; }
  std::size_t size() const { return iv_.size(); }
  bool empty() const { return iv_.empty(); }
  const Interval& operator[](std::size_t i) const { return iv_[i]; }

  Rational measure() const;
  Rational lower() const;  // smallest endpoint; requires !empty()
  Rational upper() const;  // largest endpoint; requires !empty()

  // True iff every interval of `other` lies inside one interval of *this.
  bool contains(const IntervalUnion& other) const;
  bool contains(const Rational& x) const;

  IntervalUnion shifted(const Rational& s) const;

  friend bool operator==(const IntervalUnion&, const IntervalUnion&) = default;

 private:
  std::vector<Interval> iv_;
};

IntervalUnion unite(const IntervalUnion& a, const IntervalUnion& b);
IntervalUnion intersect(const IntervalUnion& a, const IntervalUnion& b);

// A u (A + s); s must be dyadic.
IntervalUnion shift_union(const IntervalUnion& A, const Rational& s);

// Each [lo, hi] becomes [lo - delta, hi + delta], then the result is
// normalized. delta must be a positive dyadic.
IntervalUnion neighborhood(const IntervalUnion& A, const Rational& delta);

// Text format, one interval per line: "num_lo exp_lo num_hi exp_hi" with
// endpoint = num / 2^exp. A non-dyadic endpoint writes its numerator token
// as "a/m" (m odd), meaning (a/m) / 2^exp.
void write_interval_union(std::ostream& os, const IntervalUnion& u);
IntervalUnion read_interval_union(std::istream& is);

}  // namespace udist
