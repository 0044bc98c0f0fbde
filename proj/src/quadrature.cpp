#include "udist/quadrature.hpp"

#include <algorithm>
#include <queue>
#include <vector>

namespace udist {

namespace {

constexpr double kXk[8] = {0.991455371120812639, 0.949107912342758525, 0.864864423359769073, 0.741531185599394440,
                           0.586087235467691130, 0.405845151377397167, 0.207784955007898468, 0.0};
constexpr double kWk[8] = {0.022935322010529225, 0.063092092629978553, 0.104790010322250184, 0.140653259715525919,
                           0.169004726639267903, 0.190350578064785410, 0.204432940075298892, 0.209482141084727828};
constexpr double kWg[4] = {0.129484966168869693, 0.279705391489276668, 0.381830050505118945, 0.417959183673469388};

QuadResult gk15(const std::function<double(double)>& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  const double fc = f(c);
  double k = fc * kWk[7];
  double g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double v = f(c - h * kXk[j]) + f(c + h * kXk[j]);
    k += kWk[j] * v;
    if (j % 2 == 1) g += kWg[j / 2] * v;
  }
  return {k * h, std::abs((k - g) * h)};
}

struct Piece {
  double lo, hi;
  QuadResult r;
  int depth;
  bool operator<(const Piece& o) const { return r.error < o.r.error; }
};

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi, double relTol,
                              double absTol, int maxDepth) {
  if (!(hi > lo)) return {};
  std::priority_queue<Piece> q;
  Piece first{lo, hi, gk15(f, lo, hi), 0};
  double value = first.r.value, error = first.r.error;
  q.push(first);
  std::vector<Piece> done;
  while (!q.empty() && error > std::max(absTol, relTol * std::abs(value))) {
    Piece p = q.top();
    q.pop();
    if (p.depth >= maxDepth) {
      done.push_back(p);
      continue;
    }
    const double mid = 0.5 * (p.lo + p.hi);
    Piece a{p.lo, mid, gk15(f, p.lo, mid), p.depth + 1};
    Piece b{mid, p.hi, gk15(f, mid, p.hi), p.depth + 1};
    value += a.r.value + b.r.value - p.r.value;
    error += a.r.error + b.r.error - p.r.error;
    q.push(a);
    q.push(b);
  }
  // Re-sum from the pieces to avoid drift in the running totals.
  double v = 0.0, e = 0.0;
  while (!q.empty()) {
    done.push_back(q.top());
    q.pop();
  }
  std::sort(done.begin(), done.end(), [](const Piece& x, const Piece& y) { return x.lo < y.lo; });
  for (const auto& p : done) {
    v += p.r.value;
    e += p.r.error;
  }
  return {v, e};
}

}  // namespace udist
