#include "udist/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "udist/errors.hpp"
#include "udist/quadrature.hpp"

namespace udist {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// FFTW buffers released on scope exit.
struct FftBuffers {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  FftBuffers(std::size_t nReal, std::size_t nSpec) {
    real = fftw_alloc_real(nReal);
    spec = fftw_alloc_complex(nSpec);
    if (!real || !spec) throw Error("FFT allocation failed");
    std::fill(real, real + nReal, 0.0);
  }
  ~FftBuffers() {
    fftw_free(real);
    fftw_free(spec);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;
};

void run_r2c(int d, const std::array<std::int64_t, 2>& n, FftBuffers& b) {
  fftw_plan p = d == 1 ? fftw_plan_dft_r2c_1d(static_cast<int>(n[0]), b.real, b.spec, FFTW_ESTIMATE)
                       : fftw_plan_dft_r2c_2d(static_cast<int>(n[1]), static_cast<int>(n[0]), b.real, b.spec,
                                              FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);
}

void run_c2r(int d, const std::array<std::int64_t, 2>& n, FftBuffers& b) {
  fftw_plan p = d == 1 ? fftw_plan_dft_c2r_1d(static_cast<int>(n[0]), b.spec, b.real, FFTW_ESTIMATE)
                       : fftw_plan_dft_c2r_2d(static_cast<int>(n[1]), static_cast<int>(n[0]), b.spec, b.real,
                                              FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);
}

std::int64_t signed_index(std::int64_t i, std::int64_t n) { return i <= n / 2 ? i : i - n; }

// Copies the inner bitmap of a 1-D or 2-D grid into a zero-padded real array
// with row length n0.
void load_inner(const GridIndicator& g, std::int64_t n0, double* out) {
  for (std::int64_t i1 = 0; i1 < g.dims[1]; ++i1)
    for (std::int64_t i0 = 0; i0 < g.dims[0]; ++i0)
      if (g.inner.get(g.index(i0, i1))) out[i1 * n0 + i0] = 1.0;
}

// Second antiderivative of the centered Gaussian density with standard
// deviation s, minus its linear part max(t, 0).
double psi_tail(double x, double s) {
  const double u = x / s;
  return s * std::exp(-0.5 * u * u) / std::sqrt(2.0 * kPi) - x * 0.5 * std::erfc(u / std::numbers::sqrt2);
}

// Integral over two cells of length h at offset k of the Gaussian of
// standard deviation s evaluated at the point difference.
double cell_pair_gaussian(std::int64_t k, double h, double s) {
  const double t = static_cast<double>(k) * h;
  const double linear = k == 0 ? h : 0.0;
  return linear + psi_tail(std::abs(t + h), s) - 2.0 * psi_tail(std::abs(t), s) + psi_tail(std::abs(t - h), s);
}

double cell_average_power(double a, double b, double alpha, int d) {
  // Average of |xi|^{alpha - d} over [-a, a] (d = 1) or [-a, a] x [-b, b].
  if (d == 1) return std::pow(a, alpha - 1.0) / alpha;
  const double split = std::atan2(b, a);
  const double p1 = integrate_adaptive([&](double th) { return std::pow(a / std::cos(th), alpha); }, 0.0, split).value;
  const double p2 =
      integrate_adaptive([&](double th) { return std::pow(b / std::sin(th), alpha); }, split, kPi / 2.0).value;
  return (p1 + p2) / (alpha * a * b);
}

struct Segment {
  double lo, hi;
};

// int (P(x + r) - P(x - r))^2 dx for the measure P of a sorted disjoint union.
double ball_l2_squared(const std::vector<Segment>& K, double r) {
  if (K.empty()) return 0.0;
  std::vector<double> prefix(K.size() + 1, 0.0);
  for (std::size_t i = 0; i < K.size(); ++i) prefix[i + 1] = prefix[i] + (K[i].hi - K[i].lo);
  auto P = [&](double y) {
    auto it = std::upper_bound(K.begin(), K.end(), y, [](double v, const Segment& s) { return v < s.lo; });
    const std::size_t i = static_cast<std::size_t>(it - K.begin());
    if (i == 0) return 0.0;
    const Segment& s = K[i - 1];
    return prefix[i - 1] + std::min(y, s.hi) - s.lo;
  };
  std::vector<double> br;
  br.reserve(4 * K.size());
  for (const auto& s : K) {
    br.push_back(s.lo - r);
    br.push_back(s.lo + r);
    br.push_back(s.hi - r);
    br.push_back(s.hi + r);
  }
  std::sort(br.begin(), br.end());
  double total = 0.0;
  double x0 = br[0];
  double g0 = P(x0 + r) - P(x0 - r);
  for (std::size_t i = 1; i < br.size(); ++i) {
    const double x1 = br[i];
    if (x1 <= x0) continue;
    const double g1 = P(x1 + r) - P(x1 - r);
    total += (x1 - x0) * (g0 * g0 + g0 * g1 + g1 * g1) / 3.0;
    x0 = x1;
    g0 = g1;
  }
  return total;
}

BallConvolution finish_ball(double l2sq, double r, int d, double alpha, double delta) {
  BallConvolution out;
  out.norm = std::sqrt(std::max(l2sq, 0.0));
  out.reference = std::pow(r, (d + alpha) / 2.0) * std::pow(delta, d - alpha);
  out.ratio = out.norm / out.reference;
  return out;
}

}  // namespace

double MollifierSpec::kernel(double x) const {
  require(r > 0.0, "mollifier radius must be positive");
  const double u = x / r;
  return std::exp(-0.5 * u * u) / (r * std::sqrt(2.0 * kPi));
}

double MollifierSpec::transform(double xi) const {
  require(r > 0.0, "mollifier radius must be positive");
  return std::exp(-2.0 * kPi * kPi * r * r * xi * xi);
}

std::array<double, 2> SpectrumGrid::frequency(std::int64_t i0, std::int64_t i1) const {
  return {static_cast<double>(i0) * frequency_spacing(0),
          d == 1 ? 0.0 : static_cast<double>(signed_index(i1, n[1])) * frequency_spacing(1)};
}

double SpectrumGrid::spectral_l2_squared() const {
  const std::int64_t h0 = half();
  const std::int64_t rows = d == 1 ? 1 : n[1];
  double vol = frequency_spacing(0) * (d == 1 ? 1.0 : frequency_spacing(1));
  double total = 0.0;
  for (std::int64_t i1 = 0; i1 < rows; ++i1)
    for (std::int64_t i0 = 0; i0 < h0; ++i0) {
      const double v = values[static_cast<std::size_t>(i1 * h0 + i0)];
      total += multiplicity(i0) * v * v;
    }
  return total * vol;
}

SpectrumGrid mollify_transform(const GridIndicator& g, double delta) {
  require(g.d == 1 || g.d == 2, "mollify_transform supports d = 1 and d = 2");
  require(delta > 0.0, "delta must be positive");
  require(g.cell <= delta / 4.0 * (1.0 + 1e-12), "grid resolution must be at most delta / 4");
  const double h = g.cell;
  const MollifierSpec rho{delta};
  // Room for the mollifier support on both sides; also covers the autocorrelation lags used below.
  const auto pad = static_cast<std::int64_t>(std::ceil(2.0 * MollifierSpec::kSupportRadius * delta / h)) + 2;
  const auto lags = static_cast<std::int64_t>(std::ceil(10.0 * std::numbers::sqrt2 * delta / h)) + 1;

  SpectrumGrid s;
  s.d = g.d;
  s.sampleSpacing = h;
  s.delta = delta;
  s.alpha = g.alpha;
  // Twice the minimal length halves the frequency spacing of the lattice sums.
  for (int a = 0; a < g.d; ++a)
    s.n[a] = static_cast<std::int64_t>(std::bit_ceil(static_cast<std::uint64_t>(2 * (g.dims[a] + pad))));
  const auto total = static_cast<std::uint64_t>(s.n[0] * s.n[1]);
  if (total > (g.d == 1 ? kSpectrumCap : kSpectrum2DCap))
    throw CapExceeded("spectrum needs " + std::to_string(total) + " transform samples");

  const std::int64_t h0 = s.half();
  const std::int64_t rows = g.d == 1 ? 1 : s.n[1];
  const auto nSpec = static_cast<std::size_t>(h0 * rows);
  FftBuffers buf(static_cast<std::size_t>(total), nSpec);
  load_inner(g, s.n[0], buf.real);
  run_r2c(g.d, s.n, buf);

  s.values.resize(nSpec);
  const double hd = g.d == 1 ? h : h * h;
  for (std::int64_t i1 = 0; i1 < rows; ++i1)
    for (std::int64_t i0 = 0; i0 < h0; ++i0) {
      const auto k = static_cast<std::size_t>(i1 * h0 + i0);
      const auto xi = s.frequency(i0, i1);
      const double mag = std::hypot(buf.spec[k][0], buf.spec[k][1]);
      double factor = hd * std::abs(sinc(kPi * xi[0] * h)) * rho.transform(xi[0]);
      if (g.d == 2) factor *= std::abs(sinc(kPi * xi[1] * h)) * rho.transform(xi[1]);
      s.values[k] = mag * factor;
      // |X|^2 for the autocorrelation of the sampled indicator.
      buf.spec[k][0] = mag * mag;
      buf.spec[k][1] = 0.0;
    }

  run_c2r(g.d, s.n, buf);
  const double norm = static_cast<double>(total);
  const double sd = std::numbers::sqrt2 * delta;
  std::vector<double> pairWeight(static_cast<std::size_t>(2 * lags + 1));
  for (std::int64_t k = -lags; k <= lags; ++k) pairWeight[static_cast<std::size_t>(k + lags)] = cell_pair_gaussian(k, h, sd);
  double spatial = 0.0;
  const std::int64_t lag1 = g.d == 1 ? 0 : lags;
  for (std::int64_t k1 = -lag1; k1 <= lag1; ++k1) {
    const double w1 = g.d == 1 ? 1.0 : pairWeight[static_cast<std::size_t>(k1 + lags)];
    const std::int64_t r1 = k1 < 0 ? k1 + s.n[1] : k1;
    for (std::int64_t k0 = -lags; k0 <= lags; ++k0) {
      const std::int64_t r0 = k0 < 0 ? k0 + s.n[0] : k0;
      const double A = buf.real[r1 * s.n[0] + r0] / norm;
      spatial += A * w1 * pairWeight[static_cast<std::size_t>(k0 + lags)];
    }
  }
  s.spatialL2Squared = spatial;
  return s;
}

BallConvolution ball_convolution_l2(const GridIndicator& g, double r) {
  require(g.d == 1 || g.d == 2, "ball convolution supports d = 1 and d = 2");
  require(r >= g.delta * (1.0 - 1e-12), "ball convolution needs r >= delta");
  const double h = g.cell;
  if (g.d == 1) {
    std::vector<Segment> K;
    for (std::int64_t i = 0; i < g.dims[0];) {
      if (!g.inner.get(static_cast<std::uint64_t>(i))) {
        ++i;
        continue;
      }
      std::int64_t j = i;
      while (j < g.dims[0] && g.inner.get(static_cast<std::uint64_t>(j))) ++j;
      K.push_back({g.origin[0] + h * static_cast<double>(i), g.origin[0] + h * static_cast<double>(j)});
      i = j;
    }
    return finish_ball(ball_l2_squared(K, r), r, 1, g.alpha, g.delta);
  }
  const auto reach = static_cast<std::int64_t>(std::ceil(r / h)) + 1;
  std::array<std::int64_t, 2> n{};
  for (int a = 0; a < 2; ++a) n[a] = static_cast<std::int64_t>(std::bit_ceil(static_cast<std::uint64_t>(g.dims[a] + 2 * reach)));
  const auto total = static_cast<std::uint64_t>(n[0] * n[1]);
  if (total > kSpectrum2DCap) throw CapExceeded("ball convolution needs " + std::to_string(total) + " transform samples");
  const std::int64_t h0 = n[0] / 2 + 1;
  const auto nSpec = static_cast<std::size_t>(h0 * n[1]);
  FftBuffers f(total, nSpec), disk(total, nSpec);
  load_inner(g, n[0], f.real);
  for (std::int64_t m1 = -reach; m1 <= reach; ++m1)
    for (std::int64_t m0 = -reach; m0 <= reach; ++m0)
      if (static_cast<double>(m0 * m0 + m1 * m1) * h * h <= r * r)
        disk.real[(m1 < 0 ? m1 + n[1] : m1) * n[0] + (m0 < 0 ? m0 + n[0] : m0)] = 1.0;
  run_r2c(2, n, f);
  run_r2c(2, n, disk);
  for (std::size_t k = 0; k < nSpec; ++k) {
    const double re = f.spec[k][0] * disk.spec[k][0] - f.spec[k][1] * disk.spec[k][1];
    const double im = f.spec[k][0] * disk.spec[k][1] + f.spec[k][1] * disk.spec[k][0];
    f.spec[k][0] = re;
    f.spec[k][1] = im;
  }
  run_c2r(2, n, f);
  // Convolution value per cell is (cell count in the shifted disk) * h^2.
  const double scale = h * h / static_cast<double>(total);
  double sum = 0.0;
  for (std::uint64_t k = 0; k < total; ++k) {
    const double v = f.real[k] * scale;
    sum += v * v;
  }
  return finish_ball(sum * h * h, r, 2, g.alpha, g.delta);
}

BallConvolution ball_convolution_l2(const IntervalUnion& K, double r, double delta, double alpha) {
  require(r >= delta * (1.0 - 1e-12), "ball convolution needs r >= delta");
  std::vector<Segment> segs;
  for (const auto& iv : K.intervals()) segs.push_back({iv.lo.to_double(), iv.hi.to_double()});
  return finish_ball(ball_l2_squared(segs, r), r, 1, alpha, delta);
}

WeightedEnergy weighted_energy(const SpectrumGrid& s, int d, double alpha, double delta) {
  require(s.d == d, "spectrum dimension does not match d");
  require(alpha > 0.0 && alpha < static_cast<double>(d), "weighted energy needs 0 < alpha < d");
  require(delta > 0.0 && delta < 1.0, "weighted energy needs 0 < delta < 1");
  const std::int64_t h0 = s.half();
  const std::int64_t rows = d == 1 ? 1 : s.n[1];
  const double df0 = s.frequency_spacing(0);
  const double df1 = d == 1 ? 1.0 : s.frequency_spacing(1);
  const double expo = alpha - static_cast<double>(d);
  double total = 0.0;
  for (std::int64_t i1 = 0; i1 < rows; ++i1)
    for (std::int64_t i0 = 0; i0 < h0; ++i0) {
      const double v = s.values[static_cast<std::size_t>(i1 * h0 + i0)];
      if (i0 == 0 && i1 == 0) continue;
      const auto xi = s.frequency(i0, i1);
      total += SpectrumGrid::multiplicity(i0) * v * v * std::pow(std::hypot(xi[0], xi[1]), expo);
    }
  const double v0 = s.values.empty() ? 0.0 : s.values[0];
  total += v0 * v0 * cell_average_power(df0 / 2.0, df1 / 2.0, alpha, d);
  WeightedEnergy out;
  out.energy = total * df0 * df1;
  out.reference = std::log(1.0 / delta) * std::pow(delta, 2.0 * (d - alpha));
  out.ratio = out.energy / out.reference;
  return out;
}

void write_spectrum(std::ostream& os, const SpectrumGrid& s) {
  std::ostringstream head;
  head.precision(17);
  head << "udist-spectrum 1 " << s.d << ' ' << s.sampleSpacing << ' ' << s.n[0] << ' ' << s.n[1] << ' ' << s.delta
       << ' ' << s.alpha << ' ' << s.spatialL2Squared << ' ' << s.values.size() << '\n';
  os << head.str();
  os.write(reinterpret_cast<const char*>(s.values.data()), static_cast<std::streamsize>(s.values.size() * sizeof(double)));
  if (!os) throw Error("failed writing spectrum");
}

SpectrumGrid read_spectrum(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("missing spectrum header");
  std::istringstream head(line);
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  SpectrumGrid s;
  head >> magic >> version >> s.d >> s.sampleSpacing >> s.n[0] >> s.n[1] >> s.delta >> s.alpha >> s.spatialL2Squared >>
      count;
  if (!head || magic != "udist-spectrum" || version != 1) throw ParseError("bad spectrum header");
  if ((s.d != 1 && s.d != 2) || s.n[0] < 1 || s.n[1] < 1) throw ParseError("bad spectrum dimensions");
  const auto expect = static_cast<std::size_t>(s.half() * (s.d == 1 ? 1 : s.n[1]));
  if (count != expect) throw ParseError("spectrum count does not match its dimensions");
  s.values.resize(count);
  is.read(reinterpret_cast<char*>(s.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw ParseError("truncated spectrum data");
  return s;
}

}  // namespace udist
