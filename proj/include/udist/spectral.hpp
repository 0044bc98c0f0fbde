#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "udist/grid.hpp"
#include "udist/interval_union.hpp"

namespace udist {

// Total transform samples allowed; genuine 2-D transforms are capped lower.
inline constexpr std::uint64_t kSpectrumCap = std::uint64_t{1} << 26;
inline constexpr std::uint64_t kSpectrum2DCap = std::uint64_t{1} << 24;

// Gaussian bump of standard deviation r in each coordinate. Mass outside
// |x| <= 8r is below 1e-12 per coordinate.
struct MollifierSpec {
  double r = 0.0;

  double kernel(double x) const;     // 1-D density
  double transform(double xi) const; // exp(-2 pi^2 r^2 xi^2)
  static constexpr double kSupportRadius = 8.0;  // in units of r
};

// Amplitudes |F(1_{K_delta} * rho_delta)(xi)| on the lattice xi_a = k_a / (n_a h).
// Layout (r2c): entry (i0, i1) at values[i1 * half() + i0] with 0 <= i0 <= n0 / 2
// along grid axis 0 and i1 over the full axis 1 (indices above n1 / 2 wrap to
// negative frequencies). In 1-D only i1 = 0 exists.
struct SpectrumGrid {
  int d = 1;
  double sampleSpacing = 0.0;           // h
  std::array<std::int64_t, 2> n{1, 1};  // transform lengths (powers of two)
  double delta = 0.0;
  double alpha = 0.0;
  std::vector<double> values;

  double frequency_spacing(int axis) const { return 1.0 / (static_cast<double>(n[axis]) * sampleSpacing); }
  std::int64_t half() const { return n[0] / 2 + 1; }
  // Signed lattice frequency of entry (i0, i1).
  std::array<double, 2> frequency(std::int64_t i0, std::int64_t i1) const;
  // Lattice points represented by an entry: xi and -xi share an amplitude.
  static int multiplicity(std::int64_t i0) { return i0 == 0 ? 1 : 2; }

  // sum |F|^2 * (frequency cell volume) over the whole lattice.
  double spectral_l2_squared() const;
  // Independent spatial value of int |1_{K_delta} * rho_delta|^2 from the
  // sampled indicator and the closed-form cell-pair Gaussian integrals.
  double spatialL2Squared = 0.0;
};

// Samples the inner bitmap of G (exact when the set's endpoints lie on the
// cell lattice) and multiplies its transform by the mollifier transform.
SpectrumGrid mollify_transform(const GridIndicator& g, double delta);

struct BallConvolution {
  double norm = 0.0;       // ||1_{K_delta} * 1_{B(0,r)}||_2
  double reference = 0.0;  // r^{(d+alpha)/2} delta^{d-alpha}
  double ratio = 0.0;
};
// 1-D: exact piecewise-quadratic integration over the inner cells of G.
// 2-D: FFT convolution with the cell-center disk indicator.
BallConvolution ball_convolution_l2(const GridIndicator& g, double r);
// Exact 1-D value for a union of intervals (reference for the grid path).
BallConvolution ball_convolution_l2(const IntervalUnion& K, double r, double delta, double alpha);

struct WeightedEnergy {
  double energy = 0.0;
  double reference = 0.0;  // log(1/delta) delta^{2(d-alpha)}
  double ratio = 0.0;
};
// sum |F|^2 |xi|^{alpha-d} over the lattice; the xi = 0 entry uses the
// average of |xi|^{alpha-d} over its frequency cell.
WeightedEnergy weighted_energy(const SpectrumGrid& s, int d, double alpha, double delta);

// Text header line "udist-spectrum 1 d h n0 n1 delta alpha spatialL2 count"
// followed by the raw native-order doubles.
void write_spectrum(std::ostream& os, const SpectrumGrid& s);
SpectrumGrid read_spectrum(std::istream& is);

}  // namespace udist
