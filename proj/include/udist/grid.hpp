#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "udist/vector.hpp"

namespace udist {

// Packed bit array.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }
  bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { w_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void set_range(std::size_t lo, std::size_t hi);  // [lo, hi)
  std::size_t count() const;
  const std::vector<std::uint64_t>& words() const { return w_; }
  std::vector<std::uint64_t>& words() { return w_; }

  friend bool operator==(const Bitset&, const Bitset&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

// Total cells a grid may allocate.
inline constexpr std::uint64_t kGridCellCap = std::uint64_t{1} << 32;
// Occupied cells a rasterization may produce.
inline constexpr std::uint64_t kOccupancyCap = 100'000'000;

// Occupancy grid in d = 1, 2, 3 dimensions. Cell (i0, i1, i2) is the closed box
// origin + cell * [i, i+1] per axis; linear index i0 + dims0 * (i1 + dims1 * i2).
// `occupied` over-approximates the set (closed box meets it); `inner` marks
// cells contained in it.
struct GridIndicator {
  int d = 1;
  Vector origin;
  double cell = 0.0;
  std::array<std::int64_t, 3> dims{1, 1, 1};
  double delta = 0.0;
  double alpha = 0.0;
  Bitset occupied;
  Bitset inner;

  GridIndicator() = default;
  GridIndicator(int d, Vector origin, double cell, std::array<std::int64_t, 3> dims, double delta, double alpha);

  std::uint64_t cell_count() const {
    return static_cast<std::uint64_t>(dims[0]) * static_cast<std::uint64_t>(dims[1]) *
           static_cast<std::uint64_t>(dims[2]);
  }
  std::uint64_t index(std::int64_t i0, std::int64_t i1 = 0, std::int64_t i2 = 0) const {
    return static_cast<std::uint64_t>(i0 + dims[0] * (i1 + dims[1] * i2));
  }
  std::array<std::int64_t, 3> coords(std::uint64_t idx) const;
  Vector center(std::uint64_t idx) const;
  double cell_volume() const;
  double outer_measure() const { return static_cast<double>(occupied.count()) * cell_volume(); }
  double inner_measure() const { return static_cast<double>(inner.count()) * cell_volume(); }
  double diameter() const;  // diagonal of the full grid box
  // Ascending linear indices of occupied cells.
  std::vector<std::uint64_t> occupied_indices() const;

  friend bool operator==(const GridIndicator&, const GridIndicator&) = default;
};

// Text header (d, origin, cell, dims, delta, alpha) followed by two run-length
// lines for the occupied and inner bitmaps. Doubles use %.17g and round-trip.
void write_grid(std::ostream& os, const GridIndicator& g);
GridIndicator read_grid(std::istream& is);

}  // namespace udist
