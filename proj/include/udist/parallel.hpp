#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace udist {

// Sets the worker count used by OpenMP kernels. n <= 0 restores the default
// (UDIST_THREADS if set, otherwise the OpenMP runtime default).
void set_threads(int n);
int thread_count();

// Fixed partition count used by kernels whose floating-point reductions must
// not depend on the worker count: each chunk is reduced on its own and the
// chunk partials are summed in chunk order.
inline constexpr std::size_t kReductionChunks = 256;

// Sub-seed for partition `index` of a seeded computation (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Sums partials in index order (deterministic).
double ordered_sum(const std::vector<double>& partials);

}  // namespace udist
