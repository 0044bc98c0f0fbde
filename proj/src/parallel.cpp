#include "udist/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace udist {

namespace {

int env_threads() {
  const char* s = std::getenv("UDIST_THREADS");
  if (!s || !*s) return 0;
  try {
    return std::stoi(s);
  } catch (...) {
    return 0;
  }
}

int default_threads() {
  static const int initial = omp_get_max_threads();
  return initial;
}

}  // namespace

void set_threads(int n) {
  default_threads();
  if (n <= 0) n = env_threads();
  if (n <= 0) n = default_threads();
  omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double ordered_sum(const std::vector<double>& partials) {
  double s = 0.0;
  for (double p : partials) s += p;
  return s;
}

}  // namespace udist
