#include "turnpike/parallel.hpp"

#include <cstdlib>
#include <string>

namespace turnpike::par {

namespace {

int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

// TURNPIKE_THREADS caps the team size; unset or invalid values fall back to
// the OpenMP default. Read on every call so tests can flip the cap.
int max_threads() {
  const char* env = std::getenv("TURNPIKE_THREADS");
  if (env != nullptr && *env != '\0') {
    try {
      const int cap = std::stoi(std::string(env));
      if (cap >= 1) return cap;
    } catch (...) {
    }
  }
  return hardware_threads();
}

bool should_parallelize(std::int64_t n, std::int64_t grain) {
#ifdef _OPENMP
  return max_threads() > 1 && n >= grain;
#else
  (void)n;
  (void)grain;
  return false;
#endif
}

}  // namespace turnpike::par
