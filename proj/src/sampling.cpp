#include "sublab/sampling.hpp"

#include <cstdlib>
#include <string>

namespace sublab {

int thread_cap() {
  const char* raw = std::getenv("SUBMERSION_LAB_THREADS");
  if (!raw || !*raw) return 0;
  try {
    const int n = std::stoi(raw);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

void apply_thread_cap() {
#ifdef _OPENMP
  const int cap = thread_cap();
  if (cap > 0) omp_set_num_threads(cap);
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sublab
