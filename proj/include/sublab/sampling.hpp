/**
 * @file sampling.hpp
 * @brief Per-sample drivers: an OpenMP kernel and the serial reference.
 *
 * Every sample owns a random stream derived from (seed, index) alone, and
 * results are stored by index, so the parallel and serial drivers produce
 * identical output for any thread count.
 */
#pragma once

#include <cstdint>
#include <exception>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sublab {

enum class Execution { serial, parallel };

/// SplitMix64 finalizer, used to decorrelate per-sample seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

/// Thread cap from SUBMERSION_LAB_THREADS (0 = runtime default).
int thread_cap();

/// Applies the cap to the OpenMP runtime; no-op without OpenMP.
void apply_thread_cap();

int max_threads();

/**
 * Evaluates fn(index, rng) for index in [0, count).
 * Exceptions thrown by any sample are rethrown after the loop, lowest index first.
 */
template <class Result, class Fn>
std::vector<Result> map_samples(int count, std::uint64_t seed, Fn&& fn, Execution exec) {
  std::vector<Result> out(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      try {
        auto rng = sample_rng(seed, static_cast<std::uint64_t>(i));
        out[i] = fn(i, rng);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    for (int i = 0; i < count; ++i) {
      try {
        auto rng = sample_rng(seed, static_cast<std::uint64_t>(i));
        out[i] = fn(i, rng);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

inline Execution execution_for(bool parallel) {
  return parallel ? Execution::parallel : Execution::serial;
}

}  // namespace sublab
