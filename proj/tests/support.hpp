// Small helpers shared by the unit tests. Oracles live in the test files that use them.
#pragma once

#include "sublab/linalg.hpp"

#include <random>

namespace testing_support {

inline sublab::Vec gaussian(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  sublab::Vec g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = normal(rng);
  return g;
}

inline sublab::Vec unit_in(const sublab::Mat& basis, std::mt19937_64& rng) {
  sublab::Vec v = basis * gaussian(rng, basis.cols());
  return v / v.norm();
}

inline sublab::Vec unit(Eigen::Index n, Eigen::Index i) { return sublab::Vec::Unit(n, i); }

}  // namespace testing_support
