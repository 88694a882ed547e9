// Independent oracles shared by the unit tests and the acceptance binary.
#pragma once

#include "sublab/graph_geometry.hpp"

#include <vector>

namespace testing_support {

/// Normal projection onto the graph of f at x by brute force: orthonormalize
/// the graph tangent vectors (b_i, df b_i) with two-pass classical
/// Gram-Schmidt and subtract the tangential part of v.
inline sublab::Vec brute_force_normal(const sublab::SmoothMap& f, const sublab::Vec& x,
                                      const sublab::Vec& v) {
  using sublab::Vec;
  const sublab::Mat bm = sublab::tangent_basis(f.source, x);
  const sublab::Mat j = sublab::tangent_jacobian(f, x);
  std::vector<Vec> q;
  for (Eigen::Index i = 0; i < bm.cols(); ++i) {
    Vec w = sublab::join(bm.col(i), j * bm.col(i));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : q) w -= e.dot(w) * e;
    }
    q.push_back(w / w.norm());
  }
  Vec out = v;
  for (const auto& e : q) out -= e.dot(v) * e;
  return out;
}

}  // namespace testing_support
