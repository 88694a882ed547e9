#pragma once

#include "sublab/core_geometry.hpp"

namespace sublab {

/**
 * A smooth map between embedded manifolds, given by an ambient formula.
 *
 * `jacobian` and `hessian` are optional analytic derivatives of the ambient
 * formula (full ambient derivatives, valid off the source manifold). When
 * absent, derivatives are taken by finite differences along retraction
 * curves of the source and only tangent directions are meaningful.
 */
struct SmoothMap {
  using AmbientMap = std::function<Vec(const Vec&)>;
  using Jacobian = std::function<Mat(const Vec&)>;
  using Hessian = std::function<Vec(const Vec&, const Vec&, const Vec&)>;

  std::string name;
  EmbeddedManifold source;
  EmbeddedManifold target;
  AmbientMap ambient_map;
  Jacobian jacobian;  ///< optional, target_ambient x source_ambient
  Hessian hessian;    ///< optional, D^2F(x)[u, v]

  Vec operator()(const Vec& x) const { return ambient_map(x); }
  bool has_analytic_jacobian() const { return static_cast<bool>(jacobian); }
  bool has_analytic_hessian() const { return static_cast<bool>(jacobian) && static_cast<bool>(hessian); }
};

/**
 * Differential of f at x as an ambient matrix restricted to tangent inputs:
 * returns P_N(f(x)) J P_M(x), so it annihilates normal vectors of the source.
 */
Mat tangent_jacobian(const SmoothMap& f, const Vec& x, const FdOptions& fd = {});

/// Copy of @p f with analytic derivatives dropped (finite-difference path).
SmoothMap without_analytic_derivatives(SmoothMap f);

/// f o g. Analytic derivatives are chained when both factors provide them.
SmoothMap compose(const SmoothMap& f, const SmoothMap& g);

SmoothMap identity_map(const EmbeddedManifold& m);

/// Constant map to @p value, which must lie on @p target.
SmoothMap constant_map(const EmbeddedManifold& source, const EmbeddedManifold& target,
                       const Vec& value);

/// Linear map x -> A x between Euclidean spaces.
SmoothMap linear_map(const Mat& a);

}  // namespace sublab
