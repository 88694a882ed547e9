/**
 * @file core_geometry.hpp
 * @brief Calculus on submanifolds of flat Euclidean space.
 *
 * A manifold is described extrinsically: a field of orthogonal projectors
 * onto its tangent spaces and a retraction. Everything metric (connection,
 * second fundamental form, curvature) is derived from these two objects with
 * the induced metric. Curvature goes through the Gauss equation, so only one
 * derivative of the projector field is ever taken.
 */
#pragma once

#include "sublab/linalg.hpp"

#include <functional>
#include <random>
#include <string>

namespace sublab {

/// Central finite differences along retraction curves.
struct FdOptions {
  double step = 1e-4;
  bool richardson = true;  ///< combine h and h/2 to cancel the O(h^2) term
};

/// Derivative at t = 0 of a Vec- or Mat-valued curve.
template <class Curve>
auto fd_derivative(const Curve& curve, const FdOptions& fd) {
  const double h = fd.step;
  auto d1 = ((curve(h) - curve(-h)) / (2.0 * h)).eval();
  if (!fd.richardson) return d1;
  auto d2 = ((curve(0.5 * h) - curve(-0.5 * h)) / h).eval();
  return ((4.0 * d2 - d1) / 3.0).eval();
}

struct EmbeddedManifold {
  using Projector = std::function<Mat(const Vec&)>;
  using Retraction = std::function<Vec(const Vec&, const Vec&)>;
  using ProjectorDerivative = std::function<Mat(const Vec&, const Vec&)>;
  using Basis = std::function<Mat(const Vec&)>;
  using Sampler = std::function<Vec(std::mt19937_64&)>;

  std::string name;
  int ambient_dim = 0;
  int intrinsic_dim = 0;
  Projector projector;
  Retraction retraction;
  ProjectorDerivative projector_derivative;  ///< optional analytic dP(x)[v]
  Basis basis;                               ///< optional orthonormal tangent basis
  Sampler sampler;                           ///< optional random point generator

  bool has_analytic_derivative() const { return static_cast<bool>(projector_derivative); }
};

/// Membership residual |retraction(x, 0) - x|.
double membership_residual(const EmbeddedManifold& m, const Vec& x);

/// Throws PointOffManifold when the membership residual exceeds @p tol.
void require_on_manifold(const EmbeddedManifold& m, const Vec& x, double tol = 1e-8);

Mat tangent_projector(const EmbeddedManifold& m, const Vec& x);

/// Orthonormal tangent basis (ambient_dim x intrinsic_dim).
Mat tangent_basis(const EmbeddedManifold& m, const Vec& x);

/// Uniform-ish random point; requires a sampler.
Vec random_point(const EmbeddedManifold& m, std::mt19937_64& rng);

/// Gaussian vector projected onto T_xM.
Vec random_tangent(const EmbeddedManifold& m, const Vec& x, std::mt19937_64& rng);

/// Returns a copy of @p m with the analytic projector derivative removed,
/// forcing the finite-difference path.
EmbeddedManifold without_analytic_derivative(EmbeddedManifold m);

/// dP(x)[v]: derivative of the projector field along a tangent vector.
Mat projector_derivative(const EmbeddedManifold& m, const Vec& x, const Vec& v,
                         const FdOptions& fd = {});

struct TangentVector {
  Vec base_point;
  Vec components;
};

using VectorField = std::function<Vec(const Vec&)>;

/// The field y -> P(y) v, the canonical tangent extension of a vector.
VectorField projected_constant_field(const EmbeddedManifold& m, const Vec& v);

/// Levi-Civita derivative of the induced metric: P(x) d/dt Y(c(t)).
Vec covariant_derivative(const EmbeddedManifold& m, const VectorField& field, const Vec& x,
                         const Vec& direction, const FdOptions& fd = {});

/// II(X, Y) = (I - P) dP[X] Y, normal-valued and symmetric.
Vec second_fundamental_form(const EmbeddedManifold& m, const Vec& x, const Vec& a, const Vec& b,
                            const FdOptions& fd = {});

/// Same as above with a precomputed projector derivative along @p a.
Vec second_fundamental_form(const Mat& projector, const Mat& d_projector_a, const Vec& b);

/**
 * (4,0) curvature tensor from the Gauss equation:
 * R(X,Y,Z,W) = <II(X,W), II(Y,Z)> - <II(X,Z), II(Y,W)>.
 * With this convention the unit sphere has R(X,Y,Y,X) = 1 on orthonormal pairs.
 */
double riemann(const EmbeddedManifold& m, const Vec& x, const Vec& a, const Vec& b, const Vec& c,
               const Vec& d, const FdOptions& fd = {});

/// Gram determinant |X|^2 |Y|^2 - <X,Y>^2.
double plane_gram(const Vec& a, const Vec& b);

/// Throws DegeneratePlane when the Gram determinant is below @p gram_tol.
double sectional_curvature(const EmbeddedManifold& m, const Vec& x, const Vec& a, const Vec& b,
                           const FdOptions& fd = {}, double gram_tol = 1e-12);

/// [X, Y](x) computed from ambient derivatives along retraction curves.
Vec lie_bracket(const EmbeddedManifold& m, const VectorField& a, const VectorField& b,
                const Vec& x, const FdOptions& fd = {});

/**
 * Builds a manifold whose tangent spaces are given by a spanning-set
 * function. The projector is assembled from an orthonormalized basis, so it
 * is smooth whenever the spanned subspace is, regardless of the spanning set.
 */
EmbeddedManifold manifold_from_spanning_set(std::string name, int ambient_dim, int intrinsic_dim,
                                            std::function<Mat(const Vec&)> spanning,
                                            EmbeddedManifold::Retraction retraction,
                                            EmbeddedManifold::Sampler sampler = {});

}  // namespace sublab
