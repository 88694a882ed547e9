/**
 * @file geometries.hpp
 * @brief Built-in manifolds, maps and bundles.
 *
 * Spheres, products, the division algebras up to the octonions, the three
 * Hopf fibrations S^3 -> S^2(1/2), S^7 -> S^4(1/2), S^15 -> S^8(1/2),
 * geodesic k-folds of spheres and the normalized-translation
 * diffeomorphisms used to bend level sets.
 */
#pragma once

#include "sublab/submersion.hpp"

#include <string_view>

namespace sublab {

EmbeddedManifold euclidean(int dim);

/// Round sphere of radius r in R^{n+1}; analytic projector derivative.
EmbeddedManifold sphere(int n, double radius = 1.0);

/// Cartesian product in the concatenated ambient space.
EmbeddedManifold product(const EmbeddedManifold& first, const EmbeddedManifold& second);

/**
 * Cayley-Dickson algebra of dimension 1, 2, 4 or 8 over the reals,
 * with (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c)).
 */
class DivisionAlgebra {
 public:
  explicit DivisionAlgebra(int dim);

  int dim() const { return dim_; }
  Vec multiply(const Vec& a, const Vec& b) const;
  Vec conj(const Vec& a) const;
  Vec one() const;
  /// Matrix of x -> a x.
  Mat left_matrix(const Vec& a) const;
  /// Matrix of x -> x b.
  Mat right_matrix(const Vec& b) const;

 private:
  int dim_;
};

enum class HopfFlavor { complex, quaternionic, octonionic };

std::string_view to_string(HopfFlavor flavor);
int algebra_dim(HopfFlavor flavor);

/// (a, b) -> (a conj(b), (|a|^2 - |b|^2)/2) from S^{2d-1} onto S^d(1/2).
SmoothMap hopf_map(HopfFlavor flavor);

/// Right scalar action (a, b) -> (a z, b z); not defined for octonions.
Vec hopf_fiber_action(HopfFlavor flavor, const Vec& p, const Vec& z);

RiemannianSubmersion hopf_bundle(HopfFlavor flavor);

/// Product bundle base x fiber -> base; @p fiber_origin is a point of the fiber.
RiemannianSubmersion trivial_bundle(const EmbeddedManifold& base, const EmbeddedManifold& fiber,
                                    const Vec& fiber_origin);

/**
 * Circle bundle over the unit S^2 whose fiber over y is the circle of radius
 * 1 + y_2 / 2. Fibers are not totally geodesic; used to exercise failing
 * checks.
 */
RiemannianSubmersion broken_fixture_bundle();

/// Value and first two derivatives of a polynomial at a point.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// T_k and U_k with derivatives by the three-term recurrences.
Jet chebyshev_t(int k, double c);
Jet chebyshev_u(int k, double c);

/**
 * Geodesic k-fold of S^n(r) about the pole r e_pole:
 * y -> r (T_k(c) e + U_{k-1}(c)(u - c e)), u = y/r, c = <u, e>.
 */
SmoothMap geodesic_k_fold(int n, int k, double radius = 1.0, int pole = 0);

/// Angle form cos(kt) e + sin(kt) X of the same map, undefined at the poles.
Vec geodesic_k_fold_angle_form(const Vec& y, int k, double radius = 1.0, int pole = 0);

/// x -> r (u + δ a)/|u + δ a|, u = x/r; requires |a| = 1 and 0 <= δ < 1.
SmoothMap perturbation_diffeo(int n, double delta, const Vec& axis, double radius = 1.0);

}  // namespace sublab
