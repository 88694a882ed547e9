/**
 * @file graph_geometry.hpp
 * @brief Operators on the graph Γ_f = {(x, f(x))} of a map f : M -> N.
 *
 * Pairs (X, Y) in T(M×N) are stored as one concatenated ambient vector with
 * the M-block first. With df† the metric dual of df and
 * O = (1 + df df†)^{-1}:
 *
 *   Ξ(X, Y)   = (X - df† Y, df X + Y)
 *   pr_ν(X,Y) = (-df† O (Y - df X), O (Y - df X))
 *   II_f      = Ξ_N O d²f,   d²f(X, X') = ∇^N_{dfX} df X' - df(∇^M_X X')
 */
#pragma once

#include "sublab/smooth_map.hpp"

#include <optional>

namespace sublab {

/// g(X, Y) = <G(x) X, Y> against the induced metric; G symmetric positive definite.
using MetricOperatorField = std::function<Mat(const Vec&)>;

struct GraphOperators {
  Mat source_basis;  ///< orthonormal basis of T_xM (ambient columns)
  Mat target_basis;  ///< orthonormal basis of T_{f(x)}N
  Mat df;            ///< dim N x dim M on the bases
  Mat df_dagger;     ///< dim M x dim N
  Mat o;             ///< (1 + df df†)^{-1}, dim N x dim N

  // The same operators as ambient matrices acting on tangent vectors.
  Mat df_ambient() const { return target_basis * df * source_basis.transpose(); }
  Mat df_dagger_ambient() const { return source_basis * df_dagger * target_basis.transpose(); }
  Mat o_ambient() const { return target_basis * o * target_basis.transpose(); }

  int source_ambient() const { return static_cast<int>(source_basis.rows()); }
  int target_ambient() const { return static_cast<int>(target_basis.rows()); }
};

/// Materializes df, df† and O at x (induced metrics).
GraphOperators graph_operators(const SmoothMap& f, const Vec& x, const FdOptions& fd = {});

/**
 * df† with respect to the given metric operators (induced when empty),
 * solved from the Gram systems of the tangent bases. Throws IllConditioned
 * when a Gram matrix has condition number above 1e12.
 */
Mat df_dagger(const SmoothMap& f, const Vec& x, const MetricOperatorField& source_metric = {},
              const MetricOperatorField& target_metric = {}, const FdOptions& fd = {});

Vec join(const Vec& first, const Vec& second);

/// Π(X, Y) = Y - df X.
Vec graph_pi(const GraphOperators& ops, const Vec& pair);

/// Ξ(X, Y) = dF(X) + Ξ_N(Y).
Vec xi(const GraphOperators& ops, const Vec& pair);
Vec xi(const SmoothMap& f, const Vec& x, const Vec& pair, const FdOptions& fd = {});

/// Block-operator inverse of Ξ.
Vec xi_inverse(const GraphOperators& ops, const Vec& pair);
Vec xi_inverse(const SmoothMap& f, const Vec& x, const Vec& pair, const FdOptions& fd = {});

/// Ξ_N(Y) = (-df† Y, Y).
Vec xi_normal(const GraphOperators& ops, const Vec& y);

/// Orthogonal projection of T(M×N) onto the normal space of Γ_f.
Vec normal_projection_graph(const GraphOperators& ops, const Vec& pair);
Vec normal_projection_graph(const SmoothMap& f, const Vec& x, const Vec& pair,
                            const FdOptions& fd = {});

/// d²f(X, X') with the extension y -> P_M(y) X'.
Vec d2f(const SmoothMap& f, const Vec& x, const Vec& a, const Vec& b, const FdOptions& fd = {});

/// II of Γ_f: Ξ_N O d²f(X, X').
Vec graph_second_fundamental_form(const SmoothMap& f, const Vec& x, const Vec& a, const Vec& b,
                                  const FdOptions& fd = {});

/// Γ_f as an embedded manifold of the product ambient space.
EmbeddedManifold graph_manifold(const SmoothMap& f, const FdOptions& fd = {});

}  // namespace sublab
