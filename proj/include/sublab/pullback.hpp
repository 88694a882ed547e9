/**
 * @file pullback.hpp
 * @brief The pull-back bundle f*P = {(x, p) : f(x) = π(p)} inside M×P.
 *
 * f*P is handled as an embedded manifold of the concatenated ambient space
 * of M and P, so the generic calculus of core_geometry gives an independent
 * route to its second fundamental form and curvature. The closed forms
 * (second fundamental form through Ξ_N O(d²f + Λ), curvature through the
 * Gauss formula over M×P) are implemented next to it so the two routes can
 * be compared.
 */
#pragma once

#include "sublab/graph_geometry.hpp"
#include "sublab/submersion.hpp"

#include <cstdint>
#include <memory>

namespace sublab {

/// Positivity of the reduced metric failed.
class InadmissibleEpsilon : public GeometryError {
 public:
  InadmissibleEpsilon(double epsilon, double min_eigenvalue, double max_epsilon);
  double epsilon() const { return epsilon_; }
  double min_eigenvalue() const { return min_eigenvalue_; }
  double max_epsilon() const { return max_epsilon_; }

 private:
  double epsilon_;
  double min_eigenvalue_;
  double max_epsilon_;
};

class PullbackBundle;

/**
 * Everything the closed-form expressions need at one point of f*P: graph
 * operators of f at x and the A-tensor table of π at p.
 */
class PullbackLocal {
 public:
  PullbackLocal(const PullbackBundle& bundle, const Vec& point);

  const PullbackBundle& bundle() const { return *bundle_; }
  const Vec& point() const { return point_; }
  const Vec& x() const { return x_; }
  const Vec& p() const { return p_; }
  const GraphOperators& graph() const { return graph_; }
  const ATensorTable& a_table() const { return table_; }

  /// Λ(Y, Y') = -dπ(A†_{pr_H Y'} pr_V Y + A†_{pr_H Y} pr_V Y').
  Vec lambda(const Vec& y, const Vec& y2) const;
  /// d²f(X, X') + Λ(Y, Y') for tangent vectors (X, Y), (X', Y') of f*P.
  Vec shape_term(const Vec& a, const Vec& b) const;
  /// dπ̃ II(Ã, B̃) = Ξ_N O (d²f(X, X') + Λ(Y, Y')).
  Vec second_fundamental_form(const Vec& a, const Vec& b) const;
  /// R_M + R_P + <O S(A,D), S(B,C)> - <O S(A,C), S(B,D)>.
  double curvature(const Vec& a, const Vec& b, const Vec& c, const Vec& d) const;
  /// (X, 𝓛_p df X).
  Vec horizontal_lift(const Vec& x_vec) const;
  /// (X, E) -> (X, dπ E) as an ambient vector of M×N.
  Vec push_forward(const Vec& v) const;

 private:
  const PullbackBundle* bundle_;
  Vec point_;
  Vec x_;
  Vec p_;
  GraphOperators graph_;
  ATensorTable table_;
};

class PullbackBundle {
 public:
  PullbackBundle(SmoothMap f, RiemannianSubmersion bundle, FdOptions fd = {});

  const SmoothMap& map() const { return map_; }
  const RiemannianSubmersion& submersion() const { return bundle_; }
  const EmbeddedManifold& manifold() const { return manifold_; }
  const FdOptions& fd() const { return fd_; }

  int source_ambient() const { return map_.source.ambient_dim; }
  int total_ambient() const { return bundle_.total.ambient_dim; }
  int dim() const { return map_.source.intrinsic_dim + bundle_.fiber_dim; }

  Vec point(const Vec& x, const Vec& p) const { return join(x, p); }
  Vec x_part(const Vec& v) const { return v.head(source_ambient()); }
  Vec p_part(const Vec& v) const { return v.tail(total_ambient()); }

  /// |f(x) - π(p)|.
  double membership_residual(const Vec& point) const;

  /// Orthonormal basis of {(X, E) : df X = dπ E}.
  Mat tangent_basis(const Vec& point) const;

  /// Random point: x on M, then the nearest fiber point over f(x).
  Vec random_point(std::mt19937_64& rng) const;

  PullbackLocal local(const Vec& point) const { return PullbackLocal(*this, point); }

  /// Ambient II of f*P, restricted to T(M×P) and pushed forward by dπ̃.
  Vec direct_second_fundamental_form(const Vec& point, const Vec& a, const Vec& b) const;

  /// Gauss-equation curvature of f*P in the flat ambient space.
  double direct_curvature(const Vec& point, const Vec& a, const Vec& b, const Vec& c,
                          const Vec& d) const;

  /// Projector onto T_xM × T_pP.
  Mat product_projector(const Vec& point) const;

 private:
  SmoothMap map_;
  RiemannianSubmersion bundle_;
  FdOptions fd_;
  EmbeddedManifold manifold_;
};

Vec pullback_horizontal_lift(const PullbackBundle& bundle, const Vec& point, const Vec& x_vec);

Vec lambda_term(const RiemannianSubmersion& bundle, const Vec& p, const Vec& y, const Vec& y2,
                const FdOptions& fd = {});
Vec lambda_term(const ATensorTable& table, const Vec& y, const Vec& y2);

struct SubmersionCheckReport {
  double horizontal_isometry = 0.0;  ///< max ||dπ̃ X̃| - |X̃||
  double normal_isometry = 0.0;      ///< max |<n1,n2> - <dπ̃ n1, dπ̃ n2>|
  double normal_to_graph = 0.0;      ///< max component of dπ̃ n along TΓ_f
  int samples = 0;
};

/// Samples horizontal vectors and normal pairs of f*P.
SubmersionCheckReport pullback_submersion_check(const PullbackBundle& bundle, int samples,
                                                std::uint64_t seed, bool parallel = true);

struct MetricReduction {
  Mat reduced;                          ///< operator of g_M' on T_xM (ambient)
  double min_eigenvalue = 0.0;          ///< of g_M' relative to g_M
  double max_epsilon = 0.0;             ///< 1 / max eigenvalue of df† df
  double reconstruction_residual = 0.0; ///< max |g_M' + ε f*g_N - g_M| on basis pairs
  double level_set_residual = 0.0;      ///< max |g_M'(X,Z) - g_M(X,Z)|, X in ker df
};

/**
 * g_M' = g_M - ε f*g_N, i.e. the operator (1 - ε df† df) against g_M.
 * Throws InadmissibleEpsilon when g_M' is not positive definite.
 */
MetricReduction reduce_connection_metric(const SmoothMap& f, const MetricOperatorField& metric,
                                         double epsilon, const Vec& x, const FdOptions& fd = {});

struct SampledMetricReduction {
  double min_eigenvalue = 0.0;
  double max_epsilon = 0.0;
  double reconstruction_residual = 0.0;
  double level_set_residual = 0.0;
  Vec worst_point;
  int samples = 0;
};

/// Sampled version; the admissible bound is the minimum over samples.
SampledMetricReduction reduce_connection_metric(const SmoothMap& f,
                                                const MetricOperatorField& metric,
                                                double epsilon, int samples, std::uint64_t seed,
                                                const FdOptions& fd = {}, bool parallel = true);

}  // namespace sublab
