/**
 * @file submersion.hpp
 * @brief Riemannian submersions with totally geodesic fibers.
 *
 * Vertical spaces are kernels of dπ, horizontal spaces their orthogonal
 * complements in T_pP. The integrability tensor
 *
 *     A(X, Y) = 1/2 pr_V [pr_H X̄, pr_H Ȳ]
 *
 * is computed from brackets of basic fields: a base vector w is extended to
 * the field n -> P_N(n) w on the base and lifted horizontally at every
 * point. A†, the g_P-dual of A in its second slot, satisfies
 * <A†_X U, Y> = <U, A(X, Y)>.
 */
#pragma once

#include "sublab/smooth_map.hpp"

#include <cstdint>
#include <optional>

namespace sublab {

struct RiemannianSubmersion {
  using FiberPoint = std::function<Vec(const Vec&)>;
  using FiberProject = std::function<Vec(const Vec&, const Vec&)>;

  std::string name;
  EmbeddedManifold total;
  EmbeddedManifold base;
  SmoothMap projection;
  int fiber_dim = 0;
  /// A point p with π(p) = n.
  FiberPoint fiber_point;
  /// Nearest point to p̃ on the fiber over n.
  FiberProject fiber_project;

  Vec project(const Vec& p) const { return projection.ambient_map(p); }
};

/// Matrix of dπ_p on orthonormal bases plus the bases themselves.
struct SubmersionFrame {
  Mat total_basis;       ///< ambient(P) x dim P
  Mat base_basis;        ///< ambient(N) x dim N
  Mat dpi;               ///< dim N x dim P in basis coordinates
  Mat horizontal;        ///< ambient(P) x dim N, orthonormal
  Mat vertical;          ///< ambient(P) x fiber_dim, orthonormal
  Mat dpi_ambient;       ///< ambient(N) x ambient(P), tangent inputs only
  Mat lift;              ///< ambient(P) x ambient(N), horizontal lift of tangent inputs
};

/// Throws RankDeficient when rank dπ_p differs from dim N.
SubmersionFrame submersion_frame(const RiemannianSubmersion& bundle, const Vec& p,
                                 const FdOptions& fd = {});

Mat vertical_projector(const RiemannianSubmersion& bundle, const Vec& p, const FdOptions& fd = {});
Mat horizontal_projector(const RiemannianSubmersion& bundle, const Vec& p,
                         const FdOptions& fd = {});

/// The horizontal vector at p mapping to w under dπ.
Vec horizontal_lift(const RiemannianSubmersion& bundle, const Vec& p, const Vec& w,
                    const FdOptions& fd = {});

/// A(X, Y) by a direct bracket of the basic extensions of dπX and dπY.
Vec a_tensor(const RiemannianSubmersion& bundle, const Vec& p, const Vec& x, const Vec& y,
             const FdOptions& fd = {});

/**
 * All values A(h_i, h_j) on the horizontal basis of a point, so that many
 * contractions at the same point cost one set of brackets.
 */
class ATensorTable {
 public:
  ATensorTable(const RiemannianSubmersion& bundle, const Vec& p, const FdOptions& fd = {});

  const SubmersionFrame& frame() const { return frame_; }
  int horizontal_dim() const { return static_cast<int>(frame_.horizontal.cols()); }
  int vertical_dim() const { return static_cast<int>(frame_.vertical.cols()); }

  /// A(X, Y); inputs are reduced to their horizontal parts.
  Vec apply(const Vec& x, const Vec& y) const;
  /// A†_X U = sum_j <U, A(X, h_j)> h_j (X -> pr_H X, U -> pr_V U).
  Vec dagger(const Vec& x, const Vec& u) const;
  /// A_X : H -> V as a (fiber_dim x dim N) matrix on the frame bases.
  Mat a_x_matrix(const Vec& x) const;
  /// Value on basis indices, ambient vertical vector.
  const Vec& basis_value(int i, int j) const { return values_[i * horizontal_dim() + j]; }

 private:
  SubmersionFrame frame_;
  std::vector<Vec> values_;
};

Vec a_dagger(const RiemannianSubmersion& bundle, const Vec& p, const Vec& x, const Vec& u,
             const FdOptions& fd = {});

/// |A†_X U|^2 for unit horizontal X and unit vertical U.
double vertizontal_sec(const RiemannianSubmersion& bundle, const Vec& p, const Vec& x,
                       const Vec& u, const FdOptions& fd = {});

struct FatnessReport {
  double min_singular_value = 0.0;
  double max_singular_value = 0.0;
  Vec worst_point;
  Vec worst_direction;
  bool fat = false;
  int points = 0;
  int directions = 0;
};

struct FatnessOptions {
  int points = 200;
  int directions = 50;
  std::uint64_t seed = 0;
  double fat_tolerance = 1e-3;
  bool parallel = true;
};

/// Smallest singular value of A_X : H -> V over sampled points and unit X.
FatnessReport fatness(const RiemannianSubmersion& bundle, const FatnessOptions& options,
                      const FdOptions& fd = {});

/// II of the fiber through p, evaluated on vertical vectors.
Vec fiber_second_fundamental_form(const RiemannianSubmersion& bundle, const Vec& p, const Vec& u,
                                  const Vec& v, const FdOptions& fd = {});

struct FiberGeodesyReport {
  double max_norm = 0.0;
  Vec worst_point;
};

/// Max |II_fiber(u_i, u_j)| over sampled points and vertical basis pairs.
FiberGeodesyReport totally_geodesic_fibers_check(const RiemannianSubmersion& bundle, int samples,
                                                 std::uint64_t seed, const FdOptions& fd = {},
                                                 bool parallel = true);

}  // namespace sublab
