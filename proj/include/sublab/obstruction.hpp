/**
 * @file obstruction.hpp
 * @brief Curvature obstruction on pull-back bundles and negative-plane certificates.
 *
 * For X in ker df_x the vertical vector A(𝓛 O d²f(X,X), 𝓛 df Z) must vanish
 * for every Z whenever f*P is non-negatively curved. Otherwise the cross
 * term c = R(X̃, Ũ, Z̃, X̃) is nonzero while R(X̃, Ũ, Ũ, X̃) = 0, and the
 * plane span(X̃, tŨ + Z̃) is negatively curved for a suitable t.
 *
 * Conventions: X̃ = (X, 0), Ũ = (0, U) with U vertical, Z̃ = (Z, 𝓛 df Z).
 */
#pragma once

#include "sublab/pullback.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sublab {

class NotInKernel : public GeometryError {
 public:
  explicit NotInKernel(double residual);
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// ker df_x and its orthogonal complement in T_xM, from an SVD of df.
struct KernelSplit {
  Mat kernel;           ///< ambient(M) x (dim M - rank), orthonormal
  Mat complement;       ///< ambient(M) x rank, orthonormal
  Vec singular_values;  ///< of df on orthonormal bases, descending
  int rank = 0;
  /// Some singular value sits in the band between "zero" and "clearly nonzero".
  bool numerically_singular = false;
};

struct KernelOptions {
  double rank_rel_tol = 1e-6;    ///< kernel threshold relative to the largest singular value
  double regular_rel_tol = 1e-3; ///< singular values in (zero_rel_tol, regular_rel_tol] are suspicious
  double zero_rel_tol = 1e-8;
  double zero_abs_tol = 1e-12;   ///< a map with all singular values below this is constant
};

KernelSplit kernel_split(const SmoothMap& f, const Vec& x, const FdOptions& fd = {},
                         const KernelOptions& options = {});

/// A(𝓛 O d²f(X,X), 𝓛 df Z) as an ambient vertical vector at p.
Vec obstruction_vector(const PullbackLocal& local, const Vec& x_vec, const Vec& z_vec);

/**
 * Matrix of Z -> A(𝓛 O d²f(X,X), 𝓛 df Z) from complement coordinates to
 * vertical-frame coordinates. Its top singular value is the obstruction norm.
 */
Mat obstruction_matrix(const PullbackLocal& local, const Vec& x_vec, const Mat& complement);

/// |R(Ũ, X̃, X̃, Ũ)| computed on f*P directly.
double vertizontal_flat_check(const PullbackBundle& bundle, const Vec& point, const Vec& x_vec,
                              const Vec& u_vec);

struct CrossTerm {
  double direct = 0.0;   ///< R(Ũ, X̃, X̃, Z̃) on f*P
  double formula = 0.0;  ///< -<A(𝓛 df Z, 𝓛 O d²f(X,X)), U>
};

CrossTerm cross_term_check(const PullbackBundle& bundle, const Vec& point, const Vec& x_vec,
                           const Vec& u_vec, const Vec& z_vec);

struct NegativePlaneCertificate {
  Vec point;
  Vec x_tilde;
  Vec w_tilde;  ///< t Ũ + Z̃
  Vec u_vec;
  Vec z_vec;
  double t = 0.0;
  double cross_term = 0.0;   ///< c = R(X̃, Ũ, Z̃, X̃)
  double r_xu = 0.0;         ///< R(X̃, Ũ, Ũ, X̃)
  double r_xz = 0.0;         ///< R(X̃, Z̃, Z̃, X̃)
  double quadratic = 0.0;    ///< t² r_xu + 2 t c + r_xz
  double predicted_sec = 0.0;
  double sec_value = 0.0;    ///< direct Gauss-equation value on f*P
  double relative_agreement = 0.0;
};

struct CertificateOptions {
  double cross_tolerance = 1e-4;
  double sec_tolerance = 1e-6;  ///< certificates need sec_value < -sec_tolerance
};

/// t = -sign(c) (R_Z + 1) / (2|c|), the step that makes the quadratic equal -1.
double certificate_step(double cross_term, double r_xz);

/**
 * Builds and re-verifies a certificate at (point, X). Returns nothing when the
 * cross term is below tolerance or the direct value is not negative.
 */
std::optional<NegativePlaneCertificate> negative_plane_finder(const PullbackBundle& bundle,
                                                               const Vec& point,
                                                               const Vec& x_vec,
                                                               const CertificateOptions& options = {});

struct LevelSetII {
  Vec value;                 ///< pr_{(ker df)^⊥} ∇_X X̄
  double identity_residual;  ///< |d²f(X,X) + df(value)|
};

/// Second fundamental form of the level set through x, with X̄ = pr_{ker df} P_M X.
LevelSetII level_set_II(const SmoothMap& f, const Vec& x, const Vec& x_vec,
                        const FdOptions& fd = {}, const KernelOptions& options = {});

struct XiRank {
  int rank = 0;
  Vec singular_values;
  double d2f_norm = 0.0;
};

/// Rank of Y -> A(𝓛 O d²f(X,X), 𝓛 Y) on T_{f(x)}N (singular values above @p threshold).
XiRank xi_map_rank(const PullbackLocal& local, const Vec& x_vec, double threshold = 1e-6);

struct RankWitness {
  Vec point;
  Vec singular_values;
  int rank = 0;
  bool refined = false;
};

struct RankProfile {
  int min_rank = 0;
  int max_rank = 0;
  std::map<int, int> histogram;
  std::vector<RankWitness> witnesses;  ///< points where the rank drops, lowest first
  int samples = 0;
};

struct RankProfileOptions {
  int samples = 200;
  std::uint64_t seed = 0;
  bool refine = true;  ///< descend the smallest retained singular value from the worst sample
  int max_witnesses = 5;
  bool parallel = true;
};

RankProfile rank_profile(const SmoothMap& f, const RankProfileOptions& options,
                         const FdOptions& fd = {}, const KernelOptions& kernel = {});

struct ObstructionSample {
  int index = 0;
  Vec point;
  Vec x_vec;
  bool numerically_singular = false;
  int df_rank = 0;
  double obstruction_norm = 0.0;
  int xi_rank = 0;
  double d2f_norm = 0.0;
  double level_set_II_norm = 0.0;
  double level_set_identity_residual = 0.0;
  double r1_residual = 0.0;
  CrossTerm r2;
};

struct TheoremTolerances {
  double obstruction = 1e-6;
  double level_set = 1e-6;
  double cross = 1e-4;
  double r1 = 1e-4;
  double r2 = 1e-3;
  double xi_rank = 1e-6;
  double certificate_sec = 1e-6;
  double prediction_agreement = 0.1;
  double level_set_identity = 1e-4;
  double fat = 1e-3;
};

struct TheoremOptions {
  int samples = 200;
  int kernel_directions = 20;
  std::uint64_t seed = 0;
  double epsilon = 0.5;
  TheoremTolerances tolerances;
  bool parallel = true;
  int certificate_attempts = 8;
};

enum class Verdict { consistent, violated, inconclusive };
std::string_view to_string(Verdict verdict);

struct ObstructionReport {
  Verdict verdict = Verdict::consistent;
  FatnessReport fatness;
  SampledMetricReduction metric;
  std::vector<ObstructionSample> samples;
  int regular_samples = 0;
  int singular_samples = 0;
  double max_obstruction = 0.0;
  double max_level_set_II = 0.0;
  double max_level_set_identity_residual = 0.0;
  double max_r1 = 0.0;
  double max_r2 = 0.0;
  int xi_biconditional_failures = 0;
  int geodesic_without_obstruction_failures = 0;
  int worst_sample = -1;
  std::optional<NegativePlaneCertificate> certificate;
};

/// Throws InadmissibleEpsilon when the requested fiber scale is not admissible.
ObstructionReport theorem_report(const PullbackBundle& bundle, const TheoremOptions& options);

}  // namespace sublab
