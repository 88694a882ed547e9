#include "sublab/obstruction.hpp"

#include "sublab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sublab {

namespace {

constexpr double kKernelResidual = 1e-8;

std::string not_in_kernel_message(double residual) {
  std::ostringstream os;
  os << "vector is not in ker df (|df X| = " << residual << ")";
  return os.str();
}

void require_in_kernel(const Mat& df_ambient, const Vec& x_vec) {
  const double residual = (df_ambient * x_vec).norm();
  if (residual > kKernelResidual * std::max(1.0, x_vec.norm())) throw NotInKernel(residual);
}

Mat df_on_bases(const SmoothMap& f, const Vec& x, const Mat& bm, const FdOptions& fd) {
  const Mat bn = tangent_basis(f.target, f.ambient_map(x));
  return bn.transpose() * tangent_jacobian(f, x, fd) * bm;
}

/// Orthogonal projector onto ker df_y inside the ambient space of M.
Mat kernel_projector(const SmoothMap& f, const Vec& y, const FdOptions& fd, double rel_tol) {
  const Mat bm = tangent_basis(f.source, y);
  const Mat rows = bm * rowspace(df_on_bases(f, y, bm, fd), rel_tol);
  return bm * bm.transpose() - rows * rows.transpose();
}

Vec gaussian(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Vec g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = normal(rng);
  return g;
}

Vec unit_in_span(const Mat& basis, std::mt19937_64& rng) {
  Vec v = basis * gaussian(rng, basis.cols());
  const double n = v.norm();
  return n > 0.0 ? Vec(v / n) : v;
}

// O d²f(X,X) lifted horizontally at p.
Vec lifted_shape(const PullbackLocal& local, const Vec& x_vec) {
  const auto& pb = local.bundle();
  const Vec d2 = d2f(pb.map(), local.x(), x_vec, x_vec, pb.fd());
  return local.a_table().frame().lift * (local.graph().o_ambient() * d2);
}

}  // namespace

NotInKernel::NotInKernel(double residual)
    : GeometryError(not_in_kernel_message(residual)), residual_(residual) {}

KernelSplit kernel_split(const SmoothMap& f, const Vec& x, const FdOptions& fd,
                         const KernelOptions& options) {
  const Mat bm = tangent_basis(f.source, x);
  const auto svd = full_svd(df_on_bases(f, x, bm, fd));
  KernelSplit out;
  out.singular_values = svd.singular_values;
  const double top = svd.singular_values.size() ? svd.singular_values.maxCoeff() : 0.0;
  out.rank = numerical_rank(svd.singular_values, options.rank_rel_tol, options.zero_abs_tol);
  if (top > options.zero_abs_tol) {
    for (Eigen::Index i = 0; i < svd.singular_values.size(); ++i) {
      const double s = svd.singular_values(i);
      if (s > options.zero_rel_tol * top && s <= options.regular_rel_tol * top) {
        out.numerically_singular = true;
      }
    }
  }
  out.complement = bm * svd.right.leftCols(out.rank);
  out.kernel = bm * svd.right.rightCols(bm.cols() - out.rank);
  return out;
}

Vec obstruction_vector(const PullbackLocal& local, const Vec& x_vec, const Vec& z_vec) {
  const Mat df = local.graph().df_ambient();
  require_in_kernel(df, x_vec);
  const Mat& lift = local.a_table().frame().lift;
  return local.a_table().apply(lifted_shape(local, x_vec), lift * (df * z_vec));
}

Mat obstruction_matrix(const PullbackLocal& local, const Vec& x_vec, const Mat& complement) {
  const Mat df = local.graph().df_ambient();
  require_in_kernel(df, x_vec);
  const auto& table = local.a_table();
  const Mat& lift = table.frame().lift;
  const Mat& vertical = table.frame().vertical;
  const Vec shape = lifted_shape(local, x_vec);
  Mat out(vertical.cols(), complement.cols());
  for (Eigen::Index j = 0; j < complement.cols(); ++j) {
    out.col(j) = vertical.transpose() * table.apply(shape, lift * (df * complement.col(j)));
  }
  return out;
}

double vertizontal_flat_check(const PullbackBundle& bundle, const Vec& point, const Vec& x_vec,
                              const Vec& u_vec) {
  const Mat df = tangent_jacobian(bundle.map(), bundle.x_part(point), bundle.fd());
  require_in_kernel(df, x_vec);
  const Vec xt = join(x_vec, Vec::Zero(bundle.total_ambient()));
  const Vec ut = join(Vec::Zero(bundle.source_ambient()), u_vec);
  return std::abs(bundle.direct_curvature(point, ut, xt, xt, ut));
}

CrossTerm cross_term_check(const PullbackBundle& bundle, const Vec& point, const Vec& x_vec,
                           const Vec& u_vec, const Vec& z_vec) {
  const auto local = bundle.local(point);
  const Mat df = local.graph().df_ambient();
  require_in_kernel(df, x_vec);
  const Vec xt = join(x_vec, Vec::Zero(bundle.total_ambient()));
  const Vec ut = join(Vec::Zero(bundle.source_ambient()), u_vec);
  const Vec zt = local.horizontal_lift(z_vec);
  CrossTerm out;
  out.direct = bundle.direct_curvature(point, ut, xt, xt, zt);
  const Vec lifted_z = local.a_table().frame().lift * (df * z_vec);
  out.formula = -local.a_table().apply(lifted_z, lifted_shape(local, x_vec)).dot(u_vec);
  return out;
}

double certificate_step(double cross_term, double r_xz) {
  const double sign = cross_term < 0.0 ? -1.0 : 1.0;
  return -sign * (r_xz + 1.0) / (2.0 * std::abs(cross_term));
}

std::optional<NegativePlaneCertificate> negative_plane_finder(const PullbackBundle& bundle,
                                                               const Vec& point,
                                                               const Vec& x_vec,
                                                               const CertificateOptions& options) {
  const auto local = bundle.local(point);
  const Vec x_unit = x_vec / x_vec.norm();
  const auto split = kernel_split(bundle.map(), local.x(), bundle.fd());
  if (split.complement.cols() == 0) return std::nullopt;
  const Mat obstruction = obstruction_matrix(local, x_unit, split.complement);
  if (obstruction.size() == 0) return std::nullopt;
  const auto svd = full_svd(obstruction);
  if (!(svd.singular_values(0) > 0.0)) return std::nullopt;

  NegativePlaneCertificate cert;
  cert.point = point;
  cert.z_vec = split.complement * svd.right.col(0);
  const Vec o = obstruction_vector(local, x_unit, cert.z_vec);
  cert.u_vec = o / o.norm();

  cert.x_tilde = join(x_unit, Vec::Zero(bundle.total_ambient()));
  const Vec ut = join(Vec::Zero(bundle.source_ambient()), cert.u_vec);
  const Vec zt = local.horizontal_lift(cert.z_vec);
  const Vec& xt = cert.x_tilde;
  cert.r_xu = local.curvature(xt, ut, ut, xt);
  cert.cross_term = local.curvature(xt, ut, zt, xt);
  cert.r_xz = local.curvature(xt, zt, zt, xt);
  if (!(std::abs(cert.cross_term) > options.cross_tolerance)) return std::nullopt;

  cert.t = certificate_step(cert.cross_term, cert.r_xz);
  cert.w_tilde = cert.t * ut + zt;
  cert.quadratic = cert.t * cert.t * cert.r_xu + 2.0 * cert.t * cert.cross_term + cert.r_xz;
  cert.predicted_sec = cert.quadratic / plane_gram(xt, cert.w_tilde);
  cert.sec_value = sectional_curvature(bundle.manifold(), point, xt, cert.w_tilde, bundle.fd());
  cert.relative_agreement =
      std::abs(cert.predicted_sec - cert.sec_value) / std::abs(cert.sec_value);
  if (!(cert.sec_value < -options.sec_tolerance)) return std::nullopt;
  return cert;
}

LevelSetII level_set_II(const SmoothMap& f, const Vec& x, const Vec& x_vec, const FdOptions& fd,
                        const KernelOptions& options) {
  const Mat df = tangent_jacobian(f, x, fd);
  require_in_kernel(df, x_vec);
  const auto split = kernel_split(f, x, fd, options);
  const Vec derivative = fd_derivative(
      [&](double t) -> Vec {
        const Vec y = f.source.retraction(x, t * x_vec);
        return kernel_projector(f, y, fd, options.rank_rel_tol) * x_vec;
      },
      fd);
  LevelSetII out;
  out.value = split.complement * (split.complement.transpose() * derivative);
  out.identity_residual = (d2f(f, x, x_vec, x_vec, fd) + df * out.value).norm();
  return out;
}

XiRank xi_map_rank(const PullbackLocal& local, const Vec& x_vec, double threshold) {
  const auto& pb = local.bundle();
  require_in_kernel(local.graph().df_ambient(), x_vec);
  const auto& table = local.a_table();
  const Mat& lift = table.frame().lift;
  const Mat& vertical = table.frame().vertical;
  const Mat& bn = local.graph().target_basis;
  const Vec shape = lifted_shape(local, x_vec);
  Mat xi(vertical.cols(), bn.cols());
  for (Eigen::Index j = 0; j < bn.cols(); ++j) {
    xi.col(j) = vertical.transpose() * table.apply(shape, lift * bn.col(j));
  }
  XiRank out;
  out.singular_values = full_svd(xi).singular_values;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values(i) > threshold) ++out.rank;
  }
  out.d2f_norm = d2f(pb.map(), local.x(), x_vec, x_vec, pb.fd()).norm();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Squared singular value number `index` of df at y (0 when out of range).
double singular_value_sq(const SmoothMap& f, const Vec& y, int index, const FdOptions& fd) {
  const Mat bm = tangent_basis(f.source, y);
  const Vec sv = full_svd(df_on_bases(f, y, bm, fd)).singular_values;
  if (index >= sv.size()) return 0.0;
  return sv(index) * sv(index);
}

// Armijo descent of sigma_index^2 on M from y.
Vec descend_singular_value(const SmoothMap& f, Vec y, int index, const FdOptions& fd) {
  const auto phi = [&](const Vec& z) { return singular_value_sq(f, z, index, fd); };
  double value = phi(y);
  for (int iter = 0; iter < 200 && value > 1e-24; ++iter) {
    const Mat bm = tangent_basis(f.source, y);
    Vec grad = Vec::Zero(y.size());
    for (Eigen::Index i = 0; i < bm.cols(); ++i) {
      const Vec dir = bm.col(i);
      const Vec d = fd_derivative(
          [&](double t) -> Vec { return Vec::Constant(1, phi(f.source.retraction(y, t * dir))); },
          fd);
      grad += d(0) * dir;
    }
    const double g2 = grad.squaredNorm();
    if (!(g2 > 1e-30)) break;
    double alpha = 1.0;
    Vec next = f.source.retraction(y, -alpha * grad);
    double next_value = phi(next);
    while (next_value > value - 1e-4 * alpha * g2 && alpha > 1e-12) {
      alpha *= 0.5;
      next = f.source.retraction(y, -alpha * grad);
      next_value = phi(next);
    }
    if (!(next_value < value)) break;
    y = next;
    value = next_value;
  }
  return y;
}

}  // namespace

RankProfile rank_profile(const SmoothMap& f, const RankProfileOptions& options,
                         const FdOptions& fd, const KernelOptions& kernel) {
  struct Sample {
    Vec point;
    KernelSplit split;
  };
  auto results = map_samples<Sample>(
      options.samples, options.seed,
      [&](int, std::mt19937_64& rng) {
        Sample s;
        s.point = random_point(f.source, rng);
        s.split = kernel_split(f, s.point, fd, kernel);
        return s;
      },
      execution_for(options.parallel));

  RankProfile out;
  out.samples = options.samples;
  if (results.empty()) return out;
  out.min_rank = std::numeric_limits<int>::max();
  for (const auto& s : results) {
    ++out.histogram[s.split.rank];
    out.min_rank = std::min(out.min_rank, s.split.rank);
    out.max_rank = std::max(out.max_rank, s.split.rank);
  }
  const int top = out.max_rank - 1;
  auto weakest = [&](const Sample& s) {
    return top >= 0 && top < s.split.singular_values.size() ? s.split.singular_values(top) : 0.0;
  };
  std::vector<int> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return weakest(results[a]) < weakest(results[b]); });

  if (options.refine && top >= 0) {
    const Vec start = results[order.front()].point;
    const Vec refined = descend_singular_value(f, start, top, fd);
    const auto split = kernel_split(f, refined, fd, kernel);
    if (split.rank < out.max_rank) {
      out.witnesses.push_back({refined, split.singular_values, split.rank, true});
      out.min_rank = std::min(out.min_rank, split.rank);
    }
  }
  for (int idx : order) {
    if (static_cast<int>(out.witnesses.size()) >= options.max_witnesses) break;
    const auto& s = results[idx];
    if (s.split.rank < out.max_rank || s.split.numerically_singular) {
      out.witnesses.push_back({s.point, s.split.singular_values, s.split.rank, false});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::consistent: return "CONSISTENT";
    case Verdict::violated: return "VIOLATED";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

ObstructionReport theorem_report(const PullbackBundle& bundle, const TheoremOptions& options) {
  const auto& tol = options.tolerances;
  ObstructionReport report;
  report.metric = reduce_connection_metric(bundle.map(), {}, options.epsilon, options.samples,
                                           options.seed, bundle.fd(), options.parallel);
  FatnessOptions fat_options;
  fat_options.points = options.samples;
  fat_options.seed = options.seed;
  fat_options.fat_tolerance = tol.fat;
  fat_options.parallel = options.parallel;
  report.fatness = fatness(bundle.submersion(), fat_options, bundle.fd());

  struct Sample {
    ObstructionSample record;
    int xi_failures = 0;
    int geodesic_failures = 0;
  };
  const bool fat = report.fatness.fat;
  auto results = map_samples<Sample>(
      options.samples, options.seed,
      [&](int index, std::mt19937_64& rng) {
        Sample out;
        auto& s = out.record;
        s.index = index;
        s.point = bundle.random_point(rng);
        const Vec x = bundle.x_part(s.point);
        const auto split = kernel_split(bundle.map(), x, bundle.fd());
        s.df_rank = split.rank;
        s.numerically_singular = split.numerically_singular;
        if (s.numerically_singular || split.kernel.cols() == 0) return out;

        const auto local = bundle.local(s.point);
        const int fiber_dim = local.a_table().vertical_dim();
        double best = -1.0;
        for (int k = 0; k < options.kernel_directions; ++k) {
          const Vec x_vec = unit_in_span(split.kernel, rng);
          const Mat obstruction = obstruction_matrix(local, x_vec, split.complement);
          const double norm = max_singular_value(obstruction);
          const auto level = level_set_II(bundle.map(), x, x_vec, bundle.fd());
          const double level_norm = level.value.norm();
          const auto xi = xi_map_rank(local, x_vec, tol.xi_rank);
          s.level_set_II_norm = std::max(s.level_set_II_norm, level_norm);
          s.level_set_identity_residual =
              std::max(s.level_set_identity_residual, level.identity_residual);
          if (fat && ((xi.rank == fiber_dim) != (xi.d2f_norm > tol.xi_rank))) ++out.xi_failures;
          if (level_norm <= 1e-8 && norm > tol.obstruction) ++out.geodesic_failures;
          if (norm > best) {
            best = norm;
            s.x_vec = x_vec;
            s.obstruction_norm = norm;
            s.xi_rank = xi.rank;
            s.d2f_norm = xi.d2f_norm;
          }
        }
        const Vec u_vec = unit_in_span(local.a_table().frame().vertical, rng);
        s.r1_residual = vertizontal_flat_check(bundle, s.point, s.x_vec, u_vec);
        const Vec z_vec = split.complement.cols() > 0 ? unit_in_span(split.complement, rng)
                                                      : Vec(Vec::Zero(x.size()));
        s.r2 = cross_term_check(bundle, s.point, s.x_vec, u_vec, z_vec);
        return out;
      },
      execution_for(options.parallel));

  for (auto& r : results) {
    const auto& s = r.record;
    report.xi_biconditional_failures += r.xi_failures;
    report.geodesic_without_obstruction_failures += r.geodesic_failures;
    if (s.numerically_singular) {
      ++report.singular_samples;
    } else {
      ++report.regular_samples;
      if (report.worst_sample < 0 || s.obstruction_norm > report.max_obstruction) {
        report.worst_sample = s.index;
      }
      report.max_obstruction = std::max(report.max_obstruction, s.obstruction_norm);
      report.max_level_set_II = std::max(report.max_level_set_II, s.level_set_II_norm);
      report.max_level_set_identity_residual =
          std::max(report.max_level_set_identity_residual, s.level_set_identity_residual);
      report.max_r1 = std::max(report.max_r1, s.r1_residual);
      report.max_r2 = std::max(report.max_r2, std::abs(s.r2.direct - s.r2.formula));
    }
    report.samples.push_back(std::move(r.record));
  }

  if (report.max_obstruction <= tol.obstruction) {
    report.verdict = Verdict::consistent;
    return report;
  }
  std::vector<int> order;
  for (const auto& s : report.samples) {
    if (!s.numerically_singular && s.obstruction_norm > tol.obstruction) order.push_back(s.index);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return report.samples[a].obstruction_norm > report.samples[b].obstruction_norm;
  });
  CertificateOptions cert_options{tol.cross, tol.certificate_sec};
  const int attempts = std::min<int>(options.certificate_attempts, static_cast<int>(order.size()));
  for (int i = 0; i < attempts && !report.certificate; ++i) {
    const auto& s = report.samples[order[i]];
    report.certificate = negative_plane_finder(bundle, s.point, s.x_vec, cert_options);
  }
  report.verdict = report.certificate ? Verdict::violated : Verdict::inconclusive;
  return report;
}

}  // namespace sublab
