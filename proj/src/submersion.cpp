#include "sublab/submersion.hpp"

#include "sublab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sublab {

SubmersionFrame submersion_frame(const RiemannianSubmersion& bundle, const Vec& p,
                                 const FdOptions& fd) {
  SubmersionFrame f;
  const Vec n = bundle.project(p);
  f.total_basis = tangent_basis(bundle.total, p);
  f.base_basis = tangent_basis(bundle.base, n);
  f.dpi_ambient = tangent_jacobian(bundle.projection, p, fd);
  f.dpi = f.base_basis.transpose() * f.dpi_ambient * f.total_basis;

  const auto svd = full_svd(f.dpi);
  const int rank = numerical_rank(svd.singular_values, 1e-8, 1e-300);
  const int base_dim = bundle.base.intrinsic_dim;
  if (rank != base_dim) throw RankDeficient("dπ of " + bundle.name, base_dim, rank);
  const int fiber = static_cast<int>(f.dpi.cols()) - rank;
  if (fiber != bundle.fiber_dim) throw RankDeficient("vertical space of " + bundle.name,
                                                     bundle.fiber_dim, fiber);

  f.horizontal = f.total_basis * svd.right.leftCols(rank);
  f.vertical = f.total_basis * svd.right.rightCols(fiber);
  // pseudo-inverse of dπ on the bases; its range is the horizontal space
  Mat pinv = Mat::Zero(f.dpi.cols(), f.dpi.rows());
  for (int i = 0; i < rank; ++i) {
    pinv += svd.right.col(i) * svd.left.col(i).transpose() / svd.singular_values(i);
  }
  f.lift = f.total_basis * pinv * f.base_basis.transpose();
  return f;
}

Mat vertical_projector(const RiemannianSubmersion& bundle, const Vec& p, const FdOptions& fd) {
  require_on_manifold(bundle.total, p);
  const auto f = submersion_frame(bundle, p, fd);
  return f.vertical * f.vertical.transpose();
}

Mat horizontal_projector(const RiemannianSubmersion& bundle, const Vec& p, const FdOptions& fd) {
  require_on_manifold(bundle.total, p);
  const auto f = submersion_frame(bundle, p, fd);
  return f.horizontal * f.horizontal.transpose();
}

Vec horizontal_lift(const RiemannianSubmersion& bundle, const Vec& p, const Vec& w,
                    const FdOptions& fd) {
  return submersion_frame(bundle, p, fd).lift * w;
}

namespace {

/// Columns are the basic fields of the given base vectors, evaluated at q.
Mat basic_fields(const RiemannianSubmersion& bundle, const Vec& q, const Mat& base_vectors,
                 const FdOptions& fd) {
  const auto f = submersion_frame(bundle, q, fd);
  const Mat pn = bundle.base.projector(bundle.project(q));
  return f.lift * (pn * base_vectors);
}

/// d/dt of the basic fields along the retraction curve through p in direction dir.
Mat basic_field_derivative(const RiemannianSubmersion& bundle, const Vec& p, const Vec& dir,
                           const Mat& base_vectors, const FdOptions& fd) {
  return fd_derivative(
      [&](double t) { return basic_fields(bundle, bundle.total.retraction(p, t * dir), base_vectors, fd); },
      fd);
}

}  // namespace

Vec a_tensor(const RiemannianSubmersion& bundle, const Vec& p, const Vec& x, const Vec& y,
             const FdOptions& fd) {
  require_on_manifold(bundle.total, p);
  const auto f = submersion_frame(bundle, p, fd);
  const Vec wx = f.dpi_ambient * x;
  const Vec wy = f.dpi_ambient * y;
  const Vec xh = f.lift * wx;
  const Vec yh = f.lift * wy;
  const Vec dy_along_x = basic_field_derivative(bundle, p, xh, wy, fd).col(0);
  const Vec dx_along_y = basic_field_derivative(bundle, p, yh, wx, fd).col(0);
  return 0.5 * f.vertical * (f.vertical.transpose() * (dy_along_x - dx_along_y));
}

ATensorTable::ATensorTable(const RiemannianSubmersion& bundle, const Vec& p, const FdOptions& fd)
    : frame_(submersion_frame(bundle, p, fd)) {
  const int n = horizontal_dim();
  const Mat base_vectors = frame_.dpi_ambient * frame_.horizontal;
  // derivative[i].col(j) = D(basic field of h_j)[h_i]
  std::vector<Mat> derivative(n);
  for (int i = 0; i < n; ++i) {
    derivative[i] = basic_field_derivative(bundle, p, frame_.horizontal.col(i), base_vectors, fd);
  }
  values_.assign(static_cast<std::size_t>(n) * n, Vec::Zero(bundle.total.ambient_dim));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec bracket = derivative[i].col(j) - derivative[j].col(i);
      const Vec a = 0.5 * frame_.vertical * (frame_.vertical.transpose() * bracket);
      values_[i * n + j] = a;
      values_[j * n + i] = -a;
    }
  }
}

Vec ATensorTable::apply(const Vec& x, const Vec& y) const {
  const int n = horizontal_dim();
  const Vec cx = frame_.horizontal.transpose() * x;
  const Vec cy = frame_.horizontal.transpose() * y;
  Vec out = Vec::Zero(frame_.total_basis.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) out += cx(i) * cy(j) * values_[i * n + j];
    }
  }
  return out;
}

Mat ATensorTable::a_x_matrix(const Vec& x) const {
  const int n = horizontal_dim();
  const Vec cx = frame_.horizontal.transpose() * x;
  Mat m = Mat::Zero(vertical_dim(), n);
  for (int j = 0; j < n; ++j) {
    Vec col = Vec::Zero(frame_.total_basis.rows());
    for (int i = 0; i < n; ++i) {
      if (i != j) col += cx(i) * values_[i * n + j];
    }
    m.col(j) = frame_.vertical.transpose() * col;
  }
  return m;
}

Vec ATensorTable::dagger(const Vec& x, const Vec& u) const {
  const Vec uv = frame_.vertical.transpose() * u;
  // A_X as a map H -> V in basis coordinates; A† is its transpose.
  return frame_.horizontal * (a_x_matrix(x).transpose() * uv);
}

Vec a_dagger(const RiemannianSubmersion& bundle, const Vec& p, const Vec& x, const Vec& u,
             const FdOptions& fd) {
  require_on_manifold(bundle.total, p);
  return ATensorTable(bundle, p, fd).dagger(x, u);
}

double vertizontal_sec(const RiemannianSubmersion& bundle, const Vec& p, const Vec& x,
                       const Vec& u, const FdOptions& fd) {
  return a_dagger(bundle, p, x, u, fd).squaredNorm();
}

namespace {

Vec unit_gaussian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

struct FatnessSample {
  double min_sv = std::numeric_limits<double>::infinity();
  double max_sv = 0.0;
  Vec point;
  Vec direction;
};

}  // namespace

FatnessReport fatness(const RiemannianSubmersion& bundle, const FatnessOptions& options,
                      const FdOptions& fd) {
  auto samples = map_samples<FatnessSample>(
      options.points, options.seed,
      [&](int, std::mt19937_64& rng) {
        FatnessSample s;
        s.point = random_point(bundle.total, rng);
        const ATensorTable table(bundle, s.point, fd);
        const int n = table.horizontal_dim();
        for (int d = 0; d < options.directions; ++d) {
          const Vec x = table.frame().horizontal * unit_gaussian(n, rng);
          const Mat ax = table.a_x_matrix(x);
          double lo = 0.0;
          double hi = 0.0;
          if (ax.size() > 0) {
            Eigen::JacobiSVD<Mat> svd(ax);
            const auto& sv = svd.singularValues();
            lo = sv(sv.size() - 1);
            hi = sv(0);
          }
          if (lo < s.min_sv) {
            s.min_sv = lo;
            s.direction = x;
          }
          s.max_sv = std::max(s.max_sv, hi);
        }
        return s;
      },
      execution_for(options.parallel));

  FatnessReport report;
  report.points = options.points;
  report.directions = options.directions;
  report.min_singular_value = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (s.min_sv < report.min_singular_value) {
      report.min_singular_value = s.min_sv;
      report.worst_point = s.point;
      report.worst_direction = s.direction;
    }
    report.max_singular_value = std::max(report.max_singular_value, s.max_sv);
  }
  if (samples.empty()) report.min_singular_value = 0.0;
  report.fat = report.min_singular_value > options.fat_tolerance;
  return report;
}

Vec fiber_second_fundamental_form(const RiemannianSubmersion& bundle, const Vec& p, const Vec& u,
                                  const Vec& v, const FdOptions& fd) {
  const auto f = submersion_frame(bundle, p, fd);
  const Vec derivative = fd_derivative(
      [&](double t) -> Vec {
        const auto g = submersion_frame(bundle, bundle.total.retraction(p, t * u), fd);
        return g.vertical * (g.vertical.transpose() * v);
      },
      fd);
  return f.horizontal * (f.horizontal.transpose() * derivative);
}

FiberGeodesyReport totally_geodesic_fibers_check(const RiemannianSubmersion& bundle, int samples,
                                                 std::uint64_t seed, const FdOptions& fd,
                                                 bool parallel) {
  struct Sample {
    double norm = 0.0;
    Vec point;
  };
  auto results = map_samples<Sample>(
      samples, seed,
      [&](int, std::mt19937_64& rng) {
        Sample s;
        s.point = random_point(bundle.total, rng);
        const auto f = submersion_frame(bundle, s.point, fd);
        for (Eigen::Index i = 0; i < f.vertical.cols(); ++i) {
          for (Eigen::Index j = i; j < f.vertical.cols(); ++j) {
            const double n = fiber_second_fundamental_form(bundle, s.point, f.vertical.col(i),
                                                           f.vertical.col(j), fd)
                                 .norm();
            s.norm = std::max(s.norm, n);
          }
        }
        return s;
      },
      execution_for(parallel));
  FiberGeodesyReport report;
  for (const auto& s : results) {
    if (s.norm >= report.max_norm) {
      if (s.norm > report.max_norm || report.worst_point.size() == 0) report.worst_point = s.point;
      report.max_norm = s.norm;
    }
  }
  return report;
}

}  // namespace sublab
