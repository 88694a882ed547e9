#include "sublab/pullback.hpp"

#include "sublab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sublab {

namespace {

std::string inadmissible_message(double epsilon, double eigenvalue, double max_epsilon) {
  std::ostringstream os;
  os.precision(10);
  os << "epsilon " << epsilon << " is inadmissible: reduced metric has eigenvalue " << eigenvalue
     << " (admissible epsilon < " << max_epsilon << ")";
  return os.str();
}

Mat block_diagonal(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

struct Parts {
  SmoothMap map;
  RiemannianSubmersion bundle;
  FdOptions fd;
};

Mat pullback_basis(const Parts& parts, const Vec& point) {
  const int a = parts.map.source.ambient_dim;
  const int t = parts.bundle.total.ambient_dim;
  const Vec x = point.head(a);
  const Vec p = point.tail(t);
  const Vec fx = parts.map.ambient_map(x);
  const Mat bm = tangent_basis(parts.map.source, x);
  const Mat bp = tangent_basis(parts.bundle.total, p);
  const Mat bn = tangent_basis(parts.bundle.base, fx);
  Mat constraint(bn.cols(), bm.cols() + bp.cols());
  constraint.leftCols(bm.cols()) = bn.transpose() * tangent_jacobian(parts.map, x, parts.fd) * bm;
  constraint.rightCols(bp.cols()) =
      -bn.transpose() * tangent_jacobian(parts.bundle.projection, p, parts.fd) * bp;
  const Mat kernel = nullspace(constraint, 1e-8);
  const int expected = parts.map.source.intrinsic_dim + parts.bundle.fiber_dim;
  if (kernel.cols() != expected) {
    throw RankDeficient("tangent space of f*P", expected, static_cast<int>(kernel.cols()));
  }
  return block_diagonal(bm, bp) * kernel;
}

}  // namespace

InadmissibleEpsilon::InadmissibleEpsilon(double epsilon, double min_eigenvalue, double max_epsilon)
    : GeometryError(inadmissible_message(epsilon, min_eigenvalue, max_epsilon)),
      epsilon_(epsilon),
      min_eigenvalue_(min_eigenvalue),
      max_epsilon_(max_epsilon) {}

// ---------------------------------------------------------------------------

PullbackBundle::PullbackBundle(SmoothMap f, RiemannianSubmersion bundle, FdOptions fd)
    : map_(std::move(f)), bundle_(std::move(bundle)), fd_(fd) {
  if (map_.target.ambient_dim != bundle_.base.ambient_dim ||
      map_.target.intrinsic_dim != bundle_.base.intrinsic_dim) {
    throw std::invalid_argument("base map target " + map_.target.name +
                                " does not match bundle base " + bundle_.base.name);
  }
  auto parts = std::make_shared<const Parts>(Parts{map_, bundle_, fd_});
  const int a = source_ambient();
  const int t = total_ambient();

  manifold_.name = "f*P(" + map_.name + ", " + bundle_.name + ")";
  manifold_.ambient_dim = a + t;
  manifold_.intrinsic_dim = dim();
  manifold_.basis = [parts](const Vec& z) -> Mat { return pullback_basis(*parts, z); };
  manifold_.projector = [parts](const Vec& z) -> Mat {
    const Mat q = pullback_basis(*parts, z);
    return q * q.transpose();
  };
  manifold_.retraction = [parts, a, t](const Vec& z, const Vec& v) -> Vec {
    const Vec x = parts->map.source.retraction(z.head(a), v.head(a));
    const Vec guess = parts->bundle.total.retraction(z.tail(t), v.tail(t));
    return join(x, parts->bundle.fiber_project(guess, parts->map.ambient_map(x)));
  };
  manifold_.sampler = [parts](std::mt19937_64& rng) -> Vec {
    const Vec x = sublab::random_point(parts->map.source, rng);
    const Vec guess = sublab::random_point(parts->bundle.total, rng);
    return join(x, parts->bundle.fiber_project(guess, parts->map.ambient_map(x)));
  };
}

double PullbackBundle::membership_residual(const Vec& point) const {
  return (map_.ambient_map(x_part(point)) - bundle_.project(p_part(point))).norm();
}

Mat PullbackBundle::tangent_basis(const Vec& point) const { return manifold_.basis(point); }

Vec PullbackBundle::random_point(std::mt19937_64& rng) const { return manifold_.sampler(rng); }

Mat PullbackBundle::product_projector(const Vec& point) const {
  return block_diagonal(map_.source.projector(x_part(point)),
                        bundle_.total.projector(p_part(point)));
}

Vec PullbackBundle::direct_second_fundamental_form(const Vec& point, const Vec& a,
                                                   const Vec& b) const {
  const Vec ii = product_projector(point) * second_fundamental_form(manifold_, point, a, b, fd_);
  const Mat dpi = tangent_jacobian(bundle_.projection, p_part(point), fd_);
  return join(x_part(ii), dpi * p_part(ii));
}

double PullbackBundle::direct_curvature(const Vec& point, const Vec& a, const Vec& b,
                                        const Vec& c, const Vec& d) const {
  return riemann(manifold_, point, a, b, c, d, fd_);
}

// ---------------------------------------------------------------------------

PullbackLocal::PullbackLocal(const PullbackBundle& bundle, const Vec& point)
    : bundle_(&bundle),
      point_(point),
      x_(bundle.x_part(point)),
      p_(bundle.p_part(point)),
      graph_(graph_operators(bundle.map(), x_, bundle.fd())),
      table_(bundle.submersion(), p_, bundle.fd()) {}

Vec PullbackLocal::lambda(const Vec& y, const Vec& y2) const { return lambda_term(table_, y, y2); }

Vec PullbackLocal::shape_term(const Vec& a, const Vec& b) const {
  return d2f(bundle_->map(), x_, bundle_->x_part(a), bundle_->x_part(b), bundle_->fd()) +
         lambda(bundle_->p_part(a), bundle_->p_part(b));
}

Vec PullbackLocal::second_fundamental_form(const Vec& a, const Vec& b) const {
  return xi_normal(graph_, graph_.o_ambient() * shape_term(a, b));
}

double PullbackLocal::curvature(const Vec& a, const Vec& b, const Vec& c, const Vec& d) const {
  const auto& fd = bundle_->fd();
  const auto& m = bundle_->map().source;
  const auto& total = bundle_->submersion().total;
  const PullbackBundle& pb = *bundle_;
  const double rm = riemann(m, x_, pb.x_part(a), pb.x_part(b), pb.x_part(c), pb.x_part(d), fd);
  const double rp = riemann(total, p_, pb.p_part(a), pb.p_part(b), pb.p_part(c), pb.p_part(d), fd);
  const Mat o = graph_.o_ambient();
  const Vec s_ad = shape_term(a, d);
  const Vec s_bc = shape_term(b, c);
  const Vec s_ac = shape_term(a, c);
  const Vec s_bd = shape_term(b, d);
  return rm + rp + (o * s_ad).dot(s_bc) - (o * s_ac).dot(s_bd);
}

Vec PullbackLocal::horizontal_lift(const Vec& x_vec) const {
  return join(x_vec, table_.frame().lift * (graph_.df_ambient() * x_vec));
}

Vec PullbackLocal::push_forward(const Vec& v) const {
  return join(bundle_->x_part(v), table_.frame().dpi_ambient * bundle_->p_part(v));
}

// ---------------------------------------------------------------------------

Vec pullback_horizontal_lift(const PullbackBundle& bundle, const Vec& point, const Vec& x_vec) {
  require_on_manifold(bundle.manifold(), point);
  const Vec x = bundle.x_part(point);
  const Vec p = bundle.p_part(point);
  const Mat df = tangent_jacobian(bundle.map(), x, bundle.fd());
  return join(x_vec, horizontal_lift(bundle.submersion(), p, df * x_vec, bundle.fd()));
}

Vec lambda_term(const ATensorTable& table, const Vec& y, const Vec& y2) {
  return -table.frame().dpi_ambient * (table.dagger(y2, y) + table.dagger(y, y2));
}

Vec lambda_term(const RiemannianSubmersion& bundle, const Vec& p, const Vec& y, const Vec& y2,
                const FdOptions& fd) {
  require_on_manifold(bundle.total, p);
  return lambda_term(ATensorTable(bundle, p, fd), y, y2);
}

SubmersionCheckReport pullback_submersion_check(const PullbackBundle& bundle, int samples,
                                                std::uint64_t seed, bool parallel) {
  struct Sample {
    double horizontal = 0.0, normal = 0.0, graph = 0.0;
  };
  auto results = map_samples<Sample>(
      samples, seed,
      [&](int, std::mt19937_64& rng) {
        Sample s;
        const Vec z = bundle.random_point(rng);
        const auto local = bundle.local(z);
        const Mat q = bundle.tangent_basis(z);
        const Mat bm = tangent_basis(bundle.map().source, local.x());
        const Mat bp = tangent_basis(bundle.submersion().total, local.p());
        const Mat frame = block_diagonal(bm, bp);
        const Mat& vertical = local.a_table().frame().vertical;
        Mat vf = Mat::Zero(z.size(), vertical.cols());
        vf.bottomRows(vertical.rows()) = vertical;

        std::normal_distribution<double> normal;
        auto gauss = [&](Eigen::Index n) {
          Vec g(n);
          for (Eigen::Index i = 0; i < n; ++i) g(i) = normal(rng);
          return g;
        };
        Vec h = q * gauss(q.cols());
        h -= vf * (vf.transpose() * h);
        s.horizontal = std::abs(local.push_forward(h).norm() - h.norm());

        const Mat normal_basis = frame * nullspace((frame.transpose() * q).transpose(), 1e-8);
        const Mat df = local.graph().df_ambient();
        for (int k = 0; k < 4; ++k) {
          const Vec n1 = normal_basis * gauss(normal_basis.cols());
          const Vec n2 = normal_basis * gauss(normal_basis.cols());
          const Vec m1 = local.push_forward(n1);
          const Vec m2 = local.push_forward(n2);
          s.normal = std::max(s.normal, std::abs(n1.dot(n2) - m1.dot(m2)));
          for (Eigen::Index i = 0; i < bm.cols(); ++i) {
            const Vec graph_tangent = join(bm.col(i), df * bm.col(i));
            s.graph = std::max(s.graph, std::abs(m1.dot(graph_tangent)) / graph_tangent.norm());
          }
        }
        return s;
      },
      execution_for(parallel));
  SubmersionCheckReport report;
  report.samples = samples;
  for (const auto& s : results) {
    report.horizontal_isometry = std::max(report.horizontal_isometry, s.horizontal);
    report.normal_isometry = std::max(report.normal_isometry, s.normal);
    report.normal_to_graph = std::max(report.normal_to_graph, s.graph);
  }
  return report;
}

// ---------------------------------------------------------------------------

MetricReduction reduce_connection_metric(const SmoothMap& f, const MetricOperatorField& metric,
                                         double epsilon, const Vec& x, const FdOptions& fd) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  require_on_manifold(f.source, x);
  const Mat bm = tangent_basis(f.source, x);
  const Mat bn = tangent_basis(f.target, f.ambient_map(x));
  const Mat d = bn.transpose() * tangent_jacobian(f, x, fd) * bm;
  const auto m = bm.cols();
  Mat g = metric ? Mat(bm.transpose() * metric(x) * bm) : Mat(Mat::Identity(m, m));
  g = 0.5 * (g + g.transpose());
  const Mat pulled = d.transpose() * d;  // f*g_N on the basis
  const Mat reduced = g - epsilon * pulled;

  MetricReduction out;
  out.reduced = bm * reduced * bm.transpose();
  // eigenvalues of g^{-1} f*g_N are those of df† df
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(pulled, g, Eigen::EigenvaluesOnly);
  const double top = m > 0 ? es.eigenvalues().maxCoeff() : 0.0;
  out.min_eigenvalue = 1.0 - epsilon * top;
  out.max_epsilon = top > 0.0 ? 1.0 / top : std::numeric_limits<double>::infinity();
  out.reconstruction_residual = (reduced + epsilon * pulled - g).cwiseAbs().maxCoeff();
  const Mat kernel = nullspace(d, 1e-6);
  if (kernel.cols() > 0) {
    const Mat mixed = kernel.transpose() * (reduced - g);
    out.level_set_residual = mixed.cwiseAbs().maxCoeff();
  }
  if (!(out.min_eigenvalue > 0.0)) {
    throw InadmissibleEpsilon(epsilon, out.min_eigenvalue, out.max_epsilon);
  }
  return out;
}

SampledMetricReduction reduce_connection_metric(const SmoothMap& f,
                                                const MetricOperatorField& metric,
                                                double epsilon, int samples, std::uint64_t seed,
                                                const FdOptions& fd, bool parallel) {
  struct Sample {
    double min_eig = 0.0, max_eps = 0.0, reconstruction = 0.0, level = 0.0;
    Vec point;
  };
  auto results = map_samples<Sample>(
      samples, seed,
      [&](int, std::mt19937_64& rng) {
        Sample s;
        s.point = random_point(f.source, rng);
        // evaluate with a tiny epsilon to obtain the spectrum without throwing,
        // then rescale to the requested epsilon
        const auto r = reduce_connection_metric(f, metric, 1e-300, s.point, fd);
        s.max_eps = r.max_epsilon;
        s.min_eig = std::isinf(r.max_epsilon) ? 1.0 : 1.0 - epsilon / r.max_epsilon;
        const Mat bm = tangent_basis(f.source, s.point);
        const Mat bn = tangent_basis(f.target, f.ambient_map(s.point));
        const Mat d = bn.transpose() * tangent_jacobian(f, s.point, fd) * bm;
        Mat g = metric ? Mat(bm.transpose() * metric(s.point) * bm)
                       : Mat(Mat::Identity(bm.cols(), bm.cols()));
        g = 0.5 * (g + g.transpose());
        const Mat reduced = g - epsilon * d.transpose() * d;
        s.reconstruction =
            (reduced + epsilon * d.transpose() * d - g).cwiseAbs().maxCoeff();
        const Mat kernel = nullspace(d, 1e-6);
        if (kernel.cols() > 0) {
          s.level = (kernel.transpose() * (reduced - g)).cwiseAbs().maxCoeff();
        }
        return s;
      },
      execution_for(parallel));
  SampledMetricReduction out;
  out.samples = samples;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  out.max_epsilon = std::numeric_limits<double>::infinity();
  for (const auto& s : results) {
    if (s.min_eig < out.min_eigenvalue) {
      out.min_eigenvalue = s.min_eig;
      out.worst_point = s.point;
    }
    out.max_epsilon = std::min(out.max_epsilon, s.max_eps);
    out.reconstruction_residual = std::max(out.reconstruction_residual, s.reconstruction);
    out.level_set_residual = std::max(out.level_set_residual, s.level);
  }
  if (!(out.min_eigenvalue > 0.0)) {
    throw InadmissibleEpsilon(epsilon, out.min_eigenvalue, out.max_epsilon);
  }
  return out;
}

}  // namespace sublab
