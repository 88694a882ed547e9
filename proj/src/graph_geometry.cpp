#include "sublab/graph_geometry.hpp"

namespace sublab {

namespace {

constexpr double kMaxGramCondition = 1e12;

Mat gram(const Mat& basis, const MetricOperatorField& metric, const Vec& at) {
  if (!metric) return Mat::Identity(basis.cols(), basis.cols());
  const Mat g = basis.transpose() * metric(at) * basis;
  return 0.5 * (g + g.transpose());
}

}  // namespace

GraphOperators graph_operators(const SmoothMap& f, const Vec& x, const FdOptions& fd) {
  GraphOperators ops;
  const Vec fx = f.ambient_map(x);
  ops.source_basis = tangent_basis(f.source, x);
  ops.target_basis = tangent_basis(f.target, fx);
  ops.df = ops.target_basis.transpose() * tangent_jacobian(f, x, fd) * ops.source_basis;
  ops.df_dagger = ops.df.transpose();
  const auto n = ops.df.rows();
  const Mat spd = Mat::Identity(n, n) + ops.df * ops.df_dagger;
  ops.o = spd.ldlt().solve(Mat::Identity(n, n));
  ops.o = 0.5 * (ops.o + ops.o.transpose());
  return ops;
}

Mat df_dagger(const SmoothMap& f, const Vec& x, const MetricOperatorField& source_metric,
              const MetricOperatorField& target_metric, const FdOptions& fd) {
  require_on_manifold(f.source, x);
  const Vec fx = f.ambient_map(x);
  const Mat bm = tangent_basis(f.source, x);
  const Mat bn = tangent_basis(f.target, fx);
  const Mat d = bn.transpose() * tangent_jacobian(f, x, fd) * bm;
  const Mat gm = gram(bm, source_metric, x);
  const Mat gn = gram(bn, target_metric, fx);
  const double cm = spd_condition(gm);
  if (!(cm <= kMaxGramCondition)) throw IllConditioned("source Gram matrix", cm);
  const double cn = spd_condition(gn);
  if (!(cn <= kMaxGramCondition)) throw IllConditioned("target Gram matrix", cn);
  // g_M(df† Y, X) = g_N(Y, df X)  <=>  G_M c = D^T G_N y
  const Mat coords = gm.ldlt().solve(d.transpose() * gn);
  return bm * coords * bn.transpose();
}

Vec join(const Vec& first, const Vec& second) {
  Vec out(first.size() + second.size());
  out << first, second;
  return out;
}

Vec graph_pi(const GraphOperators& ops, const Vec& pair) {
  const int a = ops.source_ambient();
  return pair.tail(ops.target_ambient()) - ops.df_ambient() * pair.head(a);
}

Vec xi_normal(const GraphOperators& ops, const Vec& y) {
  return join(-ops.df_dagger_ambient() * y, y);
}

Vec xi(const GraphOperators& ops, const Vec& pair) {
  const Vec x = pair.head(ops.source_ambient());
  const Vec y = pair.tail(ops.target_ambient());
  return join(x, ops.df_ambient() * x) + xi_normal(ops, y);
}

Vec xi(const SmoothMap& f, const Vec& x, const Vec& pair, const FdOptions& fd) {
  return xi(graph_operators(f, x, fd), pair);
}

Vec xi_inverse(const GraphOperators& ops, const Vec& pair) {
  const auto m = ops.df.cols();
  const Vec cx = ops.source_basis.transpose() * pair.head(ops.source_ambient());
  const Vec cy = ops.target_basis.transpose() * pair.tail(ops.target_ambient());
  const Mat inner_m = (Mat::Identity(m, m) + ops.df_dagger * ops.df).ldlt().solve(Mat::Identity(m, m));
  const Vec rx = inner_m * cx + ops.df_dagger * (ops.o * cy);
  const Vec ry = -ops.df * (inner_m * cx) + ops.o * cy;
  return join(ops.source_basis * rx, ops.target_basis * ry);
}

Vec xi_inverse(const SmoothMap& f, const Vec& x, const Vec& pair, const FdOptions& fd) {
  return xi_inverse(graph_operators(f, x, fd), pair);
}

Vec normal_projection_graph(const GraphOperators& ops, const Vec& pair) {
  return xi_normal(ops, ops.o_ambient() * graph_pi(ops, pair));
}

Vec normal_projection_graph(const SmoothMap& f, const Vec& x, const Vec& pair,
                            const FdOptions& fd) {
  require_on_manifold(f.source, x);
  return normal_projection_graph(graph_operators(f, x, fd), pair);
}

Vec d2f(const SmoothMap& f, const Vec& x, const Vec& a, const Vec& b, const FdOptions& fd) {
  const Vec fx = f.ambient_map(x);
  const Mat pn = f.target.projector(fx);
  if (f.has_analytic_hessian()) {
    // ∇^M_X (P_M X') = 0 at x, so only the ambient second derivative and the
    // normal bending of the extension contribute.
    const Vec bend = projector_derivative(f.source, x, a, fd) * b;
    return pn * (f.hessian(x, a, b) + f.jacobian(x) * bend);
  }
  const Vec derivative = fd_derivative(
      [&](double t) -> Vec { return tangent_jacobian(f, f.source.retraction(x, t * a), fd) * b; },
      fd);
  return pn * derivative;
}

Vec graph_second_fundamental_form(const SmoothMap& f, const Vec& x, const Vec& a, const Vec& b,
                                  const FdOptions& fd) {
  const auto ops = graph_operators(f, x, fd);
  return xi_normal(ops, ops.o_ambient() * d2f(f, x, a, b, fd));
}

EmbeddedManifold graph_manifold(const SmoothMap& f, const FdOptions& fd) {
  const int a = f.source.ambient_dim;
  auto spanning = [f, fd](const Vec& z) -> Mat {
    const int a = f.source.ambient_dim;
    const Vec x = z.head(a);
    const Mat basis = tangent_basis(f.source, x);
    Mat span(a + f.target.ambient_dim, basis.cols());
    span.topRows(a) = basis;
    span.bottomRows(f.target.ambient_dim) = tangent_jacobian(f, x, fd) * basis;
    return span;
  };
  auto retraction = [f, a](const Vec& z, const Vec& v) -> Vec {
    const Vec x = f.source.retraction(z.head(a), v.head(a));
    return join(x, f.ambient_map(x));
  };
  EmbeddedManifold::Sampler sampler;
  if (f.source.sampler) {
    sampler = [f](std::mt19937_64& rng) -> Vec {
      const Vec x = f.source.sampler(rng);
      return join(x, f.ambient_map(x));
    };
  }
  return manifold_from_spanning_set("graph(" + f.name + ")", a + f.target.ambient_dim,
                                    f.source.intrinsic_dim, spanning, retraction, sampler);
}

}  // namespace sublab
