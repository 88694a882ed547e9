#include "sublab/smooth_map.hpp"

#include "sublab/geometries.hpp"

namespace sublab {

Mat tangent_jacobian(const SmoothMap& f, const Vec& x, const FdOptions& fd) {
  const Vec fx = f.ambient_map(x);
  const Mat pn = f.target.projector(fx);
  if (f.jacobian) return pn * f.jacobian(x) * f.source.projector(x);
  const Mat basis = tangent_basis(f.source, x);
  Mat j = Mat::Zero(f.target.ambient_dim, f.source.ambient_dim);
  for (Eigen::Index i = 0; i < basis.cols(); ++i) {
    const Vec b = basis.col(i);
    const Vec col =
        fd_derivative([&](double t) { return f.ambient_map(f.source.retraction(x, t * b)); }, fd);
    j += col * b.transpose();
  }
  return pn * j;
}

SmoothMap without_analytic_derivatives(SmoothMap f) {
  f.jacobian = nullptr;
  f.hessian = nullptr;
  f.name += "[fd]";
  return f;
}

SmoothMap compose(const SmoothMap& f, const SmoothMap& g) {
  SmoothMap h;
  h.name = f.name + "∘" + g.name;
  h.source = g.source;
  h.target = f.target;
  h.ambient_map = [fm = f.ambient_map, gm = g.ambient_map](const Vec& x) { return fm(gm(x)); };
  if (f.jacobian && g.jacobian) {
    h.jacobian = [fm = f.jacobian, gm = g.ambient_map, gj = g.jacobian](const Vec& x) -> Mat {
      return fm(gm(x)) * gj(x);
    };
    if (f.hessian && g.hessian) {
      h.hessian = [g, f](const Vec& x, const Vec& u, const Vec& v) -> Vec {
        const Vec gx = g.ambient_map(x);
        const Mat jg = g.jacobian(x);
        return f.hessian(gx, jg * u, jg * v) + f.jacobian(gx) * g.hessian(x, u, v);
      };
    }
  }
  return h;
}

SmoothMap identity_map(const EmbeddedManifold& m) {
  SmoothMap f;
  f.name = "identity";
  f.source = m;
  f.target = m;
  f.ambient_map = [](const Vec& x) { return x; };
  const int n = m.ambient_dim;
  f.jacobian = [n](const Vec&) -> Mat { return Mat::Identity(n, n); };
  f.hessian = [n](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(n); };
  return f;
}

SmoothMap constant_map(const EmbeddedManifold& source, const EmbeddedManifold& target,
                       const Vec& value) {
  require_on_manifold(target, value);
  SmoothMap f;
  f.name = "constant";
  f.source = source;
  f.target = target;
  f.ambient_map = [value](const Vec&) { return value; };
  const int rows = target.ambient_dim;
  const int cols = source.ambient_dim;
  f.jacobian = [rows, cols](const Vec&) -> Mat { return Mat::Zero(rows, cols); };
  f.hessian = [rows](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(rows); };
  return f;
}

SmoothMap linear_map(const Mat& a) {
  SmoothMap f;
  f.name = "linear";
  f.source = euclidean(static_cast<int>(a.cols()));
  f.target = euclidean(static_cast<int>(a.rows()));
  f.ambient_map = [a](const Vec& x) -> Vec { return a * x; };
  f.jacobian = [a](const Vec&) -> Mat { return a; };
  const auto rows = a.rows();
  f.hessian = [rows](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(rows); };
  return f;
}

}  // namespace sublab
