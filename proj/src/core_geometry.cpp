#include "sublab/core_geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace sublab {

double membership_residual(const EmbeddedManifold& m, const Vec& x) {
  if (x.size() != m.ambient_dim) return std::numeric_limits<double>::infinity();
  return (m.retraction(x, Vec::Zero(m.ambient_dim)) - x).norm();
}

void require_on_manifold(const EmbeddedManifold& m, const Vec& x, double tol) {
  const double r = membership_residual(m, x);
  if (!(r <= tol)) throw PointOffManifold(m.name, r);
}

Mat tangent_projector(const EmbeddedManifold& m, const Vec& x) {
  require_on_manifold(m, x);
  return m.projector(x);
}

Mat tangent_basis(const EmbeddedManifold& m, const Vec& x) {
  if (m.basis) return m.basis(x);
  return orthonormal_columns(m.projector(x), m.intrinsic_dim);
}

Vec random_point(const EmbeddedManifold& m, std::mt19937_64& rng) {
  if (!m.sampler) throw std::logic_error("manifold " + m.name + " has no sampler");
  return m.sampler(rng);
}

Vec random_tangent(const EmbeddedManifold& m, const Vec& x, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec g(m.ambient_dim);
  for (int i = 0; i < m.ambient_dim; ++i) g(i) = normal(rng);
  return m.projector(x) * g;
}

EmbeddedManifold without_analytic_derivative(EmbeddedManifold m) {
  m.projector_derivative = nullptr;
  m.name += "[fd]";
  return m;
}

Mat projector_derivative(const EmbeddedManifold& m, const Vec& x, const Vec& v,
                         const FdOptions& fd) {
  if (m.projector_derivative) return m.projector_derivative(x, v);
  return fd_derivative([&](double t) { return m.projector(m.retraction(x, t * v)); }, fd);
}

VectorField projected_constant_field(const EmbeddedManifold& m, const Vec& v) {
  return [proj = m.projector, v](const Vec& y) -> Vec { return proj(y) * v; };
}

Vec covariant_derivative(const EmbeddedManifold& m, const VectorField& field, const Vec& x,
                         const Vec& direction, const FdOptions& fd) {
  require_on_manifold(m, x);
  const Vec ambient =
      fd_derivative([&](double t) { return field(m.retraction(x, t * direction)); }, fd);
  return m.projector(x) * ambient;
}

Vec second_fundamental_form(const Mat& projector, const Mat& d_projector_a, const Vec& b) {
  const Vec db = d_projector_a * b;
  return db - projector * db;
}

Vec second_fundamental_form(const EmbeddedManifold& m, const Vec& x, const Vec& a, const Vec& b,
                            const FdOptions& fd) {
  return second_fundamental_form(m.projector(x), projector_derivative(m, x, a, fd), b);
}

double riemann(const EmbeddedManifold& m, const Vec& x, const Vec& a, const Vec& b, const Vec& c,
               const Vec& d, const FdOptions& fd) {
  const Mat p = m.projector(x);
  const Mat dpa = projector_derivative(m, x, a, fd);
  const Mat dpb = projector_derivative(m, x, b, fd);
  const Vec ii_ad = second_fundamental_form(p, dpa, d);
  const Vec ii_ac = second_fundamental_form(p, dpa, c);
  const Vec ii_bc = second_fundamental_form(p, dpb, c);
  const Vec ii_bd = second_fundamental_form(p, dpb, d);
  return ii_ad.dot(ii_bc) - ii_ac.dot(ii_bd);
}

double plane_gram(const Vec& a, const Vec& b) {
  const double ab = a.dot(b);
  return a.squaredNorm() * b.squaredNorm() - ab * ab;
}

double sectional_curvature(const EmbeddedManifold& m, const Vec& x, const Vec& a, const Vec& b,
                           const FdOptions& fd, double gram_tol) {
  const double gram = plane_gram(a, b);
  if (!(gram > gram_tol)) throw DegeneratePlane(gram);
  return riemann(m, x, a, b, b, a, fd) / gram;
}

Vec lie_bracket(const EmbeddedManifold& m, const VectorField& a, const VectorField& b,
                const Vec& x, const FdOptions& fd) {
  const Vec ax = a(x);
  const Vec bx = b(x);
  const Vec db_along_a = fd_derivative([&](double t) { return b(m.retraction(x, t * ax)); }, fd);
  const Vec da_along_b = fd_derivative([&](double t) { return a(m.retraction(x, t * bx)); }, fd);
  return m.projector(x) * (db_along_a - da_along_b);
}

EmbeddedManifold manifold_from_spanning_set(std::string name, int ambient_dim, int intrinsic_dim,
                                            std::function<Mat(const Vec&)> spanning,
                                            EmbeddedManifold::Retraction retraction,
                                            EmbeddedManifold::Sampler sampler) {
  EmbeddedManifold m;
  m.name = std::move(name);
  m.ambient_dim = ambient_dim;
  m.intrinsic_dim = intrinsic_dim;
  m.basis = [spanning, intrinsic_dim](const Vec& x) -> Mat {
    return orthonormal_columns(spanning(x), intrinsic_dim);
  };
  m.projector = [basis = m.basis](const Vec& x) -> Mat {
    const Mat q = basis(x);
    return q * q.transpose();
  };
  m.retraction = std::move(retraction);
  m.sampler = std::move(sampler);
  return m;
}

}  // namespace sublab
