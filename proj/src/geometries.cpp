#include "sublab/geometries.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sublab {

namespace {

Vec gaussian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

Vec unit_gaussian(int dim, std::mt19937_64& rng) {
  Vec v = gaussian(dim, rng);
  while (v.norm() < 1e-12) v = gaussian(dim, rng);
  return v.normalized();
}

Mat block_diagonal(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

std::string short_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

EmbeddedManifold euclidean(int dim) {
  EmbeddedManifold m;
  m.name = "R^" + std::to_string(dim);
  m.ambient_dim = dim;
  m.intrinsic_dim = dim;
  m.projector = [dim](const Vec&) -> Mat { return Mat::Identity(dim, dim); };
  m.retraction = [](const Vec& x, const Vec& v) -> Vec { return x + v; };
  m.projector_derivative = [dim](const Vec&, const Vec&) -> Mat { return Mat::Zero(dim, dim); };
  m.basis = [dim](const Vec&) -> Mat { return Mat::Identity(dim, dim); };
  m.sampler = [dim](std::mt19937_64& rng) -> Vec { return gaussian(dim, rng); };
  return m;
}

EmbeddedManifold sphere(int n, double radius) {
  if (n < 1 || !(radius > 0.0)) throw std::invalid_argument("sphere needs n >= 1 and r > 0");
  EmbeddedManifold m;
  m.name = "S^" + std::to_string(n) + (radius == 1.0 ? "" : "(" + short_number(radius) + ")");
  m.ambient_dim = n + 1;
  m.intrinsic_dim = n;
  const double r2 = radius * radius;
  m.projector = [n, r2](const Vec& x) -> Mat {
    return Mat::Identity(n + 1, n + 1) - x * x.transpose() / r2;
  };
  m.retraction = [radius](const Vec& x, const Vec& v) -> Vec {
    const Vec y = x + v;
    return radius * y / y.norm();
  };
  m.projector_derivative = [r2](const Vec& x, const Vec& v) -> Mat {
    return -(v * x.transpose() + x * v.transpose()) / r2;
  };
  m.sampler = [n, radius](std::mt19937_64& rng) -> Vec { return radius * unit_gaussian(n + 1, rng); };
  return m;
}

EmbeddedManifold product(const EmbeddedManifold& first, const EmbeddedManifold& second) {
  EmbeddedManifold m;
  m.name = first.name + "×" + second.name;
  m.ambient_dim = first.ambient_dim + second.ambient_dim;
  m.intrinsic_dim = first.intrinsic_dim + second.intrinsic_dim;
  const int a = first.ambient_dim;
  const int b = second.ambient_dim;
  m.projector = [first, second, a, b](const Vec& x) -> Mat {
    return block_diagonal(first.projector(x.head(a)), second.projector(x.tail(b)));
  };
  m.retraction = [first, second, a, b](const Vec& x, const Vec& v) -> Vec {
    Vec out(a + b);
    out.head(a) = first.retraction(x.head(a), v.head(a));
    out.tail(b) = second.retraction(x.tail(b), v.tail(b));
    return out;
  };
  if (first.projector_derivative && second.projector_derivative) {
    m.projector_derivative = [first, second, a, b](const Vec& x, const Vec& v) -> Mat {
      return block_diagonal(first.projector_derivative(x.head(a), v.head(a)),
                            second.projector_derivative(x.tail(b), v.tail(b)));
    };
  }
  m.basis = [first, second, a, b](const Vec& x) -> Mat {
    return block_diagonal(tangent_basis(first, x.head(a)), tangent_basis(second, x.tail(b)));
  };
  if (first.sampler && second.sampler) {
    m.sampler = [first, second, a, b](std::mt19937_64& rng) -> Vec {
      Vec out(a + b);
      out.head(a) = first.sampler(rng);
      out.tail(b) = second.sampler(rng);
      return out;
    };
  }
  return m;
}

// ---------------------------------------------------------------------------
// Division algebras

DivisionAlgebra::DivisionAlgebra(int dim) : dim_(dim) {
  if (dim != 1 && dim != 2 && dim != 4 && dim != 8) {
    throw std::invalid_argument("division algebra dimension must be 1, 2, 4 or 8");
  }
}

namespace {

Vec cd_conj(const Vec& a) {
  Vec out = -a;
  out(0) = a(0);
  return out;
}

Vec cd_multiply(const Vec& x, const Vec& y) {
  const auto n = x.size();
  if (n == 1) return Vec::Constant(1, x(0) * y(0));
  const auto h = n / 2;
  const Vec a = x.head(h), b = x.tail(h), c = y.head(h), d = y.tail(h);
  Vec out(n);
  out.head(h) = cd_multiply(a, c) - cd_multiply(cd_conj(d), b);
  out.tail(h) = cd_multiply(d, a) + cd_multiply(b, cd_conj(c));
  return out;
}

}  // namespace

Vec DivisionAlgebra::multiply(const Vec& a, const Vec& b) const { return cd_multiply(a, b); }

Vec DivisionAlgebra::conj(const Vec& a) const { return cd_conj(a); }

Vec DivisionAlgebra::one() const { return Vec::Unit(dim_, 0); }

Mat DivisionAlgebra::left_matrix(const Vec& a) const {
  Mat m(dim_, dim_);
  for (int j = 0; j < dim_; ++j) m.col(j) = multiply(a, Vec::Unit(dim_, j));
  return m;
}

Mat DivisionAlgebra::right_matrix(const Vec& b) const {
  Mat m(dim_, dim_);
  for (int j = 0; j < dim_; ++j) m.col(j) = multiply(Vec::Unit(dim_, j), b);
  return m;
}

// ---------------------------------------------------------------------------
// Hopf fibrations

std::string_view to_string(HopfFlavor flavor) {
  switch (flavor) {
    case HopfFlavor::complex: return "hopf_complex";
    case HopfFlavor::quaternionic: return "hopf_quaternionic";
    case HopfFlavor::octonionic: return "hopf_octonionic";
  }
  return "?";
}

int algebra_dim(HopfFlavor flavor) {
  switch (flavor) {
    case HopfFlavor::complex: return 2;
    case HopfFlavor::quaternionic: return 4;
    case HopfFlavor::octonionic: return 8;
  }
  return 0;
}

SmoothMap hopf_map(HopfFlavor flavor) {
  const int d = algebra_dim(flavor);
  const DivisionAlgebra alg(d);
  SmoothMap f;
  f.name = std::string(to_string(flavor));
  f.source = sphere(2 * d - 1, 1.0);
  f.target = sphere(d, 0.5);
  f.ambient_map = [alg, d](const Vec& p) -> Vec {
    const Vec a = p.head(d), b = p.tail(d);
    Vec out(d + 1);
    out.head(d) = alg.multiply(a, alg.conj(b));
    out(d) = 0.5 * (a.squaredNorm() - b.squaredNorm());
    return out;
  };
  f.jacobian = [alg, d](const Vec& p) -> Mat {
    const Vec a = p.head(d), b = p.tail(d);
    Mat conj_matrix = -Mat::Identity(d, d);
    conj_matrix(0, 0) = 1.0;
    Mat j = Mat::Zero(d + 1, 2 * d);
    j.topLeftCorner(d, d) = alg.right_matrix(alg.conj(b));
    j.topRightCorner(d, d) = alg.left_matrix(a) * conj_matrix;
    j.block(d, 0, 1, d) = a.transpose();
    j.block(d, d, 1, d) = -b.transpose();
    return j;
  };
  f.hessian = [alg, d](const Vec&, const Vec& u, const Vec& v) -> Vec {
    Vec out(d + 1);
    out.head(d) = alg.multiply(u.head(d), alg.conj(v.tail(d))) +
                  alg.multiply(v.head(d), alg.conj(u.tail(d)));
    out(d) = u.head(d).dot(v.head(d)) - u.tail(d).dot(v.tail(d));
    return out;
  };
  return f;
}

Vec hopf_fiber_action(HopfFlavor flavor, const Vec& p, const Vec& z) {
  if (flavor == HopfFlavor::octonionic) {
    throw std::invalid_argument("the octonionic Hopf map has no fiber group action");
  }
  const int d = algebra_dim(flavor);
  const DivisionAlgebra alg(d);
  Vec out(2 * d);
  out.head(d) = alg.multiply(p.head(d), z);
  out.tail(d) = alg.multiply(p.tail(d), z);
  return out;
}

namespace {

/// Fiber over n = (w, s) is {(a, b) : a conj(b) = w, |a|^2 - |b|^2 = 2 s}.
struct HopfFiberChart {
  double alpha;  ///< |a| on the fiber
  double beta;   ///< |b| on the fiber
  Vec w_hat;     ///< w / |w| (or 1 when w = 0)
};

HopfFiberChart hopf_chart(const DivisionAlgebra& alg, const Vec& n) {
  const int d = alg.dim();
  const double s = n(d);
  HopfFiberChart c;
  c.alpha = std::sqrt(std::max(0.0, 0.5 + s));
  c.beta = std::sqrt(std::max(0.0, 0.5 - s));
  const double scale = std::hypot(c.alpha, c.beta);
  c.alpha /= scale;
  c.beta /= scale;
  const Vec w = n.head(d);
  c.w_hat = w.norm() > 1e-300 ? Vec(w / w.norm()) : alg.one();
  return c;
}

Vec hopf_fiber_point(const DivisionAlgebra& alg, const Vec& n) {
  const int d = alg.dim();
  const auto c = hopf_chart(alg, n);
  Vec p(2 * d);
  if (c.beta >= c.alpha) {
    p.head(d) = c.alpha * c.w_hat;
    p.tail(d) = c.beta * alg.one();
  } else {
    p.head(d) = c.alpha * alg.one();
    p.tail(d) = c.beta * alg.conj(c.w_hat);
  }
  return p;
}

Vec hopf_fiber_project(const DivisionAlgebra& alg, const Vec& guess, const Vec& n) {
  const int d = alg.dim();
  const auto c = hopf_chart(alg, n);
  const Vec a = guess.head(d), b = guess.tail(d);
  Vec p(2 * d);
  if (c.beta >= c.alpha) {
    // fiber = {(α ŵ u, β u) : |u| = 1}
    const Vec target = c.alpha * alg.multiply(alg.conj(c.w_hat), a) + c.beta * b;
    const double len = target.norm();
    if (len < 1e-300) return hopf_fiber_point(alg, n);
    const Vec u = target / len;
    p.head(d) = c.alpha * alg.multiply(c.w_hat, u);
    p.tail(d) = c.beta * u;
  } else {
    // fiber = {(α v, β conj(ŵ) v) : |v| = 1}
    const Vec target = c.alpha * a + c.beta * alg.multiply(c.w_hat, b);
    const double len = target.norm();
    if (len < 1e-300) return hopf_fiber_point(alg, n);
    const Vec v = target / len;
    p.head(d) = c.alpha * v;
    p.tail(d) = c.beta * alg.multiply(alg.conj(c.w_hat), v);
  }
  return p;
}

SmoothMap first_factor_projection(const EmbeddedManifold& total, const EmbeddedManifold& base) {
  SmoothMap f;
  f.name = "pr_1";
  f.source = total;
  f.target = base;
  const int b = base.ambient_dim;
  const int t = total.ambient_dim;
  f.ambient_map = [b](const Vec& x) -> Vec { return x.head(b); };
  f.jacobian = [b, t](const Vec&) -> Mat { return Mat::Identity(b, t); };
  f.hessian = [b](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(b); };
  return f;
}

}  // namespace

RiemannianSubmersion hopf_bundle(HopfFlavor flavor) {
  const int d = algebra_dim(flavor);
  const DivisionAlgebra alg(d);
  RiemannianSubmersion bundle;
  bundle.name = std::string(to_string(flavor));
  bundle.projection = hopf_map(flavor);
  bundle.total = bundle.projection.source;
  bundle.base = bundle.projection.target;
  bundle.fiber_dim = d - 1;
  bundle.fiber_point = [alg](const Vec& n) { return hopf_fiber_point(alg, n); };
  bundle.fiber_project = [alg](const Vec& p, const Vec& n) {
    return hopf_fiber_project(alg, p, n);
  };
  return bundle;
}

RiemannianSubmersion trivial_bundle(const EmbeddedManifold& base, const EmbeddedManifold& fiber,
                                    const Vec& fiber_origin) {
  RiemannianSubmersion bundle;
  bundle.name = "trivial";
  bundle.total = product(base, fiber);
  bundle.base = base;
  bundle.projection = first_factor_projection(bundle.total, base);
  bundle.fiber_dim = fiber.intrinsic_dim;
  const int b = base.ambient_dim;
  const int f = fiber.ambient_dim;
  bundle.fiber_point = [b, f, fiber_origin](const Vec& n) -> Vec {
    Vec p(b + f);
    p.head(b) = n;
    p.tail(f) = fiber_origin;
    return p;
  };
  bundle.fiber_project = [fiber, b, f](const Vec& guess, const Vec& n) -> Vec {
    Vec p(b + f);
    p.head(b) = n;
    p.tail(f) = fiber.retraction(guess.tail(f), Vec::Zero(f));
    return p;
  };
  return bundle;
}

RiemannianSubmersion broken_fixture_bundle() {
  const EmbeddedManifold base = sphere(2, 1.0);
  auto radius = [](const Vec& y) { return 1.0 + 0.5 * y(2); };
  auto spanning = [base, radius](const Vec& x) -> Mat {
    const Vec y = x.head(3), v = x.tail(2);
    const Mat py = base.projector(y);
    Mat span = Mat::Zero(5, 4);
    for (int i = 0; i < 3; ++i) {
      const Vec e = py.col(i);
      span.block(0, i, 3, 1) = e;
      span.block(3, i, 2, 1) = 0.5 * e(2) * v / radius(y);
    }
    span(3, 3) = -v(1);
    span(4, 3) = v(0);
    return span;
  };
  auto retraction = [radius](const Vec& x, const Vec& dx) -> Vec {
    Vec out(5);
    const Vec y = (x.head(3) + dx.head(3)).normalized();
    out.head(3) = y;
    out.tail(2) = radius(y) * (x.tail(2) + dx.tail(2)).normalized();
    return out;
  };
  auto sampler = [radius](std::mt19937_64& rng) -> Vec {
    Vec out(5);
    out.head(3) = unit_gaussian(3, rng);
    out.tail(2) = radius(out.head(3)) * unit_gaussian(2, rng);
    return out;
  };
  RiemannianSubmersion bundle;
  bundle.name = "broken_fixture";
  bundle.total = manifold_from_spanning_set("warped S^2×S^1", 5, 3, spanning, retraction, sampler);
  bundle.base = base;
  bundle.projection = first_factor_projection(bundle.total, base);
  bundle.fiber_dim = 1;
  bundle.fiber_point = [radius](const Vec& n) -> Vec {
    Vec p(5);
    p.head(3) = n;
    p(3) = radius(n);
    p(4) = 0.0;
    return p;
  };
  bundle.fiber_project = [radius](const Vec& guess, const Vec& n) -> Vec {
    Vec p(5);
    p.head(3) = n;
    const Vec v = guess.tail(2);
    p.tail(2) = radius(n) * (v.norm() > 1e-300 ? Vec(v.normalized()) : Vec(Vec::Unit(2, 0)));
    return p;
  };
  return bundle;
}

// ---------------------------------------------------------------------------
// Self-maps of spheres

Jet chebyshev_t(int k, double c) {
  Jet prev{1.0, 0.0, 0.0};
  if (k == 0) return prev;
  Jet cur{c, 1.0, 0.0};
  for (int i = 1; i < k; ++i) {
    const Jet next{2.0 * c * cur.value - prev.value,
                   2.0 * cur.value + 2.0 * c * cur.d1 - prev.d1,
                   4.0 * cur.d1 + 2.0 * c * cur.d2 - prev.d2};
    prev = cur;
    cur = next;
  }
  return cur;
}

Jet chebyshev_u(int k, double c) {
  Jet prev{1.0, 0.0, 0.0};
  if (k == 0) return prev;
  Jet cur{2.0 * c, 2.0, 0.0};
  for (int i = 1; i < k; ++i) {
    const Jet next{2.0 * c * cur.value - prev.value,
                   2.0 * cur.value + 2.0 * c * cur.d1 - prev.d1,
                   4.0 * cur.d1 + 2.0 * c * cur.d2 - prev.d2};
    prev = cur;
    cur = next;
  }
  return cur;
}

SmoothMap geodesic_k_fold(int n, int k, double radius, int pole) {
  if (k < 1) throw std::invalid_argument("geodesic k-fold needs k >= 1");
  if (pole < 0 || pole > n) throw std::invalid_argument("pole index out of range");
  SmoothMap f;
  f.name = "geodesic_fold(" + std::to_string(k) + ")";
  f.source = sphere(n, radius);
  f.target = f.source;
  f.ambient_map = [k, radius, pole](const Vec& y) -> Vec {
    const Vec u = y / radius;
    const double c = u(pole);
    const double t = chebyshev_t(k, c).value;
    const double w = chebyshev_u(k - 1, c).value;
    Vec out = w * u;
    out(pole) += t - w * c;
    return radius * out;
  };
  f.jacobian = [n, k, radius, pole](const Vec& y) -> Mat {
    const Vec u = y / radius;
    const double c = u(pole);
    const Jet t = chebyshev_t(k, c);
    const Jet w = chebyshev_u(k - 1, c);
    Vec rest = u;
    rest(pole) -= c;
    const Vec e = Vec::Unit(n + 1, pole);
    Mat j = w.value * (Mat::Identity(n + 1, n + 1) - e * e.transpose());
    j += t.d1 * e * e.transpose();
    j += w.d1 * rest * e.transpose();
    return j;
  };
  f.hessian = [k, radius, pole](const Vec& y, const Vec& a, const Vec& b) -> Vec {
    const Vec u = y / radius;
    const double c = u(pole);
    const Jet t = chebyshev_t(k, c);
    const Jet w = chebyshev_u(k - 1, c);
    Vec rest = u;
    rest(pole) -= c;
    Vec a_perp = a;
    a_perp(pole) = 0.0;
    Vec b_perp = b;
    b_perp(pole) = 0.0;
    const double a0 = a(pole), b0 = b(pole);
    Vec out = w.d2 * a0 * b0 * rest + w.d1 * (b0 * a_perp + a0 * b_perp);
    out(pole) += t.d2 * a0 * b0;
    return out / radius;
  };
  return f;
}

Vec geodesic_k_fold_angle_form(const Vec& y, int k, double radius, int pole) {
  const Vec u = y / radius;
  const double c = std::clamp(u(pole), -1.0, 1.0);
  Vec x = u;
  x(pole) = 0.0;
  const double s = x.norm();
  const double t = std::atan2(s, c);
  Vec out = std::sin(k * t) * x / s;
  out(pole) = std::cos(k * t);
  return radius * out;
}

SmoothMap perturbation_diffeo(int n, double delta, const Vec& axis, double radius) {
  if (!(delta >= 0.0) || delta >= 1.0) {
    throw std::invalid_argument("perturbation needs 0 <= delta < 1");
  }
  if (axis.size() != n + 1 || std::abs(axis.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("perturbation axis must be a unit vector of the ambient space");
  }
  SmoothMap f;
  f.name = "perturbed(" + short_number(delta) + ")";
  f.source = sphere(n, radius);
  f.target = f.source;
  const Vec shift = delta * axis;
  f.ambient_map = [shift, radius](const Vec& x) -> Vec {
    const Vec y = x / radius + shift;
    return radius * y / y.norm();
  };
  f.jacobian = [shift, radius, n](const Vec& x) -> Mat {
    const Vec y = x / radius + shift;
    const double s = y.norm();
    const Vec yh = y / s;
    return (Mat::Identity(n + 1, n + 1) - yh * yh.transpose()) / s;
  };
  f.hessian = [shift, radius](const Vec& x, const Vec& u, const Vec& v) -> Vec {
    const Vec y = x / radius + shift;
    const double s = y.norm();
    const Vec yh = y / s;
    const double yu = yh.dot(u), yv = yh.dot(v);
    const Vec d2 = -yu * v - yv * u - u.dot(v) * yh + 3.0 * yu * yv * yh;
    return d2 / (s * s * radius);
  };
  return f;
}

}  // namespace sublab
