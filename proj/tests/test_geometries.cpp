#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "sublab/geometries.hpp"

#include <cmath>
#include <numbers>

using namespace sublab;
using testing_support::gaussian;
using testing_support::unit;

namespace {

// Central difference of the ambient Jacobian, an oracle for analytic Hessians.
Vec hessian_oracle(const SmoothMap& f, const Vec& x, const Vec& u, const Vec& v) {
  const double h = 1e-5;
  return (f.jacobian(x + h * u) - f.jacobian(x - h * u)) * v / (2 * h);
}

Mat jacobian_oracle(const SmoothMap& f, const Vec& x) {
  const double h = 1e-6;
  Mat j(f.target.ambient_dim, x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Vec e = unit(x.size(), i);
    j.col(i) = (f(x + h * e) - f(x - h * e)) / (2 * h);
  }
  return j;
}

void check_derivatives(const SmoothMap& f, std::mt19937_64& rng) {
  REQUIRE(f.has_analytic_hessian());
  for (int i = 0; i < 5; ++i) {
    const Vec x = random_point(f.source, rng);
    CHECK((f.jacobian(x) - jacobian_oracle(f, x)).norm() < 1e-8);
    const Vec u = gaussian(rng, x.size()), v = gaussian(rng, x.size());
    CHECK((f.hessian(x, u, v) - hessian_oracle(f, x, u, v)).norm() < 1e-7);
    CHECK((f.hessian(x, u, v) - f.hessian(x, v, u)).norm() < 1e-12);
    CHECK((tangent_jacobian(f, x) - tangent_jacobian(without_analytic_derivatives(f), x)).norm() <
          1e-7);
  }
}

}  // namespace

TEST_CASE("division algebras: norms, conjugation, (non)associativity") {
  std::mt19937_64 rng(21);
  for (int d : {1, 2, 4, 8}) {
    const DivisionAlgebra alg(d);
    for (int i = 0; i < 20; ++i) {
      const Vec a = gaussian(rng, d), b = gaussian(rng, d);
      CHECK(std::abs(alg.multiply(a, b).norm() - a.norm() * b.norm()) < 1e-12);
      CHECK((alg.multiply(a, alg.conj(a)) - a.squaredNorm() * alg.one()).norm() < 1e-12);
      // alternativity holds in all four algebras
      CHECK((alg.multiply(a, alg.multiply(a, b)) - alg.multiply(alg.multiply(a, a), b)).norm() <
            1e-12);
      CHECK((alg.left_matrix(a) * b - alg.multiply(a, b)).norm() < 1e-12);
      CHECK((alg.right_matrix(b) * a - alg.multiply(a, b)).norm() < 1e-12);
    }
  }
  const DivisionAlgebra h(4), o(8);
  const Vec a = gaussian(rng, 8), b = gaussian(rng, 8), c = gaussian(rng, 8);
  CHECK((h.multiply(h.multiply(a.head(4), b.head(4)), c.head(4)) -
         h.multiply(a.head(4), h.multiply(b.head(4), c.head(4))))
            .norm() < 1e-12);
  CHECK((o.multiply(o.multiply(a, b), c) - o.multiply(a, o.multiply(b, c))).norm() > 1e-3);
  CHECK_THROWS_AS(DivisionAlgebra(3), std::invalid_argument);
}

TEST_CASE("Hopf maps land on the sphere of radius one half") {
  std::mt19937_64 rng(22);
  for (auto flavor : {HopfFlavor::complex, HopfFlavor::quaternionic, HopfFlavor::octonionic}) {
    const auto f = hopf_map(flavor);
    const int d = algebra_dim(flavor);
    CHECK(f.source.intrinsic_dim == 2 * d - 1);
    CHECK(f.target.intrinsic_dim == d);
    for (int i = 0; i < 20; ++i) {
      CHECK(std::abs(f(random_point(f.source, rng)).norm() - 0.5) < 1e-14);
    }
    // (1, 0) goes to the north pole
    CHECK((f(unit(2 * d, 0)) - 0.5 * unit(d + 1, d)).norm() < 1e-15);
  }
}

TEST_CASE("Hopf map derivatives against finite differences") {
  std::mt19937_64 rng(23);
  for (auto flavor : {HopfFlavor::complex, HopfFlavor::quaternionic, HopfFlavor::octonionic}) {
    check_derivatives(hopf_map(flavor), rng);
  }
}

TEST_CASE("Hopf maps are invariant under the right fiber action") {
  std::mt19937_64 rng(24);
  for (auto flavor : {HopfFlavor::complex, HopfFlavor::quaternionic}) {
    const auto f = hopf_map(flavor);
    const int d = algebra_dim(flavor);
    for (int i = 0; i < 20; ++i) {
      const Vec p = random_point(f.source, rng);
      const Vec z = gaussian(rng, d).normalized();
      const Vec q = hopf_fiber_action(flavor, p, z);
      CHECK(std::abs(q.norm() - 1.0) < 1e-14);
      CHECK((f(q) - f(p)).norm() < 1e-14);
    }
  }
  CHECK_THROWS_AS(hopf_fiber_action(HopfFlavor::octonionic, unit(16, 0), unit(8, 0)),
                  std::invalid_argument);
}

TEST_CASE("fiber points lie over their base point") {
  std::mt19937_64 rng(25);
  for (auto flavor : {HopfFlavor::complex, HopfFlavor::quaternionic, HopfFlavor::octonionic}) {
    const auto bundle = hopf_bundle(flavor);
    for (int i = 0; i < 20; ++i) {
      const Vec n = random_point(bundle.base, rng);
      const Vec p = bundle.fiber_point(n);
      CHECK(membership_residual(bundle.total, p) < 1e-12);
      CHECK((bundle.project(p) - n).norm() < 1e-12);
    }
  }
}

TEST_CASE("fiber projection agrees with a search over the circle fiber") {
  std::mt19937_64 rng(26);
  const auto bundle = hopf_bundle(HopfFlavor::complex);
  for (int i = 0; i < 10; ++i) {
    const Vec n = random_point(bundle.base, rng);
    const Vec p = bundle.fiber_point(n);
    const Vec target = (p + 0.2 * gaussian(rng, 4)).normalized();
    auto on_fiber = [&](double t) {
      Vec z(2);
      z << std::cos(t), std::sin(t);
      return hopf_fiber_action(HopfFlavor::complex, p, z);
    };
    auto dist = [&](double t) { return (on_fiber(t) - target).norm(); };
    double best = 0.0;
    for (int k = 0; k < 3600; ++k) {
      const double t = 2 * std::numbers::pi * k / 3600;
      if (dist(t) < dist(best)) best = t;
    }
    double lo = best - 0.01, hi = best + 0.01;
    for (int k = 0; k < 100; ++k) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (dist(m1) < dist(m2)) hi = m2;
      else lo = m1;
    }
    const Vec got = bundle.fiber_project(target, n);
    CHECK((got - on_fiber(0.5 * (lo + hi))).norm() < 1e-6);
    CHECK((bundle.project(got) - n).norm() < 1e-12);
  }
}

TEST_CASE("Chebyshev jets") {
  for (int k : {1, 2, 3, 5}) {
    for (double t : {0.3, 1.1, 2.5}) {
      const double c = std::cos(t);
      CHECK(chebyshev_t(k, c).value == doctest::Approx(std::cos(k * t)).epsilon(1e-12));
      CHECK(chebyshev_u(k - 1, c).value * std::sin(t) ==
            doctest::Approx(std::sin(k * t)).epsilon(1e-12));
      const double h = 1e-5;
      const double d1 = (chebyshev_t(k, c + h).value - chebyshev_t(k, c - h).value) / (2 * h);
      const double d2 =
          (chebyshev_t(k, c + h).d1 - chebyshev_t(k, c - h).d1) / (2 * h);
      CHECK(chebyshev_t(k, c).d1 == doctest::Approx(d1).epsilon(1e-8));
      CHECK(chebyshev_t(k, c).d2 == doctest::Approx(d2).epsilon(1e-8));
      const double u1 = (chebyshev_u(k, c + h).value - chebyshev_u(k, c - h).value) / (2 * h);
      CHECK(chebyshev_u(k, c).d1 == doctest::Approx(u1).epsilon(1e-8));
    }
  }
}

TEST_CASE("geodesic k-fold: polynomial and angle forms agree") {
  std::mt19937_64 rng(27);
  for (int k : {1, 2, 3, 4}) {
    for (double r : {1.0, 0.5}) {
      const auto f = geodesic_k_fold(3, k, r, 1);
      for (int i = 0; i < 20; ++i) {
        const Vec y = random_point(f.source, rng);
        CHECK((f(y) - geodesic_k_fold_angle_form(y, k, r, 1)).norm() <= 1e-9);
        CHECK(std::abs(f(y).norm() - r) < 1e-12);
      }
    }
  }
  const auto once = geodesic_k_fold(2, 1);
  const Vec y = random_point(once.source, rng);
  CHECK((once(y) - y).norm() < 1e-14);
}

TEST_CASE("folding twice by two is folding by four") {
  std::mt19937_64 rng(28);
  const auto rho2 = geodesic_k_fold(2, 2), rho4 = geodesic_k_fold(2, 4);
  for (int i = 0; i < 20; ++i) {
    const Vec y = random_point(rho2.source, rng);
    CHECK((rho2(rho2(y)) - rho4(y)).norm() < 1e-12);
  }
}

TEST_CASE("geodesic k-fold derivatives") {
  std::mt19937_64 rng(29);
  check_derivatives(geodesic_k_fold(3, 2), rng);
  check_derivatives(geodesic_k_fold(2, 3, 0.5, 2), rng);
}

TEST_CASE("the two-fold collapses the equator") {
  const auto rho2 = geodesic_k_fold(2, 2);
  const Mat j = tangent_jacobian(rho2, unit(3, 1));
  const Eigen::JacobiSVD<Mat> svd(j);
  const Vec s = svd.singularValues();
  CHECK(s(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s(1) <= 1e-6);
  CHECK((rho2(unit(3, 1)) + unit(3, 0)).norm() < 1e-14);
}

TEST_CASE("perturbation diffeomorphisms") {
  std::mt19937_64 rng(30);
  Vec axis = Vec::Zero(4);
  axis(1) = 1.0;
  const auto g = perturbation_diffeo(3, 0.4, axis, 2.0);
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(g(random_point(g.source, rng)).norm() - 2.0) < 1e-13);
  }
  check_derivatives(g, rng);
  CHECK((perturbation_diffeo(3, 0.0, axis)(unit(4, 2)) - unit(4, 2)).norm() == 0.0);
  CHECK_THROWS_AS(perturbation_diffeo(3, 1.0, axis), std::invalid_argument);
  CHECK_THROWS_AS(perturbation_diffeo(3, -0.1, axis), std::invalid_argument);
  CHECK_THROWS_AS(perturbation_diffeo(3, 0.2, 2.0 * axis), std::invalid_argument);
  CHECK_THROWS_AS(perturbation_diffeo(3, 0.2, Vec::Ones(3).normalized()), std::invalid_argument);
  // local diffeomorphism: full rank everywhere sampled
  for (int i = 0; i < 10; ++i) {
    const Vec x = random_point(g.source, rng);
    const Mat b = tangent_basis(g.source, x);
    const Eigen::JacobiSVD<Mat> svd(tangent_jacobian(g, x) * b);
    CHECK(svd.singularValues().minCoeff() > 0.1);
  }
}

TEST_CASE("trivial bundle projects onto the first factor") {
  std::mt19937_64 rng(31);
  const auto bundle = trivial_bundle(sphere(2, 0.5), sphere(1), unit(2, 0));
  CHECK(bundle.fiber_dim == 1);
  for (int i = 0; i < 10; ++i) {
    const Vec p = random_point(bundle.total, rng);
    CHECK((bundle.project(p) - p.head(3)).norm() == 0.0);
  }
}

TEST_CASE("fiber point over the north pole and projection fixed points") {
  std::mt19937_64 rng(32);
  const auto bundle = hopf_bundle(HopfFlavor::complex);
  const Vec p0 = bundle.fiber_point(0.5 * unit(3, 2));
  CHECK(p0.tail(2).norm() < 1e-14);
  CHECK(std::abs(p0.head(2).norm() - 1.0) < 1e-14);
  for (int i = 0; i < 10; ++i) {
    const Vec p = random_point(bundle.total, rng);
    const Vec n = bundle.project(p);
    CHECK((bundle.fiber_project(p, n) - p).norm() < 1e-12);
    // equivariance: projecting a rotated guess rotates the answer
    const Vec guess = (p + 0.3 * gaussian(rng, 4)).normalized();
    Vec z(2);
    z << std::cos(0.7), std::sin(0.7);
    CHECK((bundle.fiber_project(hopf_fiber_action(HopfFlavor::complex, guess, z), n) -
           hopf_fiber_action(HopfFlavor::complex, bundle.fiber_project(guess, n), z))
              .norm() < 1e-12);
  }
}
