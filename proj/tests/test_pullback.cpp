#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "sublab/geometries.hpp"
#include "sublab/pullback.hpp"
#include "sublab/sampling.hpp"

#include <cmath>

using namespace sublab;
using testing_support::gaussian;
using testing_support::unit;
using testing_support::unit_in;

namespace {

Vec axis_e1() { return unit(4, 1); }

PullbackBundle pure_hopf() {
  return PullbackBundle(hopf_map(HopfFlavor::complex), hopf_bundle(HopfFlavor::complex));
}

PullbackBundle perturbed_hopf() {
  return PullbackBundle(
      compose(hopf_map(HopfFlavor::complex), perturbation_diffeo(3, 0.3, axis_e1())),
      hopf_bundle(HopfFlavor::complex));
}

PullbackBundle constant_over_product() {
  const auto bundle = trivial_bundle(sphere(2, 0.5), sphere(1), unit(2, 0));
  return PullbackBundle(constant_map(sphere(3), bundle.base, 0.5 * unit(3, 2)), bundle);
}

// Kernel of the constraint (X, E) -> df X - dπ E, computed from ambient matrices.
Mat constraint_residual(const PullbackBundle& b, const Vec& z, const Mat& basis) {
  const Vec x = b.x_part(z), p = b.p_part(z);
  const Mat jf = tangent_jacobian(b.map(), x);
  const Mat jp = tangent_jacobian(b.submersion().projection, p);
  const int a = b.source_ambient();
  return jf * basis.topRows(a) - jp * basis.bottomRows(b.total_ambient());
}

}  // namespace

TEST_CASE("tangent basis of the pull-back") {
  std::mt19937_64 rng(51);
  for (const auto& b : {pure_hopf(), perturbed_hopf()}) {
    const Vec z = b.random_point(rng);
    CHECK(b.membership_residual(z) < 1e-12);
    const Mat t = b.tangent_basis(z);
    CHECK(t.cols() == 4);
    CHECK((t.transpose() * t - Mat::Identity(4, 4)).norm() < 1e-12);
    CHECK(constraint_residual(b, z, t).norm() < 1e-10);
    // the fiber direction (0, i p) is tangent
    const Vec p = b.p_part(z);
    Vec ip(4);
    ip << -p(1), p(0), -p(3), p(2);
    const Vec v = join(Vec::Zero(4), ip);
    CHECK((t * (t.transpose() * v) - v).norm() < 1e-10);
  }
  CHECK(constant_over_product().dim() == 4);
}

TEST_CASE("horizontal lifts of the pull-back") {
  std::mt19937_64 rng(52);
  const auto b = perturbed_hopf();
  for (int i = 0; i < 10; ++i) {
    const Vec z = b.random_point(rng);
    const Vec x = b.x_part(z), p = b.p_part(z);
    const Vec X = random_tangent(b.map().source, x, rng);
    const Vec lift = pullback_horizontal_lift(b, z, X);
    const Mat t = b.tangent_basis(z);
    CHECK((t * (t.transpose() * lift) - lift).norm() < 1e-10);
    const Vec dfx = tangent_jacobian(b.map(), x) * X;
    CHECK(std::abs(lift.squaredNorm() - X.squaredNorm() - dfx.squaredNorm()) < 1e-8);
    const Mat v = vertical_projector(b.submersion(), p);
    CHECK((v * b.p_part(lift)).norm() < 1e-10);
    CHECK((b.local(z).push_forward(lift) - join(X, dfx)).norm() < 1e-10);
  }
  // kernel vectors lift to (X, 0)
  const auto pure = pure_hopf();
  const Vec z = pure.random_point(rng);
  const Vec x = pure.x_part(z);
  Vec ix(4);
  ix << -x(1), x(0), -x(3), x(2);
  CHECK(pure.p_part(pullback_horizontal_lift(pure, z, ix)).norm() < 1e-10);
}

TEST_CASE("the retraction stays on the pull-back") {
  std::mt19937_64 rng(53);
  for (const auto& b : {pure_hopf(), perturbed_hopf()}) {
    const auto& m = b.manifold();
    for (int i = 0; i < 20; ++i) {
      const Vec z = b.random_point(rng);
      const Vec v = unit_in(b.tangent_basis(z), rng);
      for (double h : {1e-2, 1e-3}) {
        CHECK(b.membership_residual(m.retraction(z, h * v)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("second fundamental form: closed form against the ambient computation") {
  struct Named {
    const char* name;
    PullbackBundle bundle;
  };
  for (const auto& [name, b] : {Named{"pure", pure_hopf()}, Named{"perturbed", perturbed_hopf()}}) {
    CAPTURE(name);
    double worst = 0.0, asym = 0.0;
    for (int i = 0; i < 100; ++i) {
      auto rng = sample_rng(54, i);
      const Vec z = b.random_point(rng);
      const Mat t = b.tangent_basis(z);
      const Vec a = unit_in(t, rng), c = unit_in(t, rng);
      const auto local = b.local(z);
      const Vec formula = local.second_fundamental_form(a, c);
      worst = std::max(worst, (formula - b.direct_second_fundamental_form(z, a, c)).norm());
      asym = std::max(asym, (formula - local.second_fundamental_form(c, a)).norm());
    }
    CHECK(worst <= 1e-4);
    CHECK(asym <= 1e-4);
  }
}

TEST_CASE("second fundamental form vanishes for a constant map into a product") {
  std::mt19937_64 rng(55);
  const auto b = constant_over_product();
  const Vec z = b.random_point(rng);
  const Mat t = b.tangent_basis(z);
  const Vec a = unit_in(t, rng), c = unit_in(t, rng);
  CHECK(b.local(z).second_fundamental_form(a, c).norm() < 1e-10);
}

TEST_CASE("curvature: Gauss equation against the expansion") {
  std::mt19937_64 rng(56);
  const auto b = perturbed_hopf();
  for (int i = 0; i < 10; ++i) {
    const Vec z = b.random_point(rng);
    const Mat t = b.tangent_basis(z);
    const Vec v1 = unit_in(t, rng), v2 = unit_in(t, rng), v3 = unit_in(t, rng),
              v4 = unit_in(t, rng);
    const double direct = b.direct_curvature(z, v1, v2, v3, v4);
    CHECK(std::abs(direct - b.local(z).curvature(v1, v2, v3, v4)) <= 1e-3);
  }
}

TEST_CASE("constant map into a product: curvature splits into the factors") {
  std::mt19937_64 rng(57);
  const auto b = constant_over_product();
  const Vec z = b.random_point(rng);
  const Mat t = b.tangent_basis(z);
  const Vec v1 = unit_in(t, rng), v2 = unit_in(t, rng);
  // f*P = S^3 × {n} × S^1, so only the S^3 part of the plane carries curvature
  const Vec x = b.x_part(z);
  const double expected = riemann(sphere(3), x, b.x_part(v1), b.x_part(v2), b.x_part(v2),
                                  b.x_part(v1));
  CHECK(std::abs(b.local(z).curvature(v1, v2, v2, v1) - expected) < 1e-10);
  CHECK(std::abs(b.direct_curvature(z, v1, v2, v2, v1) - expected) < 1e-6);
}

TEST_CASE("the pull-back projection is a Riemannian submersion") {
  for (const auto& b : {pure_hopf(), perturbed_hopf(), constant_over_product()}) {
    const auto report = pullback_submersion_check(b, 100, 58);
    CHECK(report.samples == 100);
    CHECK(report.horizontal_isometry <= 1e-6);
    CHECK(report.normal_isometry <= 1e-6);
    CHECK(report.normal_to_graph <= 1e-6);
  }
}

TEST_CASE("metric reduction") {
  std::mt19937_64 rng(59);
  const auto eta = hopf_map(HopfFlavor::complex);
  SUBCASE("df = 0 leaves the metric unchanged") {
    const auto c = constant_map(sphere(3), sphere(2, 0.5), 0.5 * unit(3, 2));
    const Vec x = random_point(c.source, rng);
    const auto r = reduce_connection_metric(c, {}, 3.0, x);
    CHECK((r.reduced - tangent_projector(c.source, x)).norm() < 1e-14);
    CHECK(r.min_eigenvalue == doctest::Approx(1.0));
  }
  SUBCASE("Hopf map at epsilon 0.1") {
    // dη has singular values (1, 1, 0), so the reduced operator has eigenvalues 0.9, 0.9, 1
    const Vec x = random_point(eta.source, rng);
    const auto r = reduce_connection_metric(eta, {}, 0.1, x);
    CHECK(r.min_eigenvalue == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(r.max_epsilon == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.reconstruction_residual <= 1e-10);
    CHECK(r.level_set_residual <= 1e-12);
  }
  SUBCASE("non-induced metric, perturbed map") {
    const auto f = compose(eta, perturbation_diffeo(3, 0.3, axis_e1()));
    const MetricOperatorField g = [](const Vec& y) -> Mat {
      Mat m = Mat::Identity(4, 4) * 1.2;
      m(0, 0) += y(3) * y(3);
      return m;
    };
    const auto s = reduce_connection_metric(f, g, 0.05, 50, 3);
    CHECK(s.samples == 50);
    CHECK(s.min_eigenvalue > 0.0);
    CHECK(s.reconstruction_residual <= 1e-10);
    CHECK(s.level_set_residual <= 1e-12);
  }
  SUBCASE("inadmissible epsilon carries the bound") {
    try {
      reduce_connection_metric(eta, {}, 1.5, 20, 4);
      FAIL("expected InadmissibleEpsilon");
    } catch (const InadmissibleEpsilon& e) {
      CHECK(e.epsilon() == 1.5);
      CHECK(e.min_eigenvalue() == doctest::Approx(-0.5).epsilon(1e-8));
      CHECK(e.max_epsilon() == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("Lambda term") {
  std::mt19937_64 rng(60);
  const auto bundle = hopf_bundle(HopfFlavor::complex);
  for (int i = 0; i < 10; ++i) {
    const Vec p = random_point(bundle.total, rng);
    const ATensorTable table(bundle, p);
    const Vec h1 = unit_in(table.frame().horizontal, rng), h2 = unit_in(table.frame().horizontal, rng);
    const Vec u1 = unit_in(table.frame().vertical, rng), u2 = unit_in(table.frame().vertical, rng);
    CHECK(lambda_term(table, h1, h2).norm() < 1e-12);
    CHECK(lambda_term(table, u1, u2).norm() < 1e-12);
    CHECK(lambda_term(table, h1, u1).norm() == doctest::Approx(1.0).epsilon(1e-6));
    const Vec y = h1 + u1, y2 = h2 - 0.5 * u2;
    CHECK((lambda_term(table, y, y2) - lambda_term(table, y2, y)).norm() < 1e-12);
    CHECK((lambda_term(table, y, y2) - lambda_term(bundle, p, y, y2)).norm() < 1e-6);
  }
}
