#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "sublab/geometries.hpp"
#include "sublab/graph_geometry.hpp"

#include <cmath>

using namespace sublab;
using testing_support::brute_force_normal;
using testing_support::gaussian;
using testing_support::unit;

namespace {

std::vector<SmoothMap> sample_maps() {
  Mat a(2, 3);
  a << 1.0, -0.5, 2.0, 0.3, 0.7, -1.2;
  Vec axis = Vec::Zero(4);
  axis(1) = 1.0;
  return {linear_map(a),
          hopf_map(HopfFlavor::complex),
          geodesic_k_fold(3, 2),
          perturbation_diffeo(3, 0.3, axis),
          compose(hopf_map(HopfFlavor::complex), perturbation_diffeo(3, 0.3, axis)),
          hopf_map(HopfFlavor::quaternionic)};
}

Vec random_pair(const GraphOperators& ops, std::mt19937_64& rng) {
  return join(ops.source_basis * gaussian(rng, ops.source_basis.cols()),
              ops.target_basis * gaussian(rng, ops.target_basis.cols()));
}

}  // namespace

TEST_CASE("normal projection of the graph agrees with Gram-Schmidt") {
  std::mt19937_64 rng(11);
  const auto maps = sample_maps();
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto& f = maps[i % maps.size()];
    const Vec x = random_point(f.source, rng);
    const auto ops = graph_operators(f, x);
    const Vec v = random_pair(ops, rng);
    worst = std::max(worst, (normal_projection_graph(ops, v) - brute_force_normal(f, x, v)).norm());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("O is the inverse of 1 + df df-dagger and is symmetric positive") {
  std::mt19937_64 rng(12);
  for (const auto& f : sample_maps()) {
    const auto ops = graph_operators(f, random_point(f.source, rng));
    const auto n = ops.o.rows();
    CHECK((ops.o * (Mat::Identity(n, n) + ops.df * ops.df_dagger) - Mat::Identity(n, n)).norm() <
          1e-12);
    CHECK((ops.o - ops.o.transpose()).norm() < 1e-14);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(ops.o).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("Xi block inverse and orthogonality of its two parts") {
  std::mt19937_64 rng(13);
  for (const auto& f : sample_maps()) {
    const Vec x = random_point(f.source, rng);
    const auto ops = graph_operators(f, x);
    for (int i = 0; i < 10; ++i) {
      const Vec v = random_pair(ops, rng);
      CHECK((xi_inverse(ops, xi(ops, v)) - v).norm() < 1e-12 * v.norm() + 1e-14);
      CHECK((xi(ops, xi_inverse(ops, v)) - v).norm() < 1e-12 * v.norm() + 1e-14);
      const Vec tangent = xi(ops, join(v.head(ops.source_ambient()), Vec::Zero(ops.target_ambient())));
      const Vec normal = xi_normal(ops, v.tail(ops.target_ambient()));
      CHECK(std::abs(tangent.dot(normal)) < 1e-12);
      CHECK((graph_pi(ops, tangent)).norm() < 1e-12);
    }
  }
}

TEST_CASE("df-dagger is the metric adjoint for non-induced metrics") {
  std::mt19937_64 rng(14);
  const auto f = hopf_map(HopfFlavor::complex);
  const MetricOperatorField gm = [](const Vec& x) -> Mat {
    Mat g = Mat::Identity(4, 4);
    g(0, 0) = 2.0 + x(1) * x(1);
    g(1, 2) = g(2, 1) = 0.3;
    return g;
  };
  const MetricOperatorField gn = [](const Vec& y) -> Mat {
    Mat g = 1.5 * Mat::Identity(3, 3);
    g(2, 2) = 1.0 + y(0) * y(0);
    return g;
  };
  for (int i = 0; i < 10; ++i) {
    const Vec x = random_point(f.source, rng);
    const Mat dagger = df_dagger(f, x, gm, gn);
    const Mat df = tangent_jacobian(f, x);
    const Vec X = random_tangent(f.source, x, rng);
    const Vec Y = random_tangent(f.target, f(x), rng);
    CHECK(std::abs((gm(x) * (dagger * Y)).dot(X) - (gn(f(x)) * Y).dot(df * X)) < 1e-12);
  }
  // induced metrics reduce to the transpose
  const Vec x = random_point(f.source, rng);
  CHECK((df_dagger(f, x) - tangent_jacobian(f, x).transpose()).norm() < 1e-12);
}

TEST_CASE("ill-conditioned metrics are rejected") {
  const auto f = hopf_map(HopfFlavor::complex);
  const MetricOperatorField bad = [](const Vec&) -> Mat {
    Vec d(4);
    d << 1.0, 1.0, 1e-14, 1.0;  // tangent space at e0 is spanned by e1, e2, e3
    return Mat(d.asDiagonal());
  };
  CHECK_THROWS_AS(df_dagger(f, unit(4, 0), bad), IllConditioned);
}

TEST_CASE("d2f: analytic and finite-difference paths agree") {
  std::mt19937_64 rng(15);
  for (const auto& f : sample_maps()) {
    const auto fd_map = without_analytic_derivatives(f);
    for (int i = 0; i < 5; ++i) {
      const Vec x = random_point(f.source, rng);
      const Vec a = random_tangent(f.source, x, rng);
      const Vec b = random_tangent(f.source, x, rng);
      const Vec analytic = d2f(f, x, a, b);
      CHECK((analytic - d2f(fd_map, x, a, b)).norm() < 1e-6);
      CHECK((analytic - d2f(f, x, b, a)).norm() < 1e-10);
    }
  }
}

TEST_CASE("d2f vanishes for linear maps and the identity") {
  std::mt19937_64 rng(16);
  Mat a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const auto lin = linear_map(a);
  const Vec x = gaussian(rng, 3);
  CHECK(d2f(lin, x, unit(3, 0), unit(3, 2)).norm() < 1e-12);
  const auto id = identity_map(sphere(3));
  const Vec y = random_point(sphere(3), rng);
  const Vec v = random_tangent(sphere(3), y, rng);
  CHECK(d2f(id, y, v, v).norm() < 1e-12);
}

TEST_CASE("graph second fundamental form matches the embedded graph") {
  std::mt19937_64 rng(17);
  for (const auto& f : sample_maps()) {
    const auto graph = graph_manifold(f);
    for (int i = 0; i < 3; ++i) {
      const Vec x = random_point(f.source, rng);
      const Vec z = join(x, f(x));
      const Vec a = random_tangent(f.source, x, rng);
      const Vec b = random_tangent(f.source, x, rng);
      const Mat j = tangent_jacobian(f, x);
      const Vec ta = join(a, j * a), tb = join(b, j * b);
      const Vec direct = second_fundamental_form(graph, z, ta, tb);
      // the direct form also carries the normal curvature of M×N; project it away
      const auto ops = graph_operators(f, x);
      const Vec restricted = normal_projection_graph(
          ops, join(tangent_projector(f.source, x) * direct.head(x.size()),
                    tangent_projector(f.target, f(x)) * direct.tail(f(x).size())));
      CHECK((graph_second_fundamental_form(f, x, a, b) - restricted).norm() < 1e-6);
    }
  }
}
