#include "sublab/runner.hpp"

#include "sublab/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace sublab {

using nlohmann::json;

namespace {

// Distinct sub-streams for the checks of one run.
enum Stream : std::uint64_t {
  kProjector = 1,
  kRetraction,
  kSymmetry,
  kXi,
  kNormal,
  kFiber,
  kHorizontal,
  kFat,
  kSubmersion,
  kMetric,
  kShape,
  kGauss,
  kFlat,
  kCross,
  kCurvature,
};

std::uint64_t stream_seed(std::uint64_t seed, Stream s) { return splitmix64(seed ^ (s * 0x9e37ULL)); }

std::string number(double v, int digits) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : v < 0 ? "-inf" : "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vec gaussian(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Vec g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = normal(rng);
  return g;
}

Vec unit_in(const Mat& basis, std::mt19937_64& rng) {
  Vec v = basis * gaussian(rng, basis.cols());
  return v / v.norm();
}

/// Largest value over samples with its witness; ties keep the lowest index.
struct Worst {
  double value = 0.0;
  json witness = nullptr;
  bool seen = false;

  void update(double v, json w) {
    if (!seen || v > value) {
      value = v;
      witness = std::move(w);
      seen = true;
    }
  }
};

struct Sampled {
  double value = 0.0;
  json witness;
};

template <class Fn>
Worst worst_over(int count, std::uint64_t seed, bool parallel, Fn&& fn) {
  auto results = map_samples<Sampled>(count, seed, std::forward<Fn>(fn), execution_for(parallel));
  Worst worst;
  for (auto& r : results) worst.update(r.value, std::move(r.witness));
  return worst;
}

CheckResult bounded(std::string name, const Worst& worst, double tolerance,
                    std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.value = worst.value;
  c.tolerance = tolerance;
  c.status = worst.value <= tolerance ? "pass" : "fail";
  c.detail = std::move(detail);
  c.witness = worst.witness;
  return c;
}

CheckResult info(std::string name, double value, std::string detail = {}, json witness = nullptr) {
  CheckResult c;
  c.name = std::move(name);
  c.status = "info";
  c.value = value;
  c.detail = std::move(detail);
  c.witness = std::move(witness);
  return c;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

RunReport start_report(const std::string& command, const ScenarioConfig& config) {
  RunReport r;
  r.command = command;
  r.scenario = config.name;
  r.config = to_json(config);
  return r;
}

json inadmissible_payload(const InadmissibleEpsilon& e) {
  return json{{"record", "eigenvalue_certificate"},
              {"epsilon", e.epsilon()},
              {"min_eigenvalue", e.min_eigenvalue()},
              {"max_epsilon", e.max_epsilon()}};
}

// -- validate ---------------------------------------------------------------

void projector_checks(const std::vector<const EmbeddedManifold*>& manifolds, int samples,
                      std::uint64_t seed, bool parallel, RunReport& report) {
  Worst idempotent, trace, retraction;
  for (const auto* m : manifolds) {
    const auto w1 = worst_over(samples, stream_seed(seed, kProjector), parallel,
                               [&](int, std::mt19937_64& rng) {
                                 const Vec x = random_point(*m, rng);
                                 const Mat p = tangent_projector(*m, x);
                                 const double e = std::max((p * p - p).norm(),
                                                           (p - p.transpose()).norm());
                                 return Sampled{e, json{{"manifold", m->name}, {"point", vec_json(x)}}};
                               });
    idempotent.update(w1.value, w1.witness);
    const auto w2 = worst_over(samples, stream_seed(seed, kProjector), parallel,
                               [&](int, std::mt19937_64& rng) {
                                 const Vec x = random_point(*m, rng);
                                 const double e =
                                     std::abs(tangent_projector(*m, x).trace() - m->intrinsic_dim);
                                 return Sampled{e, json{{"manifold", m->name}, {"point", vec_json(x)}}};
                               });
    trace.update(w2.value, w2.witness);
    const auto w3 = worst_over(samples, stream_seed(seed, kRetraction), parallel,
                               [&](int, std::mt19937_64& rng) {
                                 const Vec x = random_point(*m, rng);
                                 const double e = membership_residual(*m, x);
                                 return Sampled{e, json{{"manifold", m->name}, {"point", vec_json(x)}}};
                               });
    retraction.update(w3.value, w3.witness);
  }
  report.checks.push_back(bounded("core.projector_idempotent", idempotent, 1e-10,
                                  "max(|P^2 - P|, |P - P^T|)"));
  report.checks.push_back(bounded("core.projector_trace", trace, 1e-8, "|trace P - dim|"));
  report.checks.push_back(bounded("core.retraction_identity", retraction, 1e-14,
                                  "|R(x, 0) - x| at sampled points"));
}

}  // namespace

RunReport cmd_validate(const ScenarioConfig& config, bool parallel) {
  Stopwatch clock;
  RunReport report = start_report("validate", config);
  const Scenario scenario = build_scenario(config);
  const PullbackBundle bundle(scenario.base_map, scenario.bundle, scenario.fd);
  const auto& f = bundle.map();
  const auto& pi = bundle.submersion();
  const auto& tol = config.tolerances;
  const int n = config.samples;
  const std::uint64_t seed = config.seed;
  const FdOptions fd = scenario.fd;

  // core
  projector_checks({&pi.total, &pi.base, &f.source, &bundle.manifold()}, std::min(n, 50), seed,
                   parallel, report);
  {
    const auto w = worst_over(std::max(10, n / 10), stream_seed(seed, kSymmetry), parallel,
                              [&](int, std::mt19937_64& rng) {
                                const Vec z = bundle.random_point(rng);
                                const Mat q = bundle.tangent_basis(z);
                                const Vec a = q * gaussian(rng, q.cols());
                                const Vec b = q * gaussian(rng, q.cols());
                                const Vec c = q * gaussian(rng, q.cols());
                                const Vec d = q * gaussian(rng, q.cols());
                                const auto& m = bundle.manifold();
                                const double abcd = riemann(m, z, a, b, c, d, fd);
                                const double e = std::max(
                                    {std::abs(abcd + riemann(m, z, b, a, c, d, fd)),
                                     std::abs(abcd - riemann(m, z, c, d, a, b, fd)),
                                     std::abs(abcd + riemann(m, z, b, c, a, d, fd) +
                                              riemann(m, z, c, a, b, d, fd))});
                                return Sampled{e, json{{"point", vec_json(z)}}};
                              });
    report.checks.push_back(bounded("core.curvature_symmetries", w, 1e-6,
                                    "antisymmetry, pair symmetry and first Bianchi on f*P"));
  }

  // graph
  {
    const auto w = worst_over(n, stream_seed(seed, kXi), parallel, [&](int, std::mt19937_64& rng) {
      const Vec x = random_point(f.source, rng);
      const auto ops = graph_operators(f, x, fd);
      const Vec v = join(ops.source_basis * gaussian(rng, ops.source_basis.cols()),
                         ops.target_basis * gaussian(rng, ops.target_basis.cols()));
      const double e = (xi_inverse(ops, xi(ops, v)) - v).norm() / v.norm();
      return Sampled{e, json{{"point", vec_json(x)}, {"vector", vec_json(v)}}};
    });
    report.checks.push_back(bounded("graph.xi_inverse", w, 1e-10, "|Xi^-1 Xi v - v| / |v|"));
  }
  {
    const auto w = worst_over(n, stream_seed(seed, kNormal), parallel, [&](int, std::mt19937_64& rng) {
      const Vec x = random_point(f.source, rng);
      const auto ops = graph_operators(f, x, fd);
      const Vec v = join(ops.source_basis * gaussian(rng, ops.source_basis.cols()),
                         ops.target_basis * gaussian(rng, ops.target_basis.cols()));
      const Vec pr = normal_projection_graph(ops, v);
      double e = (normal_projection_graph(ops, pr) - pr).norm();
      for (Eigen::Index i = 0; i < ops.source_basis.cols(); ++i) {
        const Vec b = ops.source_basis.col(i);
        e = std::max(e, std::abs(pr.dot(join(b, ops.df_ambient() * b))));
      }
      return Sampled{e / v.norm(), json{{"point", vec_json(x)}, {"vector", vec_json(v)}}};
    });
    report.checks.push_back(bounded("graph.normal_projection", w, 1e-10,
                                    "idempotence and orthogonality to the graph, relative"));
  }

  // submersion
  {
    const auto g = totally_geodesic_fibers_check(pi, n, stream_seed(seed, kFiber), fd, parallel);
    Worst w;
    w.update(g.max_norm, json{{"point", vec_json(g.worst_point)}});
    report.checks.push_back(bounded("submersion.fiber_geodesic", w, 1e-6,
                                    "max |II_fiber(u_i, u_j)| on vertical frames"));
  }
  {
    const auto w = worst_over(n, stream_seed(seed, kHorizontal), parallel,
                              [&](int, std::mt19937_64& rng) {
                                const Vec p = random_point(pi.total, rng);
                                const auto frame = submersion_frame(pi, p, fd);
                                const Vec h = unit_in(frame.horizontal, rng);
                                const double e = std::abs((frame.dpi_ambient * h).norm() - 1.0);
                                return Sampled{e, json{{"point", vec_json(p)}, {"vector", vec_json(h)}}};
                              });
    report.checks.push_back(bounded("submersion.horizontal_isometry", w, 1e-8,
                                    "||dpi h| - 1| for unit horizontal h"));
  }
  {
    FatnessOptions options;
    options.points = std::min(n, 50);
    options.seed = stream_seed(seed, kFat);
    options.fat_tolerance = tol.fat;
    options.parallel = parallel;
    const auto fat = fatness(pi, options, fd);
    report.checks.push_back(info("submersion.fatness", fat.min_singular_value,
                                 fat.fat ? "fat" : "not fat",
                                 json{{"point", vec_json(fat.worst_point)},
                                      {"direction", vec_json(fat.worst_direction)}}));
  }

  // pullback
  {
    const auto s = pullback_submersion_check(bundle, n, stream_seed(seed, kSubmersion), parallel);
    Worst w;
    w.update(std::max({s.horizontal_isometry, s.normal_isometry, s.normal_to_graph}), nullptr);
    std::ostringstream detail;
    detail << "horizontal " << s.horizontal_isometry << ", normal " << s.normal_isometry
           << ", graph " << s.normal_to_graph;
    report.checks.push_back(bounded("pullback.riemannian_submersion", w, 1e-6, detail.str()));
  }
  try {
    const auto m = reduce_connection_metric(f, {}, config.epsilon, n, stream_seed(seed, kMetric),
                                            fd, parallel);
    Worst rec, lvl;
    rec.update(m.reconstruction_residual, nullptr);
    lvl.update(m.level_set_residual, nullptr);
    report.checks.push_back(bounded("pullback.metric_reconstruction", rec, 1e-10,
                                    "|g' + eps f*g_N - g| on basis pairs"));
    report.checks.push_back(bounded("pullback.metric_level_set", lvl, 1e-12,
                                    "|g'(X, .) - g(X, .)| for X in ker df"));
    report.checks.push_back(info("pullback.metric_min_eigenvalue", m.min_eigenvalue,
                                 "admissible epsilon < " + number(m.max_epsilon, 6),
                                 json{{"point", vec_json(m.worst_point)}}));
  } catch (const InadmissibleEpsilon& e) {
    RunReport err = error_report("validate", config.name, e.what(), inadmissible_payload(e));
    err.config = report.config;
    err.wall_clock_seconds = clock.seconds();
    return err;
  }
  {
    const auto w = worst_over(n, stream_seed(seed, kShape), parallel, [&](int, std::mt19937_64& rng) {
      const Vec z = bundle.random_point(rng);
      const Mat q = bundle.tangent_basis(z);
      const Vec a = unit_in(q, rng);
      const Vec b = unit_in(q, rng);
      const Vec formula = bundle.local(z).second_fundamental_form(a, b);
      const double e = (formula - bundle.direct_second_fundamental_form(z, a, b)).norm();
      return Sampled{e, json{{"point", vec_json(z)}, {"a", vec_json(a)}, {"b", vec_json(b)}}};
    });
    report.checks.push_back(bounded("pullback.second_fundamental_form", w, 1e-4,
                                    "closed form vs ambient second fundamental form"));
  }
  {
    const auto w = worst_over(n, stream_seed(seed, kGauss), parallel, [&](int, std::mt19937_64& rng) {
      const Vec z = bundle.random_point(rng);
      const Mat q = bundle.tangent_basis(z);
      const Vec a = unit_in(q, rng);
      const Vec b = unit_in(q, rng);
      const double e = std::abs(bundle.local(z).curvature(a, b, b, a) -
                                bundle.direct_curvature(z, a, b, b, a));
      return Sampled{e, json{{"point", vec_json(z)}, {"a", vec_json(a)}, {"b", vec_json(b)}}};
    });
    report.checks.push_back(bounded("pullback.curvature_formula", w, 1e-4,
                                    "product Gauss formula vs direct curvature"));
  }

  // obstruction identities
  {
    const auto w = worst_over(n, stream_seed(seed, kFlat), parallel, [&](int, std::mt19937_64& rng) {
      const Vec z = bundle.random_point(rng);
      const auto split = kernel_split(f, bundle.x_part(z), fd);
      if (split.numerically_singular || split.kernel.cols() == 0) return Sampled{0.0, nullptr};
      const Vec x_vec = unit_in(split.kernel, rng);
      const Vec u = unit_in(submersion_frame(pi, bundle.p_part(z), fd).vertical, rng);
      const double e = vertizontal_flat_check(bundle, z, x_vec, u);
      return Sampled{e, json{{"point", vec_json(z)}, {"X", vec_json(x_vec)}, {"U", vec_json(u)}}};
    });
    report.checks.push_back(bounded("obstruction.vertizontal_flat", w, tol.r1,
                                    "|R(U, X, X, U)| for X in ker df, U vertical"));
  }
  {
    const auto w = worst_over(n, stream_seed(seed, kCross), parallel, [&](int, std::mt19937_64& rng) {
      const Vec z = bundle.random_point(rng);
      const auto split = kernel_split(f, bundle.x_part(z), fd);
      if (split.numerically_singular || split.kernel.cols() == 0) return Sampled{0.0, nullptr};
      const Vec x_vec = unit_in(split.kernel, rng);
      const Vec u = unit_in(submersion_frame(pi, bundle.p_part(z), fd).vertical, rng);
      const Vec zv = split.complement.cols() ? unit_in(split.complement, rng)
                                             : Vec(Vec::Zero(x_vec.size()));
      const auto c = cross_term_check(bundle, z, x_vec, u, zv);
      return Sampled{std::abs(c.direct - c.formula),
                     json{{"point", vec_json(z)}, {"X", vec_json(x_vec)}, {"U", vec_json(u)},
                          {"Z", vec_json(zv)}, {"direct", c.direct}, {"formula", c.formula}}};
    });
    report.checks.push_back(bounded("obstruction.cross_term", w, tol.r2,
                                    "direct R(U, X, X, Z) vs A-tensor formula"));
  }

  const bool ok = std::none_of(report.checks.begin(), report.checks.end(),
                               [](const CheckResult& c) { return c.status == "fail"; });
  report.status = ok ? "PASS" : "FAIL";
  report.exit_code = ok ? 0 : 2;
  report.wall_clock_seconds = clock.seconds();
  return report;
}

// -- check ----------------------------------------------------------------------

namespace {

json certificate_json(const NegativePlaneCertificate& c) {
  return json{{"record", "certificate"},
              {"point", vec_json(c.point)},
              {"x_tilde", vec_json(c.x_tilde)},
              {"w_tilde", vec_json(c.w_tilde)},
              {"U", vec_json(c.u_vec)},
              {"Z", vec_json(c.z_vec)},
              {"t", c.t},
              {"cross_term", c.cross_term},
              {"r_xu", c.r_xu},
              {"r_xz", c.r_xz},
              {"quadratic", c.quadratic},
              {"predicted_sec", c.predicted_sec},
              {"sec_value", c.sec_value},
              {"relative_agreement", c.relative_agreement}};
}

}  // namespace

RunReport cmd_check(const ScenarioConfig& config, bool parallel) {
  Stopwatch clock;
  RunReport report = start_report("check", config);
  const Scenario scenario = build_scenario(config);
  const PullbackBundle bundle(scenario.base_map, scenario.bundle, scenario.fd);
  const auto& tol = config.tolerances;

  TheoremOptions options;
  options.samples = config.samples;
  options.kernel_directions = config.kernel_directions;
  options.seed = config.seed;
  options.epsilon = config.epsilon;
  options.tolerances = tol;
  options.parallel = parallel;

  ObstructionReport r;
  try {
    r = theorem_report(bundle, options);
  } catch (const InadmissibleEpsilon& e) {
    RunReport err = error_report("check", config.name, e.what(), inadmissible_payload(e));
    err.config = report.config;
    err.wall_clock_seconds = clock.seconds();
    return err;
  }

  json worst = nullptr;
  if (r.worst_sample >= 0) {
    const auto& s = r.samples[r.worst_sample];
    worst = json{{"sample", s.index}, {"point", vec_json(s.point)}, {"X", vec_json(s.x_vec)}};
  }
  auto bound = [](std::string name, double value, double tolerance, std::string detail,
                  json witness = nullptr) {
    Worst w;
    w.update(value, std::move(witness));
    return bounded(std::move(name), w, tolerance, std::move(detail));
  };
  report.checks.push_back(info("theorem.fatness", r.fatness.min_singular_value,
                               r.fatness.fat ? "fat" : "not fat"));
  report.checks.push_back(info("theorem.epsilon_min_eigenvalue", r.metric.min_eigenvalue,
                               "admissible epsilon < " + number(r.metric.max_epsilon, 6)));
  report.checks.push_back(info("theorem.regular_samples", r.regular_samples,
                               std::to_string(r.singular_samples) + " numerically singular"));
  report.checks.push_back(bound("theorem.obstruction", r.max_obstruction, tol.obstruction,
                                "max |A(L O d2f(X,X), L df Z)| over unit Z", worst));
  report.checks.push_back(bound("theorem.level_set_geodesy", r.max_level_set_II, tol.level_set,
                                "max |II| of regular level sets"));
  report.checks.push_back(bound("theorem.level_set_identity", r.max_level_set_identity_residual,
                                tol.level_set_identity, "|d2f(X,X) + df II(X,X)|"));
  report.checks.push_back(bound("theorem.vertizontal_flat", r.max_r1, tol.r1, "|R(U, X, X, U)|"));
  report.checks.push_back(bound("theorem.cross_term", r.max_r2, tol.r2,
                                "direct vs formula for R(U, X, X, Z)"));
  report.checks.push_back(bound("theorem.geodesic_implies_unobstructed",
                                r.geodesic_without_obstruction_failures, 0.0,
                                "samples with geodesic level set but nonzero obstruction"));
  if (r.fatness.fat) {
    report.checks.push_back(bound("theorem.xi_rank_biconditional", r.xi_biconditional_failures,
                                  0.0, "rank Xi_X = dim V  <=>  d2f(X,X) != 0"));
  }
  if (r.certificate) {
    const auto& c = *r.certificate;
    report.checks.push_back(bound("theorem.certificate_sec", c.sec_value, -tol.certificate_sec,
                                  "direct sectional curvature of span(X, tU + Z)"));
    report.checks.push_back(bound("theorem.certificate_agreement", c.relative_agreement,
                                  tol.prediction_agreement,
                                  "relative gap between expansion and direct value"));
    report.records.push_back(certificate_json(c));
  }
  report.status = std::string(to_string(r.verdict));
  report.exit_code = r.verdict == Verdict::consistent ? 0 : r.verdict == Verdict::violated ? 2 : 1;
  report.wall_clock_seconds = clock.seconds();
  return report;
}

// -- curvature --------------------------------------------------------------

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

RunReport cmd_curvature(const ScenarioConfig& config, bool parallel) {
  Stopwatch clock;
  RunReport report = start_report("curvature", config);
  const Scenario scenario = build_scenario(config);
  const PullbackBundle bundle(scenario.base_map, scenario.bundle, scenario.fd);

  struct Plane {
    double sec = 0.0;
    Vec point, a, b;
  };
  const auto planes = map_samples<Plane>(
      config.samples, stream_seed(config.seed, kCurvature),
      [&](int, std::mt19937_64& rng) {
        Plane p;
        p.point = bundle.random_point(rng);
        const Mat q = bundle.tangent_basis(p.point);
        Mat span(q.rows(), 2);
        span.col(0) = q * gaussian(rng, q.cols());
        span.col(1) = q * gaussian(rng, q.cols());
        const Mat on = orthonormal_columns(span, 2);
        p.a = on.col(0);
        p.b = on.col(1);
        p.sec = sectional_curvature(bundle.manifold(), p.point, p.a, p.b, bundle.fd());
        return p;
      },
      execution_for(parallel));

  std::vector<double> values;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    values.push_back(planes[i].sec);
    if (planes[i].sec < planes[worst].sec) worst = i;
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const auto& w = planes[worst];
  const json witness{{"point", vec_json(w.point)}, {"a", vec_json(w.a)}, {"b", vec_json(w.b)}};

  static const std::pair<const char*, double> kQuantiles[] = {
      {"q05", 0.05}, {"q25", 0.25}, {"median", 0.5}, {"q75", 0.75}, {"q95", 0.95}};
  report.checks.push_back(info("curvature.min", sorted.front(), "worst plane attached", witness));
  for (const auto& [label, q] : kQuantiles) {
    report.checks.push_back(info(std::string("curvature.") + label, quantile(sorted, q)));
  }
  report.checks.push_back(info("curvature.max", sorted.back()));
  double mean = 0.0;
  for (double v : values) mean += v;
  report.checks.push_back(info("curvature.mean", mean / static_cast<double>(values.size())));

  json table{{"record", "curvature_table"}, {"planes", values.size()}, {"min", sorted.front()},
             {"max", sorted.back()}, {"worst_plane", witness}};
  for (const auto& [label, q] : kQuantiles) table[label] = quantile(sorted, q);
  report.records.push_back(table);
  report.status = "PASS";
  report.exit_code = 0;
  report.wall_clock_seconds = clock.seconds();
  return report;
}

RunReport error_report(const std::string& command, const std::string& scenario,
                       const std::string& message, json payload) {
  RunReport r;
  r.command = command;
  r.scenario = scenario;
  r.config = nullptr;
  r.status = "ERROR";
  r.exit_code = 1;
  json record{{"record", "error"}, {"message", message}};
  r.records.push_back(record);
  if (!payload.is_null()) r.records.push_back(std::move(payload));
  return r;
}

// -- rendering ----------------------------------------------------------------

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "md") return ReportFormat::md;
  throw std::invalid_argument("unknown format '" + name + "' (expected json, csv or md)");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

json json_number(double v) { return std::isfinite(v) ? json(v) : json(number(v, 17)); }

}  // namespace

std::string render(const RunReport& report, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::json: {
      out << json{{"record", "run"},       {"tool", kToolName},
                  {"version", kToolVersion}, {"command", report.command},
                  {"scenario", report.scenario}, {"config", report.config}}
                 .dump()
          << '\n';
      for (const auto& c : report.checks) {
        json row{{"record", "check"}, {"name", c.name},       {"status", c.status},
                 {"value", json_number(c.value)}, {"tolerance", nullptr}, {"detail", c.detail}};
        if (c.tolerance) row["tolerance"] = json_number(*c.tolerance);
        if (!c.witness.is_null()) row["witness"] = c.witness;
        out << row.dump() << '\n';
      }
      for (const auto& r : report.records) out << r.dump() << '\n';
      out << json{{"record", "summary"}, {"status", report.status}, {"exit_code", report.exit_code}}
                 .dump()
          << '\n';
      out << json{{"record", "timing"}, {"wall_clock_seconds", report.wall_clock_seconds}}.dump()
          << '\n';
      break;
    }
    case ReportFormat::csv: {
      out << "scenario,command,check,status,value,tolerance,detail\n";
      const std::string prefix = csv_field(report.scenario) + "," + report.command + ",";
      for (const auto& c : report.checks) {
        out << prefix << csv_field(c.name) << ',' << c.status << ',' << number(c.value, 17) << ','
            << (c.tolerance ? number(*c.tolerance, 17) : "") << ',' << csv_field(c.detail) << '\n';
      }
      for (const auto& r : report.records) {
        if (r.value("record", "") == "error") {
          out << prefix << "error,fail,,," << csv_field(r.value("message", "")) << '\n';
        }
      }
      out << prefix << "summary," << report.status << ',' << report.exit_code << ",,\n";
      out << prefix << "wall_clock_seconds,info," << number(report.wall_clock_seconds, 6) << ",,\n";
      break;
    }
    case ReportFormat::md: {
      out << "## " << md_cell(report.scenario) << " (" << report.command << ")\n\n";
      out << "| check | status | value | tolerance | detail |\n";
      out << "|---|---|---|---|---|\n";
      for (const auto& c : report.checks) {
        out << "| " << md_cell(c.name) << " | " << c.status << " | " << number(c.value, 6) << " | "
            << (c.tolerance ? number(*c.tolerance, 3) : "") << " | " << md_cell(c.detail) << " |\n";
      }
      for (const auto& r : report.records) {
        if (r.value("record", "") == "error") {
          out << "\nError: " << r.value("message", "") << "\n";
        } else if (r.value("record", "") == "certificate") {
          out << "\nNegative plane: sectional curvature " << number(r["sec_value"].get<double>(), 6)
              << " (expansion " << number(r["predicted_sec"].get<double>(), 6) << ", t = "
              << number(r["t"].get<double>(), 6) << ")\n";
        }
      }
      out << "\nStatus: **" << report.status << "** (exit " << report.exit_code << ")\n";
      out << "\nWall clock: " << number(report.wall_clock_seconds, 3) << " s\n";
      break;
    }
  }
  return out.str();
}

// -- report merging --------------------------------------------------------------

namespace {

const json& field(const json& record, const char* key, const std::string& where) {
  if (!record.contains(key)) throw ReportError(where + ": missing field '" + key + "'");
  return record[key];
}

std::string string_field(const json& record, const char* key, const std::string& where) {
  const json& v = field(record, key, where);
  if (!v.is_string()) throw ReportError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::optional<double> number_field(const json& record, const char* key, const std::string& where) {
  const json& v = field(record, key, where);
  if (v.is_null()) return std::nullopt;
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ReportError(where + ": field '" + key + "' must be a number");
}

}  // namespace

std::vector<ReportRow> read_run_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ReportError(path + ": cannot open run file");
  std::vector<ReportRow> rows;
  std::string scenario, command;
  bool have_run = false;
  std::string line;
  int number_of_line = 0;
  while (std::getline(in, line)) {
    ++number_of_line;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(number_of_line);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error&) {
      throw ReportError(where + ": not a JSON record");
    }
    if (!record.is_object()) throw ReportError(where + ": not a JSON object");
    const std::string kind = string_field(record, "record", where);
    if (kind == "run") {
      scenario = string_field(record, "scenario", where);
      command = string_field(record, "command", where);
      have_run = true;
      continue;
    }
    if (kind != "check" && kind != "summary") continue;
    if (!have_run) throw ReportError(where + ": field 'record' = '" + kind + "' before the run record");
    ReportRow row;
    row.scenario = scenario;
    row.command = command;
    if (kind == "check") {
      row.check = string_field(record, "name", where);
      row.status = string_field(record, "status", where);
      row.value = number_field(record, "value", where);
      row.tolerance = number_field(record, "tolerance", where);
    } else {
      row.check = "summary";
      row.status = string_field(record, "status", where);
      const json& code = field(record, "exit_code", where);
      if (!code.is_number_integer()) throw ReportError(where + ": field 'exit_code' must be an integer");
      row.value = code.get<double>();
    }
    rows.push_back(std::move(row));
  }
  if (!have_run) throw ReportError(path + ": missing field 'record' = 'run'");
  return rows;
}

std::vector<ReportRow> merge_run_files(const std::vector<std::string>& paths) {
  std::vector<ReportRow> rows;
  for (const auto& p : paths) {
    auto more = read_run_file(p);
    rows.insert(rows.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.scenario < b.scenario; });
  return rows;
}

std::string render_rows(const std::vector<ReportRow>& rows, ReportFormat format) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v, int digits) {
    return v ? number(*v, digits) : std::string();
  };
  switch (format) {
    case ReportFormat::json:
      for (const auto& r : rows) {
        json row{{"scenario", r.scenario}, {"command", r.command}, {"check", r.check},
                 {"status", r.status},     {"value", nullptr},     {"tolerance", nullptr}};
        if (r.value) row["value"] = json_number(*r.value);
        if (r.tolerance) row["tolerance"] = json_number(*r.tolerance);
        out << row.dump() << '\n';
      }
      break;
    case ReportFormat::csv:
      out << "scenario,command,check,status,value,tolerance\n";
      for (const auto& r : rows) {
        out << csv_field(r.scenario) << ',' << r.command << ',' << csv_field(r.check) << ','
            << r.status << ',' << opt(r.value, 17) << ',' << opt(r.tolerance, 17) << '\n';
      }
      break;
    case ReportFormat::md:
      out << "| scenario | command | check | status | value | tolerance |\n";
      out << "|---|---|---|---|---|---|\n";
      for (const auto& r : rows) {
        out << "| " << md_cell(r.scenario) << " | " << r.command << " | " << md_cell(r.check)
            << " | " << r.status << " | " << opt(r.value, 6) << " | " << opt(r.tolerance, 3)
            << " |\n";
      }
      break;
  }
  return out.str();
}

}  // namespace sublab
