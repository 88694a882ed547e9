/**
 * @file scenario.hpp
 * @brief Scenario configuration files and the base-map expression language.
 *
 * A scenario is a JSON object:
 *
 *     {
 *       "name": "hopf-positive",
 *       "bundle": "hopf_complex",
 *       "base_map": "compose(hopf, perturbed(0.3, e1))",
 *       "epsilon": 0.5,
 *       "samples": 200,
 *       "seed": 7,
 *       "fd_step": 1e-4,
 *       "kernel_directions": 20,
 *       "tolerances": { "obstruction": 1e-6 }
 *     }
 *
 * Base-map expressions are built against the manifold they must land in,
 * starting from the bundle base. Inner maps of compose() are built against
 * the source of the outer map.
 */
#pragma once

#include "sublab/obstruction.hpp"

#include <json.hpp>

#include <string>

namespace sublab {

/// Configuration problem; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ScenarioConfig {
  std::string name;
  std::string bundle;
  std::string base_map;
  double epsilon = 0.5;
  int samples = 200;
  std::uint64_t seed = 0;
  double fd_step = 1e-4;
  int kernel_directions = 20;
  TheoremTolerances tolerances;
};

ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& config);

/// Bundle names: hopf_complex, hopf_quaternionic, hopf_octonionic, trivial, broken_fixture.
RiemannianSubmersion make_bundle(const std::string& name);

/**
 * Parses and builds a base-map expression landing in @p target.
 *
 *   hopf                 Hopf map onto target (S^2, S^4 or S^8 of radius 1/2)
 *   identity             identity of target
 *   geodesic_fold(k)     geodesic k-fold of target about e0
 *   perturbed(d, axis)   x -> r (u + d a)/|u + d a|; axis is eK or [a0, a1, ...]
 *   constant[(m)]        constant map from the unit S^m (default dim target) to the north pole
 *   compose(g, h)        g o h
 */
SmoothMap parse_base_map(const std::string& expression, const EmbeddedManifold& target);

struct Scenario {
  ScenarioConfig config;
  RiemannianSubmersion bundle;
  SmoothMap base_map;
  FdOptions fd;
};

Scenario build_scenario(const ScenarioConfig& config);

}  // namespace sublab
