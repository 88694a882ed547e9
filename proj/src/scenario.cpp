#include "sublab/scenario.hpp"

#include "sublab/geometries.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <variant>

namespace sublab {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? message : "field '" + field + "': " + message),
      field_(std::move(field)) {}

namespace {

// -- tolerances ------------------------------------------------------------

struct ToleranceSlot {
  const char* key;
  double TheoremTolerances::*member;
};

constexpr ToleranceSlot kToleranceSlots[] = {
    {"obstruction", &TheoremTolerances::obstruction},
    {"level_set", &TheoremTolerances::level_set},
    {"cross", &TheoremTolerances::cross},
    {"r1", &TheoremTolerances::r1},
    {"r2", &TheoremTolerances::r2},
    {"xi_rank", &TheoremTolerances::xi_rank},
    {"certificate_sec", &TheoremTolerances::certificate_sec},
    {"prediction_agreement", &TheoremTolerances::prediction_agreement},
    {"level_set_identity", &TheoremTolerances::level_set_identity},
    {"fat", &TheoremTolerances::fat},
};

double positive_number(const json& value, const std::string& field) {
  if (!value.is_number()) throw ConfigError(field, "expected a number");
  const double v = value.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive and finite");
  return v;
}

int positive_int(const json& value, const std::string& field) {
  if (!value.is_number_integer()) throw ConfigError(field, "expected an integer");
  const auto v = value.get<long long>();
  if (v < 1 || v > 10'000'000) throw ConfigError(field, "must be between 1 and 1e7");
  return static_cast<int>(v);
}

std::string required_string(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(key, "missing");
  if (!doc[key].is_string()) throw ConfigError(key, "expected a string");
  return doc[key].get<std::string>();
}

// -- expression parser -----------------------------------------------------

struct Node;
using Arg = std::variant<double, std::vector<double>, Node>;

struct Node {
  std::string head;
  std::vector<Arg> args;
  bool call = false;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Node parse() {
    Node node = parse_node();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("base_map", what + " at offset " + std::to_string(pos_) + " in '" + text_ + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool at_number() {
    skip_space();
    if (pos_ >= text_.size()) return false;
    const char c = text_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }

  double number() {
    skip_space();
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  Node parse_node() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    Node node;
    node.head = text_.substr(start, pos_ - start);
    if (accept('(')) {
      node.call = true;
      if (!accept(')')) {
        do {
          node.args.push_back(parse_arg());
        } while (accept(','));
        expect(')');
      }
    }
    return node;
  }

  Arg parse_arg() {
    if (accept('[')) {
      std::vector<double> values;
      if (!accept(']')) {
        do {
          values.push_back(number());
        } while (accept(','));
        expect(']');
      }
      return values;
    }
    if (at_number()) return number();
    return parse_node();
  }

  std::string text_;
  std::size_t pos_ = 0;
};

// -- map builders -----------------------------------------------------------

double sphere_radius(const EmbeddedManifold& m) {
  if (m.ambient_dim != m.intrinsic_dim + 1 || !m.sampler) {
    throw ConfigError("base_map", "target " + m.name + " is not a round sphere");
  }
  std::mt19937_64 rng(0);
  const Vec x = m.sampler(rng);
  const double r = x.norm();
  const Mat expected = Mat::Identity(x.size(), x.size()) - x * x.transpose() / (r * r);
  if ((m.projector(x) - expected).norm() > 1e-10) {
    throw ConfigError("base_map", "target " + m.name + " is not a round sphere");
  }
  return r;
}

void arity(const Node& node, std::size_t lo, std::size_t hi) {
  if (node.args.size() < lo || node.args.size() > hi) {
    throw ConfigError("base_map", node.head + " takes " + std::to_string(lo) +
                                      (lo == hi ? "" : "-" + std::to_string(hi)) + " arguments");
  }
}

double number_arg(const Node& node, std::size_t i) {
  if (const auto* v = std::get_if<double>(&node.args[i])) return *v;
  throw ConfigError("base_map", node.head + ": argument " + std::to_string(i + 1) +
                                    " must be a number");
}

int int_arg(const Node& node, std::size_t i) {
  const double v = number_arg(node, i);
  if (v != std::floor(v) || v < 0 || v > 1e6) {
    throw ConfigError("base_map", node.head + ": argument " + std::to_string(i + 1) +
                                      " must be a non-negative integer");
  }
  return static_cast<int>(v);
}

Vec axis_arg(const Node& node, std::size_t i, int ambient) {
  const Arg& arg = node.args[i];
  if (const auto* values = std::get_if<std::vector<double>>(&arg)) {
    if (static_cast<int>(values->size()) != ambient) {
      throw ConfigError("base_map", "axis needs " + std::to_string(ambient) + " components");
    }
    return Eigen::Map<const Vec>(values->data(), ambient);
  }
  if (const auto* name = std::get_if<Node>(&arg)) {
    const std::string& h = name->head;
    if (!name->call && h.size() > 1 && h[0] == 'e' &&
        h.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int k = std::stoi(h.substr(1));
      if (k >= ambient) {
        throw ConfigError("base_map", "axis " + h + " out of range for R^" + std::to_string(ambient));
      }
      return Vec::Unit(ambient, k);
    }
  }
  throw ConfigError("base_map", "axis must be eK or a list of numbers");
}

SmoothMap build(const Node& node, const EmbeddedManifold& target);

SmoothMap build_checked(const Node& node, const EmbeddedManifold& target) {
  try {
    return build(node, target);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("base_map", node.head + ": " + e.what());
  }
}

SmoothMap build(const Node& node, const EmbeddedManifold& target) {
  const std::string& h = node.head;
  if (h == "hopf") {
    arity(node, 0, 0);
    const double r = sphere_radius(target);
    if (std::abs(r - 0.5) > 1e-12) {
      throw ConfigError("base_map", "hopf needs a target sphere of radius 1/2, got " + target.name);
    }
    switch (target.intrinsic_dim) {
      case 2: return hopf_map(HopfFlavor::complex);
      case 4: return hopf_map(HopfFlavor::quaternionic);
      case 8: return hopf_map(HopfFlavor::octonionic);
      default: throw ConfigError("base_map", "no Hopf map onto " + target.name);
    }
  }
  if (h == "identity") {
    arity(node, 0, 0);
    return identity_map(target);
  }
  if (h == "geodesic_fold") {
    arity(node, 1, 1);
    const double r = sphere_radius(target);
    return geodesic_k_fold(target.intrinsic_dim, int_arg(node, 0), r);
  }
  if (h == "perturbed") {
    arity(node, 2, 2);
    const double r = sphere_radius(target);
    return perturbation_diffeo(target.intrinsic_dim, number_arg(node, 0),
                               axis_arg(node, 1, target.ambient_dim), r);
  }
  if (h == "constant") {
    arity(node, 0, 1);
    const double r = sphere_radius(target);
    const int m = node.args.empty() ? target.intrinsic_dim : int_arg(node, 0);
    if (m < 1) throw ConfigError("base_map", "constant needs a source dimension >= 1");
    return constant_map(sphere(m), target, r * Vec::Unit(target.ambient_dim, target.ambient_dim - 1));
  }
  if (h == "compose") {
    arity(node, 2, 2);
    const auto* outer_node = std::get_if<Node>(&node.args[0]);
    const auto* inner_node = std::get_if<Node>(&node.args[1]);
    if (!outer_node || !inner_node) throw ConfigError("base_map", "compose takes two maps");
    const SmoothMap outer = build_checked(*outer_node, target);
    const SmoothMap inner = build_checked(*inner_node, outer.source);
    return compose(outer, inner);
  }
  throw ConfigError("base_map", "unknown map '" + h + "'");
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "scenario must be a JSON object");
  static const char* known[] = {"name", "bundle", "base_map", "epsilon", "samples",
                                "seed", "fd_step", "kernel_directions", "tolerances"};
  for (const auto& item : doc.items()) {
    if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
      throw ConfigError(item.key(), "unknown field");
    }
  }
  ScenarioConfig c;
  c.name = required_string(doc, "name");
  c.bundle = required_string(doc, "bundle");
  c.base_map = required_string(doc, "base_map");
  if (doc.contains("epsilon")) c.epsilon = positive_number(doc["epsilon"], "epsilon");
  if (doc.contains("samples")) c.samples = positive_int(doc["samples"], "samples");
  if (doc.contains("kernel_directions")) {
    c.kernel_directions = positive_int(doc["kernel_directions"], "kernel_directions");
  }
  if (doc.contains("fd_step")) c.fd_step = positive_number(doc["fd_step"], "fd_step");
  if (doc.contains("seed")) {
    const auto& s = doc["seed"];
    if (!s.is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances", "expected an object");
    for (const auto& item : t.items()) {
      const std::string field = "tolerances." + item.key();
      auto slot = std::find_if(std::begin(kToleranceSlots), std::end(kToleranceSlots),
                               [&](const ToleranceSlot& s) { return item.key() == s.key; });
      if (slot == std::end(kToleranceSlots)) throw ConfigError(field, "unknown tolerance");
      c.tolerances.*(slot->member) = positive_number(item.value(), field);
    }
  }
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

json to_json(const ScenarioConfig& c) {
  json tol = json::object();
  for (const auto& slot : kToleranceSlots) tol[slot.key] = c.tolerances.*(slot.member);
  return json{{"name", c.name},
              {"bundle", c.bundle},
              {"base_map", c.base_map},
              {"epsilon", c.epsilon},
              {"samples", c.samples},
              {"seed", c.seed},
              {"fd_step", c.fd_step},
              {"kernel_directions", c.kernel_directions},
              {"tolerances", tol}};
}

RiemannianSubmersion make_bundle(const std::string& name) {
  if (name == "hopf_complex") return hopf_bundle(HopfFlavor::complex);
  if (name == "hopf_quaternionic") return hopf_bundle(HopfFlavor::quaternionic);
  if (name == "hopf_octonionic") return hopf_bundle(HopfFlavor::octonionic);
  if (name == "trivial") return trivial_bundle(sphere(2, 0.5), sphere(1), Vec::Unit(2, 0));
  if (name == "broken_fixture") return broken_fixture_bundle();
  throw ConfigError("bundle", "unknown bundle '" + name + "'");
}

SmoothMap parse_base_map(const std::string& expression, const EmbeddedManifold& target) {
  return build_checked(Parser(expression).parse(), target);
}

Scenario build_scenario(const ScenarioConfig& config) {
  Scenario s;
  s.config = config;
  s.bundle = make_bundle(config.bundle);
  s.base_map = parse_base_map(config.base_map, s.bundle.base);
  s.fd = FdOptions{config.fd_step, true};
  return s;
}

}  // namespace sublab
