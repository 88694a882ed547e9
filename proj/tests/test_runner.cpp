#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sublab/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sublab;
using nlohmann::json;

namespace {

std::string config_path(const std::string& name) {
  return std::string(SUBLAB_CONFIG_DIR) + "/" + name + ".json";
}

ScenarioConfig small(const std::string& name, int samples = 20) {
  auto c = load_scenario(config_path(name));
  c.samples = samples;
  c.kernel_directions = 4;
  return c;
}

json minimal_config() {
  return json{{"name", "t"}, {"bundle", "hopf_complex"}, {"base_map", "hopf"}};
}

std::string field_of(const json& doc) {
  try {
    build_scenario(parse_scenario(doc));
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

// Rendered output minus the lines that carry elapsed time.
std::string without_timing(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.find("\"timing\"") != std::string::npos) continue;
    if (line.find("wall_clock") != std::string::npos) continue;
    if (line.find("Wall clock") != std::string::npos) continue;
    out += line + '\n';
  }
  return out;
}

const CheckResult* find_check(const RunReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "submersion_lab_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("scenario parsing: defaults and round trip") {
  const auto c = parse_scenario(minimal_config());
  CHECK(c.samples == 200);
  CHECK(c.kernel_directions == 20);
  CHECK(c.fd_step == 1e-4);
  const auto again = parse_scenario(to_json(c));
  CHECK(to_json(again) == to_json(c));
}

TEST_CASE("scenario errors name the offending field") {
  auto doc = minimal_config();
  doc.erase("bundle");
  CHECK(field_of(doc) == "bundle");

  doc = minimal_config();
  doc["samples"] = -3;
  CHECK(field_of(doc) == "samples");

  doc = minimal_config();
  doc["epsilon"] = "big";
  CHECK(field_of(doc) == "epsilon");

  doc = minimal_config();
  doc["colour"] = 1;
  CHECK(field_of(doc) == "colour");

  doc = minimal_config();
  doc["tolerances"] = {{"r9", 1e-3}};
  CHECK(field_of(doc) == "tolerances.r9");

  doc = minimal_config();
  doc["bundle"] = "hopf_sedenion";
  CHECK(field_of(doc) == "bundle");

  doc = minimal_config();
  doc["base_map"] = "compose(hopf";
  CHECK_THROWS_AS(build_scenario(parse_scenario(doc)), ConfigError);

  CHECK_THROWS_AS(load_scenario(config_path("does_not_exist")), ConfigError);
}

TEST_CASE("base map expressions") {
  const auto target = make_bundle("hopf_complex").base;
  CHECK(parse_base_map("hopf", target).source.intrinsic_dim == 3);
  CHECK(parse_base_map("compose(hopf, perturbed(0.3, e1))", target).source.ambient_dim == 4);
  CHECK(parse_base_map("compose(geodesic_fold(2), hopf)", target).target.intrinsic_dim == 2);
  CHECK(parse_base_map("identity", target).source.intrinsic_dim == 2);
  CHECK(parse_base_map("constant(3)", target).source.intrinsic_dim == 3);
  CHECK_THROWS_AS(parse_base_map("perturbed(1.5, e1)", target), ConfigError);
  CHECK_THROWS_AS(parse_base_map("frobnicate", target), ConfigError);
  CHECK_THROWS_AS(parse_base_map("hopf extra", target), ConfigError);
  // the fixture base is the unit sphere, which no Hopf map reaches
  CHECK_THROWS_AS(parse_base_map("hopf", make_bundle("broken_fixture").base), ConfigError);
  CHECK(parse_base_map("hopf", make_bundle("hopf_quaternionic").base).source.intrinsic_dim == 7);
}

TEST_CASE("validate: trivial product passes, broken fixture fails") {
  const auto ok = cmd_validate(small("trivial_product"));
  CHECK(ok.exit_code == 0);
  for (const auto& c : ok.checks) {
    CAPTURE(c.name);
    CHECK(c.status != "fail");
  }
  const auto broken = cmd_validate(small("broken_fixture"));
  CHECK(broken.exit_code == 2);
  const auto* geo = find_check(broken, "submersion.fiber_geodesic");
  REQUIRE(geo != nullptr);
  CHECK(geo->status == "fail");
  CHECK(geo->value > 0.1);
  CHECK(geo->witness.contains("point"));
}

TEST_CASE("validate: Hopf scenarios pass") {
  for (const char* name : {"hopf_positive", "hopf_perturbed"}) {
    CAPTURE(name);
    const auto r = cmd_validate(small(name));
    for (const auto& c : r.checks) {
      CAPTURE(c.name);
      CHECK(c.status != "fail");
    }
    CHECK(r.exit_code == 0);
  }
}

TEST_CASE("check: exit codes follow the verdict") {
  CHECK(cmd_check(small("hopf_positive")).exit_code == 0);
  const auto violated = cmd_check(small("hopf_perturbed", 30));
  CHECK(violated.exit_code == 2);
  bool has_certificate = false;
  for (const auto& r : violated.records) {
    if (r.value("record", "") == "certificate") {
      has_certificate = true;
      CHECK(r.at("sec_value").get<double>() < -1e-6);
    }
  }
  CHECK(has_certificate);
  CHECK(cmd_check(small("constant_map")).exit_code == 0);
  const auto bad = cmd_check(small("inadmissible_epsilon"));
  CHECK(bad.exit_code == 1);
  bool eigen = false;
  for (const auto& r : bad.records) eigen = eigen || r.value("record", "") == "eigenvalue_certificate";
  CHECK(eigen);
}

TEST_CASE("curvature: product of spheres is non-negative") {
  const auto r = cmd_curvature(small("trivial_product", 50));
  CHECK(r.exit_code == 0);
  const auto* min = find_check(r, "curvature.min");
  REQUIRE(min != nullptr);
  CHECK(min->value >= -1e-4);
  bool table = false;
  for (const auto& rec : r.records) {
    if (rec.value("record", "") == "curvature_table") {
      table = true;
      CHECK(rec.contains("worst_plane"));
    }
  }
  CHECK(table);
}

TEST_CASE("reports are deterministic and identical across drivers") {
  const auto c = small("hopf_perturbed", 12);
  for (auto format : {ReportFormat::json, ReportFormat::csv, ReportFormat::md}) {
    const auto a = without_timing(render(cmd_check(c, true), format));
    CHECK(a == without_timing(render(cmd_check(c, false), format)));
    CHECK(a.size() > 200);
  }
  CHECK(without_timing(render(cmd_curvature(c), ReportFormat::json)) ==
        without_timing(render(cmd_curvature(c), ReportFormat::json)));
}

TEST_CASE("report merging") {
  const auto trivial = scratch("trivial.jsonl");
  const auto hopf = scratch("hopf.jsonl");
  write_file(trivial, render(cmd_validate(small("trivial_product", 5)), ReportFormat::json));
  write_file(hopf, render(cmd_check(small("hopf_positive", 5)), ReportFormat::json));

  SUBCASE("single run gives one row per check plus the summary") {
    const auto run = cmd_validate(small("trivial_product", 5));
    const auto rows = read_run_file(trivial.string());
    CHECK(rows.size() == run.checks.size() + 1);
  }
  SUBCASE("merged rows are sorted by scenario") {
    const auto rows = merge_run_files({trivial.string(), hopf.string()});
    REQUIRE(rows.size() > 2);
    CHECK(rows.front().scenario == "hopf-positive");
    CHECK(rows.back().scenario == "trivial-product");
    CHECK(std::is_sorted(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return a.scenario < b.scenario;
    }));
    const auto md = render_rows(rows, ReportFormat::md);
    CHECK(md.find("| scenario |") == 0);
    CHECK(render_rows(rows, ReportFormat::csv).find("scenario,command,check") == 0);
  }
  SUBCASE("malformed files name the offending field") {
    const auto bad = scratch("bad.jsonl");
    write_file(bad, "{\"record\":\"run\",\"scenario\":\"s\",\"command\":\"check\"}\n"
                    "{\"record\":\"check\",\"name\":\"x\",\"status\":\"pass\",\"value\":\"oops\"}\n");
    try {
      read_run_file(bad.string());
      FAIL("expected ReportError");
    } catch (const ReportError& e) {
      const std::string what = e.what();
      CHECK(what.find("bad.jsonl:2") != std::string::npos);
      CHECK(what.find("value") != std::string::npos);
    }
    write_file(bad, "not json\n");
    CHECK_THROWS_AS(read_run_file(bad.string()), ReportError);
    write_file(bad, "{\"record\":\"check\"}\n");
    CHECK_THROWS_AS(read_run_file(bad.string()), ReportError);
  }
}
