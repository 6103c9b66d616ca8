#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qlp/experiments.hpp"
#include "qlp/report.hpp"

using namespace qlp;
using namespace qlp::cli;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("qlp-test-" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

std::string validation_field(const nlohmann::json& j) {
  try {
    config_from_json(j);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("FNV-1a published test vectors") {
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
}

TEST_CASE("every experiment id round-trips and its default config validates") {
  CHECK(all_experiments().size() == 9);
  for (auto id : all_experiments()) {
    CHECK(experiment_from_string(to_string(id)) == id);
    const auto c = default_config(id);
    CHECK_NOTHROW(c.validate());
    const auto back = config_from_json(to_json(c));
    CHECK(config_hash(back) == config_hash(c));
  }
}

TEST_CASE("validation errors name the offending field") {
  CHECK(validation_field({{"experiment", "thermal-l5"}}) == "experiment");
  CHECK(validation_field({{"experiment", "thermal-l4"}, {"lambdas", {1, 2, 2, 8}}}) == "lambdas[2]");
  CHECK(validation_field({{"experiment", "thermal-l4"}, {"lambdas", {1, -2}}}) == "lambdas[1]");
  CHECK(validation_field({{"experiment", "thermal-l4"}, {"betta", 1.0}}) == "betta");
  CHECK(validation_field({{"experiment", "thermal-l4"}, {"mass", -1.0}}) == "mass");
  CHECK(validation_field({{"experiment", "thermal-l2"},
                          {"packets", {{"chi", {{"kind", "gaussian"}}}, {"f", {{"kind", "bump-product"}}}}}}) ==
        "packets.chi.kind");
  CHECK(validation_field({{"experiment", "thermal-l4"}, {"packets", {{"chi", {{"kind", "gaussian"}}}}}}) ==
        "packets.f");
  CHECK(validation_field({{"experiment", "thermal-l4"}, {"packets", {{"chi", {{"kind", "sinc"}}}}}}) ==
        "packets.chi");
  CHECK(validation_field({{"experiment", "rindler-l4"},
                          {"packets",
                           {{"chi", {{"kind", "gaussian"}}},
                            {"f", {{"kind", "bump-product"}, {"center", {0, -2, 0, 0}}}}}}}) == "packets.f.center");
  CHECK(validation_field({{"experiment", "purification"}, {"quadrature", {{"points", 0}}}}) == "quadrature");
  CHECK(validation_field({{"experiment", "purification"}, {"output", {{"directory", "x"}}}}) == "output.directory");
  CHECK(validation_field({{"experiment", "purification"}, {"schema_version", 2}}) == "schema_version");
  CHECK(validation_field({{"experiment", "purification"}}) == "");
}

TEST_CASE("a malformed ladder is a validation failure with exit code 2") {
  auto c = default_config(ExperimentId::thermal_l4);
  c.lambdas = {1, 4, 2};
  c.output.dir = scratch_dir("ladder");
  const auto m = run(c);
  CHECK(m.exit_code == exit_validation);
  CHECK(m.status == "validation-failure");
  CHECK(m.error.find("lambdas[2]") != std::string::npos);
  CHECK(std::filesystem::exists(std::filesystem::path(c.output.dir) / "thermal-l4_manifest.json"));
}

TEST_CASE("identical configs give byte-identical outputs") {
  for (auto id : {ExperimentId::purification, ExperimentId::liouville_check}) {
    auto c = default_config(id);
    c.output.dir = scratch_dir("det-a");
    const auto a = run(c);
    c.output.dir = scratch_dir("det-b");
    const auto b = run(c);
    REQUIRE(a.exit_code == exit_pass);
    REQUIRE(a.outputs.size() == b.outputs.size());
    for (std::size_t i = 0; i < a.outputs.size(); ++i) {
      CHECK(a.outputs[i].fnv1a == b.outputs[i].fnv1a);
      CHECK(slurp(a.outputs[i].path) == slurp(b.outputs[i].path));
      CHECK(hex64(fnv1a(slurp(a.outputs[i].path))) == a.outputs[i].fnv1a);
    }
    CHECK(a.config_hash == b.config_hash);
  }
}

TEST_CASE("manifest records the version, hash and checks") {
  auto c = default_config(ExperimentId::purification);
  c.output.dir = scratch_dir("manifest");
  c.output.prefix = "pur";
  const auto m = run(c);
  const auto j = nlohmann::json::parse(slurp(c.output.dir + "/pur_manifest.json"));
  CHECK(j.at("artifact_version") == kArtifactVersion);
  CHECK(j.at("config_hash") == m.config_hash);
  CHECK(j.at("status") == "pass");
  CHECK(j.at("checks").size() == m.checks.size());
  CHECK(j.at("outputs").size() == 2);
  for (const auto& ch : m.checks) CHECK(ch.criterion == 12);
}

TEST_CASE("failed checks map to contract and tolerance exit codes") {
  ExperimentOutcome o;
  o.checks.push_back({"a", 1, CheckKind::contract, 0, 0, true, ""});
  CHECK(o.exit_code() == exit_pass);
  o.checks.push_back({"b", 9, CheckKind::tolerance, 1, 0, false, ""});
  CHECK(o.exit_code() == exit_tolerance);
  o.checks.push_back({"c", 7, CheckKind::contract, 0, 1, false, ""});
  CHECK(o.exit_code() == exit_contract);
  CHECK_FALSE(o.passed());
}

TEST_CASE("thermal-l4 report: a seven-row ratio series") {
  auto c = default_config(ExperimentId::thermal_l4);
  const auto out = execute(c);
  CHECK(out.passed());
  const auto it = std::find_if(out.files.begin(), out.files.end(), [](const OutputFile& f) { return f.name == "report.csv"; });
  REQUIRE(it != out.files.end());
  const auto long_form = plotdata(it->contents, "lambda", {"ratio"});
  const auto t = read_csv(long_form);
  CHECK(t.header == std::vector<std::string>{"series", "x", "y", "yerr"});
  CHECK(t.rows.size() == 7);
  for (const auto& r : t.rows) CHECK(r[0] == "ratio");
  // the ratio column increases
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(std::stod(t.rows[i][2]) > std::stod(t.rows[i - 1][2]));
}

TEST_CASE("thermal-l2 report: ell decreases strictly along the ladder") {
  const auto out = execute(default_config(ExperimentId::thermal_l2));
  CHECK(out.passed());
  const auto& csv = out.files.front().contents;
  const auto t = read_csv(plotdata(csv, "lambda", {"ell"}, "err_ell"));
  REQUIRE(t.rows.size() == 7);
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(std::stod(t.rows[i][2]) < std::stod(t.rows[i - 1][2]));
}

TEST_CASE("plotdata names the missing column and lists the available ones") {
  const std::string csv = "lambda,n2,ratio\n1,0.5,0.1\n2,0.5,0.2\n";
  try {
    plotdata(csv, "lambda", {"h"});
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    const std::string w = e.what();
    CHECK(w.find("'h'") != std::string::npos);
    CHECK(w.find("lambda, n2, ratio") != std::string::npos);
  }
  const auto two = read_csv(plotdata(csv, "lambda", {"n2", "ratio"}));
  CHECK(two.rows.size() == 4);
  CHECK(two.rows[2][0] == "ratio");
  CHECK(two.rows[0][3] == "0");
}

TEST_CASE("config files load from disk") {
  const auto dir = scratch_dir("load");
  std::filesystem::create_directories(dir);
  const auto path = dir + "/cfg.json";
  std::ofstream(path) << R"({"experiment": "purification", "beta": 2.0, "params": {"levels": 30}})";
  const auto c = load_config(path);
  CHECK(c.beta == 2.0);
  CHECK(c.param("levels", 0) == 30);
  CHECK(c.param("omega", 1.0) == 1.0);
  std::ofstream(path) << "{not json";
  CHECK_THROWS_AS(load_config(path), ValidationError);
  CHECK_THROWS_AS(load_config(dir + "/absent.json"), ValidationError);
}

TEST_CASE("thread count comes from the environment") {
  ::setenv("QLP_THREADS", "3", 1);
  CHECK(thread_count() == 3);
  ::setenv("QLP_THREADS", "zero", 1);
  CHECK(thread_count() == 1);
  ::unsetenv("QLP_THREADS");
  CHECK(thread_count() == 1);
}

TEST_CASE("shipped configs load and equal the built-in defaults") {
  for (auto id : all_experiments()) {
    const auto path = std::string(QLP_CONFIG_DIR) + "/" + to_string(id) + ".json";
    INFO(path);
    const auto c = load_config(path);
    CHECK(c.experiment == id);
    CHECK(config_hash(c) == config_hash(default_config(id)));
  }
}

TEST_CASE("a config file that fails validation still leaves a manifest") {
  const auto dir = scratch_dir("runfile");
  std::filesystem::create_directories(dir);
  const auto path = dir + "/bad.json";
  std::ofstream(path) << R"({"experiment": "thermal-l2", "lambdas": [1, 2, 2], "output": {"prefix": "bad"}})";
  const auto m = run_file(path, dir + "/out");
  CHECK(m.exit_code == exit_validation);
  CHECK(m.experiment == "thermal-l2");
  const auto j = nlohmann::json::parse(slurp(dir + "/out/bad_manifest.json"));
  CHECK(j.at("status") == "validation-failure");
  CHECK(j.at("error").get<std::string>().find("lambdas[2]") != std::string::npos);
}
