#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wcs/config.hpp"
#include "wcs/pipelines.hpp"
#include "wcs/report.hpp"

using namespace wcs;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("wcs-test-" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("config defaults and p inference") {
  const auto c = parse_config(json{{"problem", {{"alpha", 1.5}, {"beta", 2.0}, {"lengths", {1.0, 2.0}},
                                                {"cutoffs", {6, 6}}}}});
  CHECK(c.problem.params.p == doctest::Approx(3.5));
  CHECK(c.problem.params.dim == 2);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config rejects unknown keys and wrong types") {
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"lamda", 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"extra", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"lambda", "big"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"task", {{"multiplicity", {{"orbit", 2}}}}}}), ConfigError);
}

TEST_CASE("config invariants") {
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"lambda", -1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"solver", {{"tolerance", 0.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"output", {{"dir", ""}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"output", {{"format", "xml"}}}}), ConfigError);
  auto c = parse_config(json::object());
  c.solver.tolerance = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("property: config round-trips through JSON") {
  auto c = parse_config(json{{"problem", {{"lambda", 7.5}, {"kappa1", 3.0}}}, {"solver", {{"seed", 99}}}});
  const json a = to_json(c);
  const json b = to_json(parse_config(a));
  CHECK(a == b);
  CHECK(a.at("solver").at("seed") == 99);
}

TEST_CASE("csv rendering") {
  CsvTable t{"x", {"a", "b"}, {}};
  t.add({"1", "2.5"});
  t.add({"has,comma", "q\"uote"});
  CHECK(t.render() == "a,b\n1,2.5\n\"has,comma\",\"q\"\"uote\"\n");
  CHECK_THROWS(t.add({"only one"}));
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(3LL) == "3");
}

TEST_CASE("report validation") {
  json ok = make_report(json::object(), {{"records", {{{"energy", 1.0}}, {{"energy", 2.0}}}}}, json::object(),
                        json::object());
  CHECK_NOTHROW(validate_report(ok));
  CHECK(ok.at("schema") == kReportSchema);
  json bad = ok;
  bad.erase("timing");
  CHECK_THROWS_AS(validate_report(bad), ReportError);
  bad = ok;
  bad["schema"] = "other/1";
  CHECK_THROWS_AS(validate_report(bad), ReportError);
  bad = ok;
  bad["results"]["records"] = {{{"energy", 2.0}}, {{"energy", 1.0}}};
  CHECK_THROWS_AS(validate_report(bad), ReportError);
  sort_by_energy(bad["results"]["records"]);
  CHECK_NOTHROW(validate_report(bad));
}

TEST_CASE("atomic write leaves no temporary") {
  const auto d = scratch_dir("atomic");
  write_atomic((d / "a.json").string(), "{}\n");
  write_atomic((d / "a.json").string(), "[]\n");
  CHECK(slurp(d / "a.json") == "[]\n");
  int files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(d)) ++files;
  CHECK(files == 1);
}

TEST_CASE("run: invalid configuration writes nothing") {
  const auto d = scratch_dir("invalid");
  auto c = parse_config(json{{"problem", {{"cutoffs", {8}}}}, {"output", {{"dir", d.string()}}}});
  c.problem.params.lambda = -1.0;
  std::ostringstream err;
  CHECK(run("ground-state", c, err) == kExitValidation);
  CHECK(std::filesystem::is_empty(d));
  CHECK_FALSE(err.str().empty());
}

TEST_CASE("run: ground-state report round-trips and validates") {
  const auto d = scratch_dir("gs");
  const auto c = parse_config(json{{"problem", {{"lambda", 50.0}, {"cutoffs", {16}}}},
                                   {"output", {{"dir", d.string()}, {"format", "both"}}}});
  std::ostringstream err;
  REQUIRE(run("ground-state", c, err) == kExitOk);
  const json r = json::parse(slurp(d / "report.json"));
  CHECK_NOTHROW(validate_report(r));
  CHECK(r.at("config") == to_json(c));
  CHECK(r.at("thresholds").contains("c0"));
  bool csv = false;
  for (const auto& e : std::filesystem::directory_iterator(d)) csv = csv || e.path().extension() == ".csv";
  CHECK(csv);
}

TEST_CASE("run: resonant kappa skips the claim sweep with a note") {
  const auto d = scratch_dir("resonant");
  const auto c = parse_config(json{
      {"task",
       {{"estimates",
         {{"dims", {4}},
          {"claim", {{"dim", 4}, {"box_length", 8.0}, {"kappa1_ratio", 1.0}, {"kappa2_ratio", 1.0}, {"mu1", 1.0},
                     {"mu2", 1.0}, {"alpha", 2.0}, {"beta", 2.0}}}}}}},
      {"output", {{"dir", d.string()}}}});
  std::ostringstream err;
  REQUIRE(run("verify-estimates", c, err) == kExitOk);
  const json r = json::parse(slurp(d / "report.json"));
  const auto& notes = r.at("results").at("notes");
  REQUIRE(notes.size() >= 1);
  CHECK(notes[0].get<std::string>().find("resonant kappa") != std::string::npos);
}
