#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"

#include "difflab/experiments.hpp"
#include "difflab/parallel.hpp"

using namespace difflab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ConfigSources with_seed(std::string seed) {
  ConfigSources s;
  s.seed_flag = std::move(seed);
  return s;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("CSV schema") {
  EmpiricalDensity d = histogram(std::vector<double>{0.1, 0.2, 1.5}, {0.0, 1.0, 2.0});
  const CsvTable t = density_table("d.csv", d);
  const std::string csv = render_csv(t, ordered_json{{"k", 1}});
  std::istringstream lines(csv);
  std::string l1, l2, l3, l4;
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  std::getline(lines, l4);
  CHECK(l1 == std::string("# difflab ") + kVersion);
  CHECK(l2 == "# config {\"k\":1}");
  CHECK(l3 == "bin_left,bin_right,count,density");
  CHECK(l4 == "0,1,2,0.6666666666666666");
  CHECK(csv.find('\r') == std::string::npos);

  const CsvTable c = curve_table("c.csv", {{10, 0.5, 9.75, 10.0}});
  CHECK(c.header == "n,mean,variance,msd");
  CHECK(c.rows.front() == "10,0.5,9.75,10");
}

TEST_CASE("report JSON round-trips") {
  Report r;
  r.experiment = "pearson-msd";
  r.config = {{"experiment", "pearson-msd"}, {"params", {{"seed", 1}, {"n", 100}}}};
  r.results = {{"ratio", 0.9993}, {"list", {1, 2, 3}}};
  r.verdicts = {{"a", 0.1, Relation::Less, 0.2}, {"b", 3.0, Relation::GreaterEqual, 4.0}};
  const std::string text = render_report(r);
  CHECK(parse_report(text) == r);
  CHECK(render_report(parse_report(text)) == text);
  CHECK_FALSE(r.pass());

  const auto doc = ordered_json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"tool", "version", "experiment", "config", "results",
                                         "verdicts", "pass"});

  auto tampered = doc;
  tampered["verdicts"][0]["pass"] = false;
  CHECK_THROWS_AS(report_from_json(tampered), IoError);
  CHECK_THROWS_AS(parse_report("{"), IoError);
  CHECK_THROWS_AS(parse_report("{}"), IoError);
}

TEST_CASE("emit fails on an unwritable path") {
  const auto file = std::filesystem::temp_directory_path() / "difflab_not_a_dir";
  std::ofstream(file) << "x";
  CHECK_THROWS_AS(emit(Report{}, {}, file / "sub"), IoError);
  std::filesystem::remove(file);
}

TEST_CASE("registry") {
  CHECK(experiments().size() == 8);
  for (const char* name : {"clt-convergence", "rayleigh-coefficients", "pearson-msd",
                           "brownian-bridge", "pde-vs-mc", "bounded-bias", "einstein-avogadro",
                           "inject-renormalize"}) {
    CHECK(find_experiment(name).name == name);
  }
  CHECK_THROWS_AS(find_experiment("nope"), UsageError);
}

TEST_CASE("config resolution fills defaults in declaration order") {
  const ExperimentConfig c = resolve_config("pearson-msd", with_seed("7"));
  CHECK(c.params["seed"] == 7);
  CHECK(c.params["n"] == 100);
  CHECK(c.params["step_length"] == 1.0);
  CHECK(c.out_dir == "results");
  CHECK(c.params.begin().key() == "seed");
}

TEST_CASE("seed precedence: file < flag < environment") {
  ConfigSources s;
  s.file = ordered_json{{"experiment", "pearson-msd"}, {"seed", 1}, {"params", {{"n", 5}}}};
  CHECK(resolve_config("pearson-msd", s).params["seed"] == 1);
  s.seed_flag = "2";
  CHECK(resolve_config("pearson-msd", s).params["seed"] == 2);
  s.seed_env = "3";
  CHECK(resolve_config("pearson-msd", s).params["seed"] == 3);
  CHECK(resolve_config("pearson-msd", s).params["n"] == 5);
  s.overrides = {{"n", "9"}};
  CHECK(resolve_config("pearson-msd", s).params["n"] == 9);
}

TEST_CASE("strict parsing") {
  ConfigSources s = with_seed("1");
  s.overrides = {{"bogus", "1"}};
  CHECK_THROWS_AS(resolve_config("pearson-msd", s), UsageError);

  s.overrides = {{"n", "ten"}};
  CHECK_THROWS_AS(resolve_config("pearson-msd", s), UsageError);
  s.overrides = {{"n", "-3"}};
  CHECK_THROWS_AS(resolve_config("pearson-msd", s), UsageError);
  s.overrides = {{"n", "1e3"}};
  CHECK(resolve_config("pearson-msd", s).params["n"] == 1000);
  s.overrides = {{"step_length", "nan"}};
  CHECK_THROWS_AS(resolve_config("pearson-msd", s), UsageError);

  ConfigSources f = with_seed("1");
  f.file = ordered_json{{"experiment", "pearson-msd"}, {"extra", 1}};
  CHECK_THROWS_AS(resolve_config("pearson-msd", f), UsageError);
  f.file = ordered_json{{"experiment", "clt-convergence"}};
  CHECK_THROWS_AS(resolve_config("pearson-msd", f), UsageError);
  f.file = ordered_json{{"params", {{"nope", 1}}}};
  CHECK_THROWS_AS(resolve_config("pearson-msd", f), UsageError);
  f.file = ordered_json::array();
  CHECK_THROWS_AS(resolve_config("pearson-msd", f), UsageError);

  ConfigSources list = with_seed("1");
  list.overrides = {{"dims", "1,3"}};
  CHECK(resolve_config("rayleigh-coefficients", list).params["dims"] ==
        ordered_json::array({1, 3}));
  list.overrides = {{"dims", "1,,3"}};
  CHECK_THROWS_AS(resolve_config("rayleigh-coefficients", list), UsageError);
}

TEST_CASE("missing seed is a usage error") {
  CHECK_THROWS_AS(resolve_config("clt-convergence", ConfigSources{}), UsageError);
}

TEST_CASE("invalid parameter values are usage errors") {
  ConfigSources s = with_seed("1");
  s.overrides = {{"n", "0"}};
  CHECK_THROWS_AS(run_experiment(resolve_config("pearson-msd", s)), UsageError);
  s.overrides = {{"dist", "cauchy"}};
  CHECK_THROWS_AS(run_experiment(resolve_config("clt-convergence", s)), UsageError);
  s.overrides = {{"dims", "4"}};
  CHECK_THROWS_AS(run_experiment(resolve_config("rayleigh-coefficients", s)), UsageError);
  s.overrides = {{"interval", "0"}};
  CHECK_THROWS_AS(run_experiment(resolve_config("inject-renormalize", s)), UsageError);
}

TEST_CASE("small runs of every experiment are reproducible across thread counts") {
  const std::map<std::string, std::vector<std::pair<std::string, std::string>>> small{
      {"clt-convergence", {{"n", "12"}, {"particles", "5000"}}},
      {"rayleigh-coefficients", {{"n", "20"}, {"particles", "3000"}}},
      {"pearson-msd", {{"n", "20"}, {"particles", "3000"}}},
      {"brownian-bridge", {{"intervals", "10"}, {"particles", "3000"}, {"dims", "2"}}},
      {"pde-vs-mc", {{"n", "10"}, {"particles", "3000"}, {"conservation_steps", "100"},
                     {"dx_fraction", "0.05"}}},
      {"bounded-bias", {{"n", "30"}, {"particles", "3000"}}},
      {"einstein-avogadro", {{"intervals", "10"}, {"particles", "3000"}}},
      {"inject-renormalize", {}},
  };
  for (const auto& [name, overrides] : small) {
    ConfigSources s = with_seed("11");
    s.overrides = overrides;
    const ExperimentConfig cfg = resolve_config(name, s);
    set_thread_count(1);
    const ExperimentOutput a = run_experiment(cfg);
    set_thread_count(4);
    const ExperimentOutput b = run_experiment(cfg);
    set_thread_count(0);
    CHECK(render_report(a.report) == render_report(b.report));
    REQUIRE(a.tables.size() == b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) {
      CHECK(render_csv(a.tables[i], a.report.config) == render_csv(b.tables[i], b.report.config));
    }
    CHECK(a.report.config["params"] == cfg.params);
    CHECK_FALSE(a.report.verdicts.empty());
  }
}

TEST_CASE("rayleigh report carries the fitted coefficients") {
  ConfigSources s = with_seed("3");
  s.overrides = {{"n", "200"}, {"particles", "20000"}};
  const ExperimentOutput out = run_experiment(resolve_config("rayleigh-coefficients", s));
  const auto& dims = out.report.results["dimensions"];
  REQUIRE(dims.size() == 3);
  const double expected[] = {0.5, 0.25, 1.0 / 6.0};
  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(dims[d]["expected_d_axis"].get<double>() == doctest::Approx(expected[d]));
    for (const auto& v : dims[d]["d_axis"]) {
      CHECK(v.get<double>() == doctest::Approx(expected[d]).epsilon(0.05));
    }
  }
}

TEST_CASE("emit writes every file with version and config") {
  ConfigSources s = with_seed("5");
  const auto dir = std::filesystem::temp_directory_path() / "difflab_emit_test";
  std::filesystem::remove_all(dir);
  s.out_flag = dir.string();
  const ExperimentConfig cfg = resolve_config("inject-renormalize", s);
  const ExperimentOutput out = run_experiment(cfg);
  CHECK(out.report.pass());
  emit(out.report, out.tables, cfg.out_dir);
  CHECK(parse_report(slurp(dir / "report.json")) == out.report);
  for (const auto& t : out.tables) {
    const std::string csv = slurp(dir / t.file_name);
    CHECK(csv.rfind(std::string("# difflab ") + kVersion + "\n# config ", 0) == 0);
    CHECK(csv.find(t.header) != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
