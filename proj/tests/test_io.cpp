#include "layerpot/errors.hpp"
#include "layerpot/experiments.hpp"
#include "layerpot/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace layerpot;

TEST_CASE("format_double round-trips") {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(u(g), static_cast<int>(u(g)));
    CHECK(std::stod(io::format_double(x)) == x);
  }
}

TEST_CASE("measure JSON round-trips exactly") {
  const auto mu = measures::generate(measures::LipschitzGraph{0.1, 6.0, 6}, 3);
  const auto back = io::measure_from_json(io::measure_to_json(mu));
  CHECK(back.points == mu.points);
  CHECK(back.weights == mu.weights);
  CHECK(back.meta.family == mu.meta.family);
}

TEST_CASE("modulus and field JSON round-trip") {
  const auto m = dini::OscillationModulus::log_power(0.25);
  const auto m2 = io::modulus_from_json(io::modulus_to_json(m));
  CHECK(m2.family() == m.family());
  CHECK(m2(0.01) == m(0.01));
  const auto f = field::MatrixField::log_dini(0.5, 2.5);
  const auto f2 = io::field_from_json(io::field_to_json(f));
  CHECK(f2.lambda() == 2.5);
  CHECK(f2(Vec3(0.01, 0, 0)) == f(Vec3(0.01, 0, 0)));
}

TEST_CASE("malformed inputs are config errors") {
  CHECK_THROWS_AS(io::measure_from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(io::field_from_json(R"({"family":"mystery"})"), ConfigError);
  CHECK_THROWS_AS(io::parse_list("1,,2"), ConfigError);
  CHECK_THROWS_AS(io::parse_vec3("1,2"), ConfigError);
  CHECK_THROWS_AS(io::read_file("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("parse_list accepts brackets and spaces") {
  CHECK(io::parse_list("[1, 2.5 ,3e-1]") == std::vector<double>{1, 2.5, 0.3});
}

TEST_CASE("table CSV") {
  io::Table t{"t", {"a", "b"}, {}};
  t.add_row({1.0, 0.1});
  CHECK(t.to_csv() == "a,b\n1,0.1\n");
  CHECK(t.column("b") == 1);
  CHECK(t.column("c") == -1);
}

TEST_CASE("config parsing") {
  const auto c = exp::config_from_json(R"({"experiment":"dini-calculus","seed":3,"params":{"count":10}})");
  CHECK(c.experiment == "dini-calculus");
  CHECK(c.seed == 3);
  CHECK_THROWS_AS(exp::config_from_json(R"({"experiment":"x","sed":3})"), ConfigError);
  CHECK_THROWS_AS(exp::config_from_json(R"({"seed":3})"), ConfigError);
  CHECK_THROWS_AS(exp::config_from_json(R"([1,2])"), ConfigError);
}

TEST_CASE("every criterion maps to one experiment") {
  for (int c = 1; c <= 10; ++c) {
    const auto name = exp::experiment_for_criterion(c);
    const auto& names = exp::experiment_names();
    CHECK(std::find(names.begin(), names.end(), name) != names.end());
  }
  CHECK_THROWS_AS(exp::experiment_for_criterion(11), ConfigError);
}

TEST_CASE("unknown experiment is a config error") {
  exp::ExperimentConfig cfg;
  cfg.experiment = "nope";
  CHECK_THROWS_AS(exp::run_experiment(cfg), ConfigError);
}

TEST_CASE("identical config and seed give byte-identical summaries") {
  exp::ExperimentConfig cfg;
  cfg.experiment = "kernel-identities";
  cfg.overrides["samples"] = "500";
  const auto a = exp::run_experiment(cfg);
  const auto b = exp::run_experiment(cfg);
  CHECK(a.summary_json == b.summary_json);
  CHECK(a.pass);
  CHECK(a.summary_json.find("\"schema_version\": 1") != std::string::npos);
  cfg.seed = 8;
  CHECK(exp::run_experiment(cfg).summary_json != a.summary_json);
}

TEST_CASE("bad parameter types are config errors") {
  exp::ExperimentConfig cfg;
  cfg.experiment = "kernel-identities";
  cfg.overrides["samples"] = "many";
  CHECK_THROWS_AS(exp::run_experiment(cfg), ConfigError);
}

TEST_CASE("plot data selectors") {
  const auto dir = (std::filesystem::temp_directory_path() / "layerpot_plot_test").string();
  exp::ExperimentConfig cfg;
  cfg.experiment = "dini-calculus";
  const auto r = exp::run_experiment(cfg);
  const auto paths = exp::emit_plotdata(r, {"r,I_closed"}, dir);
  REQUIRE(paths.size() == 1);
  const auto csv = io::read_file(paths[0]);
  CHECK(csv.rfind("r,I_closed\n", 0) == 0);
  CHECK_THROWS_AS(exp::emit_plotdata(r, {"nope,none"}, dir), ConfigError);
  CHECK_THROWS_AS(exp::emit_plotdata(r, {"nocomma"}, dir), ConfigError);

  exp::ReportBundle empty;
  empty.experiment = "empty";
  const auto p = exp::emit_plotdata(empty, {"x,y"}, dir);
  CHECK(io::read_file(p[0]) == "x,y\n");
  std::filesystem::remove_all(dir);
}
