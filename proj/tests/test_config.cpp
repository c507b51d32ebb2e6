#include <doctest.h>

#include "cechstat/config.hpp"

using namespace cechstat;
using nlohmann::json;

TEST_CASE("unknown keys are rejected with their path") {
  const auto bad = json::parse(R"({"sample": {"n": 10, "sede": 3}})");
  try {
    parse_config(bad);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sample.sede") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(json::parse(R"({"colour": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": {"regime": "sparse", "gama": 0.6}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"sample": {"density": {"kind": "uniform-cube", "dim": 2}}})")),
                  ConfigError);
}

TEST_CASE("bad values are config errors") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"sample": {"n": "many"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"sample": {"density": {"kind": "cauchy"}}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": {"regime": "dense"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": {"regime": "sparse", "gamma": 0.9}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"betti": {"t_max": 1.0, "grid": [0.5, 0.4]}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"betti": {"t_max": 1.0, "grid": [2.0]}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"constants": {"requests": [{"name": "zeta"}]}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"constants": {"requests": [{"name": "d1_volume", "sign": "0"}]}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"sample": {"density": {"kind": "custom-grid", "lo": [0, 0]}}})")),
                  ConfigError);
}

TEST_CASE("defaults are materialized in the resolved document") {
  const auto cfg = parse_config(json::parse(R"({"experiment": {"regime": "critical"}, "sample": {}})"));
  const auto& r = cfg.resolved;
  CHECK(r["seed"] == 1);
  CHECK(r["sample"]["n"] == 1000.0);
  CHECK(r["sample"]["density"]["kind"] == "uniform-cube");
  CHECK(r["sample"]["density"]["d"] == 2);
  const auto& e = r["experiment"];
  CHECK(e["k"] == 1);
  CHECK(e["n_list"] == json::array({1000.0, 3000.0, 5000.0}));
  CHECK(e["grid"] == json::array({0.15, 0.25, 0.3}));
  CHECK(e["check_t"] == 0.3);
  CHECK(e["M"] == 4);
  CHECK(e["thresholds"]["critical_var_rel"] == 0.2);
  CHECK(e["constants"]["cluster"]["sampler"] == "tree");
  CHECK(e["constants"]["cluster"]["void_form"] == "derived");
  REQUIRE(cfg.experiment.has_value());
  CHECK(cfg.experiment->regime == Regime::Critical);
  // reparsing the resolved document reproduces it
  CHECK(parse_config(r).resolved == r);
}

TEST_CASE("regime defaults") {
  const auto sparse = parse_config(json::parse(R"({"experiment": {"regime": "sparse"}})")).experiment;
  CHECK(sparse->gamma == 0.65);
  CHECK(sparse->n_list.front() == 1024.0);
  CHECK(sparse->n_list.back() == 16384.0);
  const auto pois = parse_config(json::parse(R"({"experiment": {"regime": "poisson"}})")).experiment;
  CHECK(pois->n_list == std::vector<double>{2000.0});
  CHECK(pois->grid == std::vector<double>{0.8, 1.0, 1.2});
}

TEST_CASE("seed override") {
  const auto doc = json::parse(R"({"seed": 4, "sample": {}, "experiment": {"regime": "poisson"}})");
  CHECK(parse_config(doc).sample->seed == 4);
  const auto over = parse_config(doc, 99);
  CHECK(over.seed == 99);
  CHECK(over.sample->seed == 99);
  CHECK(over.experiment->seed == 99);
  CHECK(over.resolved["seed"] == 99);
}

TEST_CASE("truncated gaussian half width is resolved") {
  const auto cfg = parse_config(json::parse(R"({"sample": {"density": {"kind": "truncated-gaussian", "scale": 0.3}}})"));
  const double hw = cfg.resolved["sample"]["density"]["half_width"].get<double>();
  CHECK(hw > 0.0);
  CHECK(hw == cfg.sample->density.half_width());
}

TEST_CASE("constant requests") {
  const auto cfg = parse_config(json::parse(R"({"constants": {"requests": [
      {"name": "c_f_k"},
      {"name": "union_ball_volume", "centers": [[0, 0], [1, 0]], "r": 1.0, "samples": 100000}]}})"));
  REQUIRE(cfg.constants->requests.size() == 2);
  const auto c = evaluate_constant(cfg.constants->requests[0], cfg.constants->density, 1);
  CHECK(c["name"] == "c_f_k");
  CHECK(c["value"].get<double>() == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  const auto u = evaluate_constant(cfg.constants->requests[1], cfg.constants->density, 2);
  CHECK(std::abs(u["value"].get<double>() - 5.0548) <= 4.0 * u["std_error"].get<double>());
  CHECK(cfg.resolved["constants"]["requests"][1]["samples"] == 100000);
}
