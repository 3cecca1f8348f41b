#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flexsat/config.hpp"

using namespace flexsat;

TEST_CASE("empty object yields the defaults") {
  RunConfig cfg = parse_config("{}");
  CHECK(cfg.min_elevation_deg == 25.0);
  CHECK(cfg.link_capacity_mbps == 20.0);
  CHECK(cfg.slot_seconds == 10.0);
  CHECK(cfg.scenario == ScenarioKind::kDefault);
  CHECK(cfg.total_slots == 500);
  CHECK(cfg.base_load_mbps == 20.0);
  CHECK(cfg.burst_load_mbps == 30.0);
  CHECK(cfg.urgent_load_mbps == 1.0);
  REQUIRE(cfg.burst_intervals.size() == 3);
  CHECK(cfg.burst_intervals[0].first == 100);
  CHECK(cfg.burst_intervals[2].last == 459);
  CHECK(cfg.source == "ottawa");
  CHECK(cfg.destination == "vancouver");
  CHECK(cfg.policy.congestion_utilization == 1.0);
  CHECK(cfg.policy.calm_slots_to_revert == 2);
  CHECK(cfg.limits.p_lim == 100.0);
  CHECK(cfg.limits.t_node_ms == 10.0);
  CHECK(cfg.limits.shared_capacity);
  CHECK(cfg.schemes.size() == 4);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.solver_budget_s == 5.0);
}

TEST_CASE("full config parses into every field") {
  RunConfig cfg = parse_config(R"({
    "constellation": {"min_elevation_deg": 30, "link_capacity_mbps": 25,
                      "slot_seconds": 5},
    "scenario": {"name": "high-demand", "total_slots": 100,
                 "base_load_mbps": 10, "burst_load_mbps": 18,
                 "urgent_load_mbps": 2,
                 "burst_intervals": [[10, 19], [50, 59]],
                 "urgent_intervals": [[30, 39]],
                 "packet_timeout_s": 2,
                 "source": "toronto", "destination": "calgary"},
    "policy": {"congestion_utilization": 0.8, "calm_slots_to_revert": 3},
    "milp": {"p_lim": 50, "t_node_ms": 5, "shared_capacity": false},
    "schemes": ["green", "flexalgo"],
    "output_dir": "results",
    "seed": 7,
    "solver_budget_s": 2.5
  })");
  CHECK(cfg.min_elevation_deg == 30.0);
  CHECK(cfg.link_capacity_mbps == 25.0);
  CHECK(cfg.slot_seconds == 5.0);
  CHECK(cfg.scenario == ScenarioKind::kHighDemand);
  CHECK(cfg.total_slots == 100);
  CHECK(cfg.base_load_mbps == 10.0);
  CHECK(cfg.burst_load_mbps == 18.0);
  CHECK(cfg.urgent_load_mbps == 2.0);
  REQUIRE(cfg.burst_intervals.size() == 2);
  CHECK(cfg.burst_intervals[1].first == 50);
  REQUIRE(cfg.urgent_intervals.size() == 1);
  CHECK(cfg.urgent_intervals[0].last == 39);
  CHECK(cfg.packet_timeout_s == 2.0);
  CHECK(cfg.source == "toronto");
  CHECK(cfg.destination == "calgary");
  CHECK(cfg.policy.congestion_utilization == 0.8);
  CHECK(cfg.policy.calm_slots_to_revert == 3);
  CHECK(cfg.limits.p_lim == 50.0);
  CHECK(cfg.limits.t_node_ms == 5.0);
  CHECK_FALSE(cfg.limits.shared_capacity);
  REQUIRE(cfg.schemes.size() == 2);
  CHECK(cfg.schemes[0] == Scheme::kGreen);
  CHECK(cfg.schemes[1] == Scheme::kFlexAlgo);
  CHECK(cfg.output_dir == "results");
  CHECK(cfg.seed == 7);
  CHECK(cfg.solver_budget_s == 2.5);
}

TEST_CASE("malformed json reports the byte offset") {
  CHECK_THROWS_WITH_AS(parse_config("{\"scenario\": }"),
                       doctest::Contains("not valid JSON at byte"), ConfigError);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"scenarios": {}})"),
                       doctest::Contains("scenarios: unknown key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"constellation": {"elevation": 1}})"),
                       doctest::Contains("constellation.elevation"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"scenario": {"burst": []}})"),
                       doctest::Contains("scenario.burst: unknown key"), ConfigError);
}

TEST_CASE("type errors carry the dotted key path") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"scenario": {"total_slots": "many"}})"),
                       doctest::Contains("scenario.total_slots"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"milp": {"shared_capacity": 1}})"),
                       doctest::Contains("milp.shared_capacity"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1.5})"),
                       doctest::Contains("seed"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"scenario": {"burst_intervals": [[1, 2, 3]]}})"),
      doctest::Contains("burst_intervals"), ConfigError);
}

TEST_CASE("semantic validation") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"constellation": {"min_elevation_deg": 90}})"),
                       doctest::Contains("must be in [0, 90)"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"scenario": {"name": "stress"}})"),
                       doctest::Contains("unknown scenario 'stress'"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"scenario": {"burst_intervals": [[20, 10]]}})"),
      doctest::Contains("first > last"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"scenario": {"total_slots": 50, "burst_intervals": [[40, 60]],
                       "urgent_intervals": [[0, 9]]}})"),
      doctest::Contains("outside [0, 50)"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"scenario": {"source": "atlantis"}})"),
                       doctest::Contains("unknown ground station 'atlantis'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config(R"({"scenario": {"source": "ottawa", "destination": "ottawa"}})"),
      doctest::Contains("must differ from the source"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"policy": {"congestion_utilization": 0}})"),
                       doctest::Contains("must be in (0, 1]"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"schemes": []})"),
                       doctest::Contains("at least one scheme"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"schemes": ["ospf", "ospf"]})"),
                       doctest::Contains("duplicate scheme 'ospf'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"schemes": ["rip"]})"),
                       doctest::Contains("unknown scheme 'rip'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"solver_budget_s": 0})"),
                       doctest::Contains("must be positive"), ConfigError);
}

TEST_CASE("echo round-trips byte-identically") {
  RunConfig cfg = parse_config(R"({
    "scenario": {"name": "urgent-flow", "total_slots": 200,
                 "burst_intervals": [[10, 19]],
                 "urgent_intervals": [[20, 49]]},
    "schemes": ["flexalgo"],
    "milp": {"shared_capacity": false}
  })");
  std::string echo = echo_config(cfg);
  RunConfig again = parse_config(echo);
  CHECK(echo_config(again) == echo);
  CHECK(again.scenario == ScenarioKind::kUrgentFlow);
  CHECK(again.total_slots == 200);
  CHECK_FALSE(again.limits.shared_capacity);
}

TEST_CASE("scheme list parsing for the --schemes flag") {
  std::vector<Scheme> one = parse_scheme_list("flexalgo");
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Scheme::kFlexAlgo);
  std::vector<Scheme> two = parse_scheme_list("ospf,green");
  REQUIRE(two.size() == 2);
  CHECK(two[0] == Scheme::kOspf);
  CHECK(two[1] == Scheme::kGreen);
  CHECK_THROWS_AS(parse_scheme_list("ospf,bgp"), ConfigError);
  CHECK_THROWS_AS(parse_scheme_list(""), ConfigError);
}
