#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexsat/controller.hpp"
#include "flexsat/trafficlab.hpp"

namespace flexsat {

// Raised on schema violations; the message names the offending key (and
// the byte offset for syntax errors).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resolved run configuration. Every field has a default, so an empty
// JSON object is a valid config.
struct RunConfig {
  // constellation
  double min_elevation_deg = 25.0;
  double link_capacity_mbps = 20.0;
  double slot_seconds = 10.0;

  // scenario
  ScenarioKind scenario = ScenarioKind::kDefault;
  int total_slots = 500;
  double base_load_mbps = 20.0;
  double burst_load_mbps = 30.0;
  double urgent_load_mbps = 1.0;
  std::vector<SlotRange> burst_intervals{{100, 159}, {250, 309}, {400, 459}};
  std::vector<SlotRange> urgent_intervals{{100, 159}, {250, 309}, {400, 459}};
  double packet_timeout_s = 1.0;
  std::string source = "ottawa";
  std::string destination = "vancouver";

  // policy / solver
  PolicyConfig policy;
  MilpLimits limits;
  double solver_budget_s = 5.0;

  // run
  std::vector<Scheme> schemes{Scheme::kOspf, Scheme::kSrv6, Scheme::kGreen,
                              Scheme::kFlexAlgo};
  std::string output_dir = "out";
  // Reserved for optional demand jitter; the stock scenarios are fully
  // deterministic and never read it.
  std::uint64_t seed = 0;
};

// Parse and validate a JSON config text. Unknown keys are rejected so
// typos fail loudly. Throws ConfigError.
RunConfig parse_config(const std::string& json_text);

RunConfig load_config_file(const std::string& path);

// Fully-resolved round-trippable echo of the configuration.
std::string echo_config(const RunConfig& config);

// Semantic checks shared by parse_config and callers that mutate a
// config programmatically. Throws ConfigError.
void validate_config(const RunConfig& config);

// Comma-separated scheme names (the --schemes override). Throws
// ConfigError on unknown names or an empty list.
std::vector<Scheme> parse_scheme_list(const std::string& csv);

}  // namespace flexsat
