#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flexsat/config.hpp"
#include "flexsat/trafficlab.hpp"

namespace flexsat {

struct SchemeSummary {
  double cpu_mean = 0.0, cpu_p50 = 0.0, cpu_p95 = 0.0;
  double pdr_mean = 1.0, pdr_p50 = 1.0, pdr_p95 = 1.0;
  // Latency statistics cover only slots where something was routed.
  double latency_mean = 0.0, latency_p50 = 0.0, latency_p95 = 0.0;
  int latency_slots = 0;
  double solve_time_p50_s = 0.0, solve_time_p95_s = 0.0;
};

struct RunSummary {
  std::map<Scheme, SchemeSummary> schemes;
  // Headline deltas, present when the contributing schemes/scenario ran.
  std::optional<double> cpu_reduction_vs_ospf;  // 1 - flexalgo/ospf
  std::optional<double> min_burst_pdr;          // flexalgo, burst slots
  std::optional<double> urgent_latency_delta_ms;  // mean slice-130 minus slice-128
  int audit_violations = 0;
  int budget_breach_slots = 0;
  int unrouted_demand_slots = 0;
  int total_slots = 0;
};

// Executes the configured scenario for every requested scheme over the
// identical snapshot and demand sequence, then writes into output_dir:
// metrics.csv, decisions.csv, slices.csv (flexalgo only),
// cdf_<metric>_<scheme>.csv, summary.json and config_echo.json.
RunSummary run(const RunConfig& config);

// Recompute the CDF tables and summary from a previously written
// metrics.csv/decisions.csv pair (the export verb).
RunSummary export_from_ledger(const RunConfig& config, const std::string& ledger_dir,
                              const std::string& out_dir);

// Write one flexalgo slice's MILP at the given slot in LP text format,
// replaying the run up to that slot so link state and power proxies match
// what the controller saw. Throws ConfigError on a bad slot or algo id.
void dump_lp(const RunConfig& config, int slot, int algo_id, std::ostream& os);

}  // namespace flexsat
