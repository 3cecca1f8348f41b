#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flexsat/constellation.hpp"
#include "flexsat/linkstate.hpp"

namespace flexsat {

enum class Scheme { kOspf, kSrv6, kGreen, kFlexAlgo };

const char* to_string(Scheme scheme);

enum class DemandClass { kDefault, kHighDemand, kUrgent };

const char* to_string(DemandClass cls);

struct Demand {
  int id = 0;
  NodeId source = -1;
  NodeId destination = -1;
  double bandwidth_mbps = 0.0;
  DemandClass demand_class = DemandClass::kDefault;
};

enum class ScenarioKind { kDefault, kHighDemand, kUrgentFlow };

const char* to_string(ScenarioKind kind);

// Inclusive slot interval.
struct SlotRange {
  int first = 0;
  int last = 0;

  bool contains(int slot) const { return slot >= first && slot <= last; }
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kDefault;
  int total_slots = 500;
  double base_load_mbps = 20.0;
  double burst_load_mbps = 30.0;  // total offered during a burst slot
  double urgent_load_mbps = 1.0;  // thin probe stream
  std::vector<SlotRange> burst_intervals;
  std::vector<SlotRange> urgent_intervals;
  // Carried for config fidelity; the overflow loss model has no
  // retransmission clock, so nothing reads it.
  double packet_timeout_s = 1.0;
  NodeId source = -1;
  NodeId destination = -1;
};

// Scenario presets: three 60-slot activity windows (100-159, 250-309,
// 400-459) for the bursty kinds.
ScenarioConfig make_scenario(ScenarioKind kind, NodeId source, NodeId destination);

// Demands offered in one slot. The burst is emitted as the base demand
// plus a separate high-demand-class overflow demand so a capacity-aware
// scheme can spread it; single-path schemes overload. Deterministic.
// Throws std::invalid_argument when slot is outside [0, total_slots).
std::vector<Demand> generate_demands(const ScenarioConfig& scenario, int slot);

// A demand with the path the active scheme chose for it. An empty path
// means unrouted; apply_traffic fills delivered_fraction, the controller
// fills path_delay_ms.
struct RoutedDemand {
  Demand demand;
  std::vector<NodeId> path;
  double path_delay_ms = 0.0;
  double delivered_fraction = 0.0;
};

struct TrafficResult {
  double offered_mbps = 0.0;
  double delivered_mbps = 0.0;
  // Offered load and delivery fraction per undirected link actually used.
  std::map<std::pair<NodeId, NodeId>, double> link_offered_mbps;
  std::map<std::pair<NodeId, NodeId>, double> link_delivery;
};

// Overflow loss model: per undirected link, offered = sum of crossing
// demands (both directions share the capacity), delivery fraction =
// min(1, capacity / offered); a demand delivers the product of its links'
// fractions, an unrouted demand delivers zero. Every snapshot link gets a
// state update (idle links report zero offered, which clears utilization
// but leaves the delivery EMA alone). Throws std::runtime_error when a
// path uses a link absent from the snapshot.
TrafficResult apply_traffic(const TopologySnapshot& snapshot, LinkStateTable& states,
                            std::vector<RoutedDemand>& routed);

// CPU percent proxy: base + fwd * Mbps + table * entries + ctrl * events,
// clamped to [0, 100].
struct CpuCoefficients {
  double base_idle = 2.0;
  double fwd_per_mbps = 0.875;
  double table_per_entry = 0.5;
  double ctrl_per_event = 1.0;
  // Static per-satellite table footprint of the scheme (routing table /
  // locators / per-flow entries are added on top by the controller).
  int static_entries = 0;
};

struct SatActivity {
  double forwarded_mbps = 0.0;
  int flow_entries = 0;  // dynamic entries beyond the scheme's static ones
  int control_events = 0;
};

// Calibrated per-scheme coefficients. With a 20 Mbps flow and no control
// churn the steady per-satellite readings are ospf 80 (every satellite
// recomputes each slot), srv6 30 (heavier SR header processing plus a
// per-flow entry), green 20, flexalgo 21 (two extra slice locators).
CpuCoefficients cpu_profile(Scheme scheme);

double cpu_proxy(const CpuCoefficients& coeffs, const SatActivity& activity);

struct MetricsRecord {
  int slot = 0;
  Scheme scheme = Scheme::kOspf;
  double cpu_avg = 0.0;   // mean over activated satellites, 0 when none
  double pdr = 1.0;       // delivered/offered; 1.0 by convention when idle
  double latency_ms = 0.0;
  bool latency_defined = false;  // false when nothing was routed
};

// Aggregates one (slot, scheme): pdr from bandwidth-weighted deliveries,
// latency as the bandwidth-weighted mean path delay over routed demands,
// cpu_avg over the activated satellites' readings.
MetricsRecord record_metrics(int slot, Scheme scheme,
                             const std::vector<RoutedDemand>& routed,
                             const std::vector<double>& activated_cpu);

struct CdfPoint {
  double value = 0.0;
  double cum_prob = 0.0;
};

// Empirical CDF: sorted distinct values with cumulative probabilities
// k/n; empty input yields an empty table.
std::vector<CdfPoint> make_cdf(std::vector<double> values);

}  // namespace flexsat
