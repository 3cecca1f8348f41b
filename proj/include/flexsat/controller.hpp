#pragma once

#include <map>
#include <string>
#include <vector>

#include "flexsat/linkstate.hpp"
#include "flexsat/milp.hpp"
#include "flexsat/trafficlab.hpp"

namespace flexsat {

// The utilization leg defaults to 1.0 (strict comparison, so it never
// fires while utilization is clamped to 1): with the stock scenarios the
// base load fills its links completely, and any lower threshold would
// read the steady state itself as congestion. Announced high-demand
// traffic is the operative burst trigger; lower the threshold when
// running loads below link capacity.
struct PolicyConfig {
  double congestion_utilization = 1.0;  // trigger on any installed-path link
  int calm_slots_to_revert = 2;         // hysteresis before returning to 130
};

// What the controller observed entering a slot.
struct PolicyObservations {
  bool urgent_present = false;
  bool high_demand_present = false;
  double max_path_utilization = 0.0;  // over currently installed routes
};

// Slice for one traffic class: urgent always rides 128; congestion (either
// measured utilization or an announced high-demand class) pushes bulk
// traffic to 129; otherwise 130.
int select_slice(const PolicyConfig& policy, const PolicyObservations& obs,
                 DemandClass cls);

struct InstalledRoute {
  int demand_id = 0;
  int algo_id = 0;  // 0 for the baselines
  std::vector<NodeId> path;
  std::vector<NodeId> sid_stack;  // empty for hop-by-hop ospf
};

struct SchemeState {
  Scheme scheme = Scheme::kFlexAlgo;
  int active_slice = 130;  // headline slice (most demanding present class)
  int default_class_slice = 130;
  int calm_slots = 0;
  double last_solve_time_s = 0.0;
  std::map<int, InstalledRoute> installed;  // by demand id
};

struct ControllerConfig {
  PolicyConfig policy;
  double solver_budget_s = 5.0;
  MilpLimits limits;
};

// Outcome of reconciling desired routes against the installed set.
// Reinstalling identical routes charges nothing; a changed or withdrawn
// route charges one event at the source, and source-routed srv6
// additionally programs per-flow entries on every path satellite.
struct InstallOutcome {
  int control_events = 0;            // total, including at ground sources
  std::map<NodeId, int> sat_events;  // programming events per satellite
};

InstallOutcome install_routes(SchemeState& state,
                              const std::map<int, InstalledRoute>& routes);

struct StepResult {
  std::vector<RoutedDemand> routed;        // aligned with the input demands
  std::map<NodeId, SatActivity> activity;  // per participating satellite
  int control_events = 0;
  double solve_time_s = 0.0;
  int active_slice = 0;  // 0 for the baselines
  std::vector<std::string> warnings;
};

// One controller decision round for one scheme. node_powers feeds the
// energy terms of the MILP and the slice metrics; it must be the
// scheme-neutral forwarding power proxy so that optimizer inputs do not
// depend on the scheme's own accounting model. ospf recomputes
// shortest paths on every slot (the delay metric drifts continuously),
// srv6 source-routes the ospf paths, green solves the energy-only MILP,
// flexalgo solves one MILP per slice and routes each demand class on the
// slice the policy selects. An infeasible chosen slice leaves its demands
// unrouted and records a warning.
StepResult step(int slot, const TopologySnapshot& snapshot,
                const LinkStateTable& states, const std::vector<Demand>& demands,
                const std::vector<double>& node_powers, int satellite_count,
                SchemeState& state, const ControllerConfig& config = {});

// Scheme-neutral power proxy for the next slot: idle base plus the
// forwarding cost of the traffic each satellite carried. `previous` is
// last slot's proxy vector; a satellite's reading decays geometrically
// from it instead of snapping back to idle, so recently used corridors
// stay warm for a few slots and the energy slice detours around them
// rather than bouncing between two half-cooled shortest paths.
std::vector<double> forwarding_power(const std::vector<RoutedDemand>& routed,
                                     int node_count, int satellite_count,
                                     const std::vector<double>& previous = {});

// Snapshot copy without links carrying any of the excluded tags.
TopologySnapshot filter_snapshot(const TopologySnapshot& snapshot,
                                 const LinkStateTable& states,
                                 const std::set<std::string>& excluded_tags);

// The MILP instance flexalgo solves for one slice on this slot's inputs.
// Every demand enters every slice's model (the policy only picks which
// class rides which result); the reliability slice (129) first drops
// links tagged low-reliability. Used for LP export.
MilpInstance slice_instance(const TopologySnapshot& snapshot,
                            const LinkStateTable& states,
                            const std::vector<Demand>& demands,
                            const std::vector<double>& node_powers,
                            int satellite_count, int algo_id,
                            const MilpLimits& limits = {});

}  // namespace flexsat
