#include "flexsat/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace flexsat {

namespace {

// Delay-only shortest path config for the ospf baseline: the IGP metric
// is pure propagation delay with no per-node charge and no filtering.
SliceConfig ospf_slice() {
  SliceConfig s;
  s.algo_id = 0;
  s.metric = MetricKind::kDelay;
  s.node_delay_ms = 0.0;
  s.alpha = 0.0;
  s.beta = 0.0;
  s.gamma = 1.0;
  return s;
}

SliceConfig slice_for(int algo_id) {
  switch (algo_id) {
    case 128: return slice_delay_128();
    case 129: return slice_reliability_129();
    default: return slice_energy_130();
  }
}

MilpWeights weights_for(int algo_id) {
  switch (algo_id) {
    case 128: return {0.0, 0.0, 1.0};
    case 129: return {0.0, 1.0, 0.0};
    default: return {1.0, 0.0, 0.0};
  }
}

bool is_sat_node(NodeId n, int satellite_count) {
  return n >= 0 && n < satellite_count;
}

// Baseline shortest-path routing shared by ospf and srv6.
std::map<int, InstalledRoute> shortest_path_routes(
    const TopologySnapshot& snapshot, const LinkStateTable& states,
    const std::vector<Demand>& demands, const std::vector<double>& node_powers,
    int satellite_count, bool source_routed, std::vector<std::string>& warnings) {
  std::map<int, InstalledRoute> routes;
  std::map<NodeId, std::map<NodeId, SlicePath>> trees;
  for (const Demand& d : demands) {
    if (trees.find(d.source) == trees.end()) {
      trees[d.source] = compute_slice_tree(snapshot, states, ospf_slice(), d.source,
                                           node_powers, satellite_count);
    }
    const auto& tree = trees[d.source];
    auto it = tree.find(d.destination);
    if (it == tree.end()) {
      warnings.push_back("demand " + std::to_string(d.id) + ": destination " +
                         std::to_string(d.destination) + " unreachable");
      continue;
    }
    InstalledRoute r;
    r.demand_id = d.id;
    r.path = it->second.node_sequence;
    if (source_routed) {
      r.sid_stack.assign(r.path.begin() + 1, r.path.end());
    }
    routes[d.id] = r;
  }
  return routes;
}

// Extract per-demand routes from one slice's MILP solution.
std::map<int, InstalledRoute> milp_routes(const MilpInstance& inst,
                                          const MilpSolution& sol,
                                          const TopologySnapshot& snapshot,
                                          const LinkStateTable& states,
                                          const std::vector<Demand>& demands,
                                          const std::vector<double>& node_powers,
                                          int satellite_count, int algo_id) {
  std::map<int, InstalledRoute> routes;
  for (size_t k = 0; k < demands.size(); ++k) {
    InstalledRoute r;
    r.demand_id = demands[k].id;
    r.algo_id = algo_id;
    r.path = solution_path(inst, sol, static_cast<int>(k));
    r.sid_stack = build_sid_stack(r.path, snapshot, states, slice_for(algo_id),
                                  node_powers, satellite_count);
    routes[r.demand_id] = r;
  }
  return routes;
}

std::vector<MilpDemand> to_milp_demands(const std::vector<Demand>& demands) {
  std::vector<MilpDemand> out;
  for (const Demand& d : demands) {
    out.push_back({d.id, d.source, d.destination, d.bandwidth_mbps});
  }
  return out;
}

}  // namespace

int select_slice(const PolicyConfig& policy, const PolicyObservations& obs,
                 DemandClass cls) {
  if (cls == DemandClass::kUrgent) return 128;
  if (cls == DemandClass::kHighDemand) return 129;
  bool congested = obs.high_demand_present ||
                   obs.max_path_utilization > policy.congestion_utilization;
  return congested ? 129 : 130;
}

InstallOutcome install_routes(SchemeState& state,
                              const std::map<int, InstalledRoute>& routes) {
  InstallOutcome out;
  auto changed = [](const InstalledRoute& a, const InstalledRoute& b) {
    return a.path != b.path || a.sid_stack != b.sid_stack || a.algo_id != b.algo_id;
  };
  auto charge = [&](const InstalledRoute& r) {
    ++out.control_events;  // the source's SR policy binding
    if (state.scheme == Scheme::kSrv6) {
      // Per-flow entries programmed at every interior hop.
      for (size_t i = 1; i + 1 < r.path.size(); ++i) {
        ++out.sat_events[r.path[i]];
        ++out.control_events;
      }
    }
  };
  for (const auto& [id, route] : routes) {
    auto it = state.installed.find(id);
    if (it == state.installed.end() || changed(it->second, route)) charge(route);
  }
  for (const auto& [id, route] : state.installed) {
    if (routes.find(id) == routes.end()) charge(route);  // withdrawal
  }
  state.installed = routes;
  return out;
}

// Per-slot decay of a satellite's residual heat.  Traffic shows up in the
// proxy at full strength the slot it is forwarded; once it moves away the
// reading cools geometrically instead of snapping back to idle.  The
// residual is floored to a coarse Mbps grid so the fleet only ever shows
// a handful of distinct power readings: cooled-but-warm corridors stay
// visible to the planner without smearing every satellite onto its own
// unique value.
constexpr double kThermalPersistence = 0.7;
constexpr double kThermalStepMbps = 4.0;

std::vector<double> forwarding_power(const std::vector<RoutedDemand>& routed,
                                     int node_count, int satellite_count,
                                     const std::vector<double>& previous) {
  CpuCoefficients neutral;  // idle base + plain forwarding cost only
  std::vector<double> fwd(node_count, 0.0);
  for (const RoutedDemand& r : routed) {
    for (NodeId n : r.path) {
      if (is_sat_node(n, satellite_count)) fwd[n] += r.demand.bandwidth_mbps;
    }
  }
  const bool warm = static_cast<int>(previous.size()) == node_count;
  std::vector<double> power(node_count, 0.0);
  for (int n = 0; n < satellite_count; ++n) {
    double mbps = fwd[n];
    if (warm) {
      double prev_mbps =
          std::max(0.0, (previous[n] - neutral.base_idle) / neutral.fwd_per_mbps);
      double residual = kThermalStepMbps *
                        std::floor(kThermalPersistence * prev_mbps /
                                   kThermalStepMbps + 1e-9);
      mbps = std::max(mbps, residual);
    }
    power[n] = neutral.base_idle + neutral.fwd_per_mbps * mbps;
  }
  return power;
}

TopologySnapshot filter_snapshot(const TopologySnapshot& snapshot,
                                 const LinkStateTable& states,
                                 const std::set<std::string>& excluded_tags) {
  TopologySnapshot out = snapshot;
  out.links.erase(std::remove_if(out.links.begin(), out.links.end(),
                                 [&](const Link& l) {
                                   const LinkState& s = states.get(l.a, l.b);
                                   for (const std::string& tag : excluded_tags) {
                                     if (s.has_tag(tag)) return true;
                                   }
                                   return false;
                                 }),
                  out.links.end());
  return out;
}

MilpInstance slice_instance(const TopologySnapshot& snapshot,
                            const LinkStateTable& states,
                            const std::vector<Demand>& demands,
                            const std::vector<double>& node_powers,
                            int satellite_count, int algo_id,
                            const MilpLimits& limits) {
  TopologySnapshot filtered =
      algo_id == 129
          ? filter_snapshot(snapshot, states, slice_reliability_129().excluded_tags)
          : snapshot;
  return build_model(filtered, states, to_milp_demands(demands),
                     weights_for(algo_id), node_powers, satellite_count, limits);
}

StepResult step(int slot, const TopologySnapshot& snapshot,
                const LinkStateTable& states, const std::vector<Demand>& demands,
                const std::vector<double>& node_powers, int satellite_count,
                SchemeState& state, const ControllerConfig& config) {
  (void)slot;
  StepResult result;

  PolicyObservations obs;
  for (const Demand& d : demands) {
    if (d.demand_class == DemandClass::kUrgent) obs.urgent_present = true;
    if (d.demand_class == DemandClass::kHighDemand) obs.high_demand_present = true;
  }
  for (const auto& [id, route] : state.installed) {
    for (size_t i = 0; i + 1 < route.path.size(); ++i) {
      obs.max_path_utilization =
          std::max(obs.max_path_utilization,
                   states.get(route.path[i], route.path[i + 1]).utilization);
    }
  }

  std::map<int, InstalledRoute> routes;

  switch (state.scheme) {
    case Scheme::kOspf:
    case Scheme::kSrv6: {
      bool sr = state.scheme == Scheme::kSrv6;
      routes = shortest_path_routes(snapshot, states, demands, node_powers,
                                    satellite_count, sr, result.warnings);
      if (sr) {
        InstallOutcome install = install_routes(state, routes);
        result.control_events = install.control_events;
        for (const auto& [sat, n] : install.sat_events) {
          if (is_sat_node(sat, satellite_count)) {
            result.activity[sat].control_events += n;
          }
        }
      } else {
        // Hop-by-hop recomputation: every satellite reruns SPF because
        // the delay metrics moved; no SR policies to install.
        state.installed = routes;
        result.control_events = satellite_count;
        for (NodeId s = 0; s < satellite_count; ++s) {
          result.activity[s].control_events = 1;
        }
      }
      break;
    }
    case Scheme::kGreen:
    case Scheme::kFlexAlgo: {
      // Slice per present demand class. green is the energy-only scheme:
      // everything rides the (1,0,0) model.
      std::map<DemandClass, int> class_slice;
      if (state.scheme == Scheme::kGreen) {
        for (const Demand& d : demands) class_slice[d.demand_class] = 130;
      } else {
        int desired = select_slice(config.policy, obs, DemandClass::kDefault);
        if (desired == 129) {
          state.default_class_slice = 129;
          state.calm_slots = 0;
        } else if (state.default_class_slice != 130) {
          if (++state.calm_slots >= config.policy.calm_slots_to_revert) {
            state.default_class_slice = 130;
            state.calm_slots = 0;
          }
        }
        for (const Demand& d : demands) {
          class_slice[d.demand_class] =
              d.demand_class == DemandClass::kDefault
                  ? state.default_class_slice
                  : select_slice(config.policy, obs, d.demand_class);
        }
      }

      std::set<int> algos;
      if (state.scheme == Scheme::kFlexAlgo) {
        algos = {128, 129, 130};  // one solve per weight row, every slot
      } else {
        algos = {130};
      }

      struct SliceSolve {
        TopologySnapshot snapshot;
        MilpInstance inst;
        MilpSolution sol;
      };
      std::map<int, SliceSolve> solves;
      if (!demands.empty()) {
        for (int algo : algos) {
          SliceSolve s;
          s.snapshot = algo == 129
                           ? filter_snapshot(snapshot, states,
                                             slice_reliability_129().excluded_tags)
                           : snapshot;
          s.inst = slice_instance(snapshot, states, demands, node_powers,
                                  satellite_count, algo, config.limits);
          s.sol = solve(s.inst, config.solver_budget_s);
          result.solve_time_s += s.sol.solve_time_s;
          if (s.sol.status == MilpStatus::kIncumbent) {
            result.warnings.push_back("slice " + std::to_string(algo) +
                                      ": solve hit the budget, using incumbent");
          }
          if (s.sol.status != MilpStatus::kInfeasible) {
            for (const std::string& v : audit_solution(s.inst, s.sol)) {
              result.warnings.push_back("audit slice " + std::to_string(algo) +
                                        ": " + v);
            }
          }
          solves.emplace(algo, std::move(s));
        }
      }

      for (const auto& [cls, algo] : class_slice) {
        auto it = solves.find(algo);
        if (it == solves.end()) continue;
        const SliceSolve& s = it->second;
        if (s.sol.status == MilpStatus::kInfeasible) {
          result.warnings.push_back("slice " + std::to_string(algo) +
                                    ": infeasible, demands left unrouted");
          continue;
        }
        std::vector<Demand> of_class;
        for (const Demand& d : demands) {
          if (d.demand_class == cls) of_class.push_back(d);
        }
        std::map<int, InstalledRoute> slice_routes =
            milp_routes(s.inst, s.sol, s.snapshot, states, demands, node_powers,
                        satellite_count, algo);
        for (const Demand& d : of_class) routes[d.id] = slice_routes[d.id];
      }

      InstallOutcome install = install_routes(state, routes);
      result.control_events = install.control_events;

      int headline = 130;
      for (const auto& [cls, algo] : class_slice) headline = std::min(headline, algo);
      state.active_slice = headline;
      break;
    }
  }

  state.last_solve_time_s = result.solve_time_s;
  switch (state.scheme) {
    case Scheme::kGreen: result.active_slice = 130; break;
    case Scheme::kFlexAlgo: result.active_slice = state.active_slice; break;
    default: result.active_slice = 0; break;
  }

  // Materialize routed demands and the per-satellite activity.
  for (const Demand& d : demands) {
    RoutedDemand r;
    r.demand = d;
    auto it = routes.find(d.id);
    if (it != routes.end()) {
      r.path = it->second.path;
      r.path_delay_ms = path_delay_ms(r.path, snapshot, satellite_count,
                                      config.limits.t_node_ms);
      for (size_t i = 0; i + 1 < r.path.size(); ++i) {
        if (!snapshot.has_link(r.path[i], r.path[i + 1])) {
          throw std::runtime_error("stale route: link " +
                                   std::to_string(r.path[i]) + "-" +
                                   std::to_string(r.path[i + 1]) +
                                   " missing from the snapshot");
        }
      }
      for (NodeId n : r.path) {
        if (!is_sat_node(n, satellite_count)) continue;
        result.activity[n].forwarded_mbps += d.bandwidth_mbps;
        if (state.scheme == Scheme::kSrv6) ++result.activity[n].flow_entries;
      }
    }
    result.routed.push_back(std::move(r));
  }
  return result;
}

}  // namespace flexsat
