#include "flexsat/trafficlab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flexsat {

namespace {

std::pair<NodeId, NodeId> canon(NodeId a, NodeId b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kOspf: return "ospf";
    case Scheme::kSrv6: return "srv6";
    case Scheme::kGreen: return "green";
    case Scheme::kFlexAlgo: return "flexalgo";
  }
  return "?";
}

const char* to_string(DemandClass cls) {
  switch (cls) {
    case DemandClass::kDefault: return "default";
    case DemandClass::kHighDemand: return "high-demand";
    case DemandClass::kUrgent: return "urgent";
  }
  return "?";
}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kDefault: return "default";
    case ScenarioKind::kHighDemand: return "high-demand";
    case ScenarioKind::kUrgentFlow: return "urgent-flow";
  }
  return "?";
}

ScenarioConfig make_scenario(ScenarioKind kind, NodeId source, NodeId destination) {
  ScenarioConfig s;
  s.kind = kind;
  s.source = source;
  s.destination = destination;
  std::vector<SlotRange> windows{{100, 159}, {250, 309}, {400, 459}};
  if (kind == ScenarioKind::kHighDemand) s.burst_intervals = windows;
  if (kind == ScenarioKind::kUrgentFlow) s.urgent_intervals = windows;
  return s;
}

std::vector<Demand> generate_demands(const ScenarioConfig& scenario, int slot) {
  if (slot < 0 || slot >= scenario.total_slots) {
    throw std::invalid_argument("generate_demands: slot " + std::to_string(slot) +
                                " outside [0, " +
                                std::to_string(scenario.total_slots) + ")");
  }
  if (scenario.base_load_mbps <= 0.0 || scenario.burst_load_mbps <= 0.0 ||
      scenario.urgent_load_mbps <= 0.0) {
    throw std::invalid_argument("generate_demands: loads must be positive");
  }
  if (scenario.source == scenario.destination) {
    throw std::invalid_argument("generate_demands: source equals destination");
  }

  std::vector<Demand> out;
  out.push_back({0, scenario.source, scenario.destination, scenario.base_load_mbps,
                 DemandClass::kDefault});

  auto in_any = [&](const std::vector<SlotRange>& ranges) {
    return std::any_of(ranges.begin(), ranges.end(),
                       [&](const SlotRange& r) { return r.contains(slot); });
  };

  if (scenario.kind == ScenarioKind::kHighDemand && in_any(scenario.burst_intervals)) {
    double extra = scenario.burst_load_mbps - scenario.base_load_mbps;
    if (extra > 0.0) {
      out.push_back({1, scenario.source, scenario.destination, extra,
                     DemandClass::kHighDemand});
    }
  }
  if (scenario.kind == ScenarioKind::kUrgentFlow && in_any(scenario.urgent_intervals)) {
    out.push_back({1, scenario.source, scenario.destination,
                   scenario.urgent_load_mbps, DemandClass::kUrgent});
  }
  return out;
}

TrafficResult apply_traffic(const TopologySnapshot& snapshot, LinkStateTable& states,
                            std::vector<RoutedDemand>& routed) {
  TrafficResult result;

  // Offered load per undirected link.
  for (const RoutedDemand& r : routed) {
    result.offered_mbps += r.demand.bandwidth_mbps;
    for (size_t i = 0; i + 1 < r.path.size(); ++i) {
      NodeId a = r.path[i], b = r.path[i + 1];
      if (!snapshot.has_link(a, b)) {
        throw std::runtime_error("apply_traffic: demand " +
                                 std::to_string(r.demand.id) + " uses absent link " +
                                 std::to_string(a) + "-" + std::to_string(b));
      }
      result.link_offered_mbps[canon(a, b)] += r.demand.bandwidth_mbps;
    }
  }

  for (const auto& [key, offered] : result.link_offered_mbps) {
    const Link* link = snapshot.find_link(key.first, key.second);
    result.link_delivery[key] =
        offered <= link->capacity_mbps ? 1.0 : link->capacity_mbps / offered;
  }

  for (RoutedDemand& r : routed) {
    if (r.path.size() < 2) {
      r.delivered_fraction = 0.0;  // unrouted
      continue;
    }
    double fraction = 1.0;
    for (size_t i = 0; i + 1 < r.path.size(); ++i) {
      fraction *= result.link_delivery.at(canon(r.path[i], r.path[i + 1]));
    }
    r.delivered_fraction = fraction;
    result.delivered_mbps += r.demand.bandwidth_mbps * fraction;
  }

  // Push measurements into the link-state table; idle links clear their
  // utilization but keep the delivery EMA.
  for (const Link& l : snapshot.links) {
    if (l.a > l.b) continue;
    auto it = result.link_offered_mbps.find(canon(l.a, l.b));
    double offered = it == result.link_offered_mbps.end() ? 0.0 : it->second;
    double delivered = offered == 0.0 ? 0.0 : offered * result.link_delivery.at(it->first);
    states.update(l.a, l.b, l.capacity_mbps, offered, delivered);
  }
  return result;
}

CpuCoefficients cpu_profile(Scheme scheme) {
  CpuCoefficients c;
  switch (scheme) {
    case Scheme::kOspf:
      c.ctrl_per_event = 73.0;  // full SPF + table rebuild
      c.static_entries = 10;    // routing table footprint
      break;
    case Scheme::kSrv6:
      c.fwd_per_mbps = 1.35;  // SRH processing on every hop
      c.static_entries = 1;   // node locator
      break;
    case Scheme::kGreen:
      c.static_entries = 1;
      break;
    case Scheme::kFlexAlgo:
      c.static_entries = 3;  // one locator per algorithm
      break;
  }
  return c;
}

double cpu_proxy(const CpuCoefficients& coeffs, const SatActivity& activity) {
  double p = coeffs.base_idle + coeffs.fwd_per_mbps * activity.forwarded_mbps +
             coeffs.table_per_entry * (coeffs.static_entries + activity.flow_entries) +
             coeffs.ctrl_per_event * activity.control_events;
  return std::clamp(p, 0.0, 100.0);
}

MetricsRecord record_metrics(int slot, Scheme scheme,
                             const std::vector<RoutedDemand>& routed,
                             const std::vector<double>& activated_cpu) {
  MetricsRecord rec;
  rec.slot = slot;
  rec.scheme = scheme;

  if (!activated_cpu.empty()) {
    double sum = 0.0;
    for (double v : activated_cpu) sum += v;
    rec.cpu_avg = sum / static_cast<double>(activated_cpu.size());
  }

  double offered = 0.0, delivered = 0.0, lat_weight = 0.0, lat_sum = 0.0;
  for (const RoutedDemand& r : routed) {
    offered += r.demand.bandwidth_mbps;
    delivered += r.demand.bandwidth_mbps * r.delivered_fraction;
    if (r.path.size() >= 2) {
      lat_weight += r.demand.bandwidth_mbps;
      lat_sum += r.demand.bandwidth_mbps * r.path_delay_ms;
    }
  }
  rec.pdr = offered == 0.0 ? 1.0 : delivered / offered;
  if (lat_weight > 0.0) {
    rec.latency_ms = lat_sum / lat_weight;
    rec.latency_defined = true;
  }
  return rec;
}

std::vector<CdfPoint> make_cdf(std::vector<double> values) {
  std::vector<CdfPoint> cdf;
  if (values.empty()) return cdf;
  std::sort(values.begin(), values.end());
  size_t n = values.size();
  for (size_t i = 0; i < n; ++i) {
    if (i + 1 < n && values[i + 1] == values[i]) continue;  // keep last duplicate
    cdf.push_back({values[i], static_cast<double>(i + 1) / static_cast<double>(n)});
  }
  return cdf;
}

}  // namespace flexsat
