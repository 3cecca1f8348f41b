#include "flexsat/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "flexsat/controller.hpp"

namespace flexsat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Values enter the ledger at CSV precision so that every summary
// statistic is recomputable from the exported files bit-for-bit.
double csv_precision(double v) { return std::stod(fmt(v)); }

struct DecisionRow {
  int slot = 0;
  Scheme scheme = Scheme::kOspf;
  int active_slice = 0;
  double solve_time_s = 0.0;
  int control_events = 0;
};

struct SliceRow {
  int slot = 0;
  int algo = 0;
  std::optional<double> latency_ms;
  int hops = 0;
};

struct Ledger {
  std::vector<MetricsRecord> metrics;
  std::vector<DecisionRow> decisions;
  std::vector<SliceRow> slices;
  int audit_violations = 0;
  int budget_breach_slots = 0;
  int unrouted_demand_slots = 0;
};

// q-quantile of a series using the ceil(q*n) order statistic.
double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  size_t rank = static_cast<size_t>(
      std::ceil(q * static_cast<double>(values.size())));
  if (rank == 0) rank = 1;
  return values[std::min(rank, values.size()) - 1];
}

bool in_any(const std::vector<SlotRange>& ranges, int slot) {
  return std::any_of(ranges.begin(), ranges.end(),
                     [&](const SlotRange& r) { return r.contains(slot); });
}

ScenarioConfig scenario_from(const RunConfig& cfg, const Constellation& c) {
  ScenarioConfig s;
  s.kind = cfg.scenario;
  s.total_slots = cfg.total_slots;
  s.base_load_mbps = cfg.base_load_mbps;
  s.burst_load_mbps = cfg.burst_load_mbps;
  s.urgent_load_mbps = cfg.urgent_load_mbps;
  s.burst_intervals = cfg.burst_intervals;
  s.urgent_intervals = cfg.urgent_intervals;
  s.packet_timeout_s = cfg.packet_timeout_s;
  s.source = c.station_id(cfg.source);
  s.destination = c.station_id(cfg.destination);
  return s;
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRecord>& rows) {
  std::ofstream out(path);
  out << "slot,scheme,cpu_avg,pdr,latency_ms\n";
  for (const MetricsRecord& m : rows) {
    out << m.slot << ',' << to_string(m.scheme) << ',' << fmt(m.cpu_avg) << ','
        << fmt(m.pdr) << ',' << (m.latency_defined ? fmt(m.latency_ms) : "") << '\n';
  }
}

void write_decisions_csv(const fs::path& path, const std::vector<DecisionRow>& rows) {
  std::ofstream out(path);
  out << "slot,scheme,active_slice,solve_time_s,control_events\n";
  for (const DecisionRow& d : rows) {
    out << d.slot << ',' << to_string(d.scheme) << ',' << d.active_slice << ','
        << fmt(d.solve_time_s) << ',' << d.control_events << '\n';
  }
}

void write_slices_csv(const fs::path& path, const std::vector<SliceRow>& rows) {
  std::ofstream out(path);
  out << "slot,algo,latency_ms,hops\n";
  for (const SliceRow& s : rows) {
    out << s.slot << ',' << s.algo << ','
        << (s.latency_ms ? fmt(*s.latency_ms) : "") << ',' << s.hops << '\n';
  }
}

void write_cdf_csv(const fs::path& path, const std::vector<double>& series) {
  std::ofstream out(path);
  out << "value,cum_prob\n";
  for (const CdfPoint& p : make_cdf(series)) {
    out << fmt(p.value) << ',' << fmt(p.cum_prob) << '\n';
  }
}

std::vector<double> series_of(const Ledger& ledger, Scheme scheme,
                              const std::string& metric) {
  std::vector<double> out;
  for (const MetricsRecord& m : ledger.metrics) {
    if (m.scheme != scheme) continue;
    if (metric == "cpu") out.push_back(m.cpu_avg);
    if (metric == "pdr") out.push_back(m.pdr);
    if (metric == "latency" && m.latency_defined) out.push_back(m.latency_ms);
  }
  return out;
}

RunSummary summarize(const RunConfig& cfg, const Ledger& ledger) {
  RunSummary summary;
  summary.total_slots = cfg.total_slots;
  summary.audit_violations = ledger.audit_violations;
  summary.budget_breach_slots = ledger.budget_breach_slots;
  summary.unrouted_demand_slots = ledger.unrouted_demand_slots;

  for (Scheme scheme : cfg.schemes) {
    SchemeSummary s;
    std::vector<double> cpu = series_of(ledger, scheme, "cpu");
    std::vector<double> pdr = series_of(ledger, scheme, "pdr");
    std::vector<double> lat = series_of(ledger, scheme, "latency");
    auto mean = [](const std::vector<double>& v) {
      if (v.empty()) return 0.0;
      double sum = 0.0;
      for (double x : v) sum += x;
      return sum / static_cast<double>(v.size());
    };
    s.cpu_mean = mean(cpu);
    s.cpu_p50 = percentile(cpu, 0.50);
    s.cpu_p95 = percentile(cpu, 0.95);
    s.pdr_mean = mean(pdr);
    s.pdr_p50 = percentile(pdr, 0.50);
    s.pdr_p95 = percentile(pdr, 0.95);
    s.latency_mean = mean(lat);
    s.latency_p50 = percentile(lat, 0.50);
    s.latency_p95 = percentile(lat, 0.95);
    s.latency_slots = static_cast<int>(lat.size());
    std::vector<double> solve;
    for (const DecisionRow& d : ledger.decisions) {
      if (d.scheme == scheme) solve.push_back(d.solve_time_s);
    }
    s.solve_time_p50_s = percentile(solve, 0.50);
    s.solve_time_p95_s = percentile(solve, 0.95);
    summary.schemes[scheme] = s;
  }

  bool has_ospf = summary.schemes.count(Scheme::kOspf) != 0;
  bool has_flex = summary.schemes.count(Scheme::kFlexAlgo) != 0;
  if (has_ospf && has_flex && summary.schemes[Scheme::kOspf].cpu_mean > 0.0) {
    summary.cpu_reduction_vs_ospf = 1.0 - summary.schemes[Scheme::kFlexAlgo].cpu_mean /
                                              summary.schemes[Scheme::kOspf].cpu_mean;
  }
  if (has_flex && cfg.scenario == ScenarioKind::kHighDemand) {
    double lo = 1.0;
    bool seen = false;
    for (const MetricsRecord& m : ledger.metrics) {
      if (m.scheme == Scheme::kFlexAlgo && in_any(cfg.burst_intervals, m.slot)) {
        lo = std::min(lo, m.pdr);
        seen = true;
      }
    }
    if (seen) summary.min_burst_pdr = lo;
  }
  if (cfg.scenario == ScenarioKind::kUrgentFlow && !ledger.slices.empty()) {
    double sum130 = 0.0, sum128 = 0.0;
    int n130 = 0, n128 = 0;
    for (const SliceRow& s : ledger.slices) {
      if (!in_any(cfg.urgent_intervals, s.slot) || !s.latency_ms) continue;
      if (s.algo == 130) sum130 += *s.latency_ms, ++n130;
      if (s.algo == 128) sum128 += *s.latency_ms, ++n128;
    }
    if (n130 > 0 && n128 > 0) {
      summary.urgent_latency_delta_ms = sum130 / n130 - sum128 / n128;
    }
  }
  return summary;
}

json summary_to_json(const RunConfig& cfg, const RunSummary& summary) {
  json root;
  root["total_slots"] = summary.total_slots;
  root["scenario"] = to_string(cfg.scenario);
  json per;
  for (const auto& [scheme, s] : summary.schemes) {
    per[to_string(scheme)] = {
        {"cpu", {{"mean", s.cpu_mean}, {"p50", s.cpu_p50}, {"p95", s.cpu_p95}}},
        {"pdr", {{"mean", s.pdr_mean}, {"p50", s.pdr_p50}, {"p95", s.pdr_p95}}},
        {"latency_ms",
         {{"mean", s.latency_mean},
          {"p50", s.latency_p50},
          {"p95", s.latency_p95},
          {"defined_slots", s.latency_slots}}},
        {"solve_time_s", {{"p50", s.solve_time_p50_s}, {"p95", s.solve_time_p95_s}}}};
  }
  root["schemes"] = per;
  json headline;
  headline["cpu_reduction_vs_ospf"] =
      summary.cpu_reduction_vs_ospf ? json(*summary.cpu_reduction_vs_ospf) : json();
  headline["min_burst_pdr"] =
      summary.min_burst_pdr ? json(*summary.min_burst_pdr) : json();
  headline["urgent_latency_delta_ms"] = summary.urgent_latency_delta_ms
                                            ? json(*summary.urgent_latency_delta_ms)
                                            : json();
  root["headline"] = headline;
  root["audit_violations"] = summary.audit_violations;
  root["budget_breach_slots"] = summary.budget_breach_slots;
  root["unrouted_demand_slots"] = summary.unrouted_demand_slots;
  return root;
}

void write_outputs(const RunConfig& cfg, const fs::path& dir, const Ledger& ledger,
                   const RunSummary& summary) {
  fs::create_directories(dir);
  write_metrics_csv(dir / "metrics.csv", ledger.metrics);
  write_decisions_csv(dir / "decisions.csv", ledger.decisions);
  if (!ledger.slices.empty()) write_slices_csv(dir / "slices.csv", ledger.slices);
  for (Scheme scheme : cfg.schemes) {
    for (const char* metric : {"cpu", "pdr", "latency"}) {
      fs::path p = dir / ("cdf_" + std::string(metric) + "_" + to_string(scheme) +
                          ".csv");
      write_cdf_csv(p, series_of(ledger, scheme, metric));
    }
  }
  std::ofstream(dir / "summary.json") << summary_to_json(cfg, summary).dump(2) << '\n';
  std::ofstream(dir / "config_echo.json") << echo_config(cfg);
}

}  // namespace

RunSummary run(const RunConfig& cfg) {
  validate_config(cfg);
  Constellation constellation =
      Constellation::build(lightspeed_shells(), default_stations(),
                           cfg.min_elevation_deg, cfg.link_capacity_mbps);
  ScenarioConfig scenario = scenario_from(cfg, constellation);
  int sat_count = constellation.satellite_count();
  int node_count = constellation.node_count();

  ControllerConfig controller;
  controller.policy = cfg.policy;
  controller.solver_budget_s = cfg.solver_budget_s;
  controller.limits = cfg.limits;

  Ledger ledger;
  for (Scheme scheme : cfg.schemes) {
    LinkStateTable states;
    SchemeState state;
    state.scheme = scheme;
    std::vector<double> powers(node_count, 0.0);
    for (int s = 0; s < sat_count; ++s) powers[s] = CpuCoefficients{}.base_idle;

    for (int slot = 0; slot < cfg.total_slots; ++slot) {
      TopologySnapshot snap = constellation.propagate(slot, cfg.slot_seconds);
      std::vector<Demand> demands = generate_demands(scenario, slot);
      StepResult res = step(slot, snap, states, demands, powers, sat_count, state,
                            controller);

      bool budget_hit = false;
      for (const std::string& w : res.warnings) {
        if (w.rfind("audit", 0) == 0) ++ledger.audit_violations;
        if (w.find("hit the budget") != std::string::npos) budget_hit = true;
      }
      if (budget_hit) ++ledger.budget_breach_slots;
      if (std::any_of(res.routed.begin(), res.routed.end(),
                      [](const RoutedDemand& r) { return r.path.empty(); })) {
        ++ledger.unrouted_demand_slots;
      }

      // Slice SPF paths for the source/destination pair, evaluated on the
      // same observations the controller used (pre-traffic states).
      if (scheme == Scheme::kFlexAlgo) {
        for (const SliceConfig& slice :
             {slice_energy_130(), slice_reliability_129(), slice_delay_128()}) {
          SliceRow row;
          row.slot = slot;
          row.algo = slice.algo_id;
          auto tree = compute_slice_tree(snap, states, slice, scenario.source,
                                         powers, sat_count);
          auto it = tree.find(scenario.destination);
          if (it != tree.end()) {
            row.latency_ms = csv_precision(path_delay_ms(
                it->second.node_sequence, snap, sat_count, cfg.limits.t_node_ms));
            row.hops = static_cast<int>(it->second.node_sequence.size()) - 1;
          }
          ledger.slices.push_back(row);
        }
      }

      apply_traffic(snap, states, res.routed);

      CpuCoefficients profile = cpu_profile(scheme);
      std::vector<double> cpu;
      for (const auto& [sat, activity] : res.activity) {
        cpu.push_back(cpu_proxy(profile, activity));
      }
      MetricsRecord rec = record_metrics(slot, scheme, res.routed, cpu);
      rec.cpu_avg = csv_precision(rec.cpu_avg);
      rec.pdr = csv_precision(rec.pdr);
      if (rec.latency_defined) rec.latency_ms = csv_precision(rec.latency_ms);
      ledger.metrics.push_back(rec);
      ledger.decisions.push_back({slot, scheme, res.active_slice,
                                  csv_precision(res.solve_time_s),
                                  res.control_events});

      powers = forwarding_power(res.routed, node_count, sat_count, powers);
    }
  }

  RunSummary summary = summarize(cfg, ledger);
  write_outputs(cfg, cfg.output_dir, ledger, summary);
  return summary;
}

void dump_lp(const RunConfig& cfg, int slot, int algo_id, std::ostream& os) {
  validate_config(cfg);
  if (slot < 0 || slot >= cfg.total_slots) {
    throw ConfigError("lpdump: slot " + std::to_string(slot) +
                      " outside [0, " + std::to_string(cfg.total_slots) + ")");
  }
  if (algo_id != 128 && algo_id != 129 && algo_id != 130) {
    throw ConfigError("lpdump: algo must be 128, 129 or 130");
  }
  Constellation constellation =
      Constellation::build(lightspeed_shells(), default_stations(),
                           cfg.min_elevation_deg, cfg.link_capacity_mbps);
  ScenarioConfig scenario = scenario_from(cfg, constellation);
  int sat_count = constellation.satellite_count();
  int node_count = constellation.node_count();

  ControllerConfig controller;
  controller.policy = cfg.policy;
  controller.solver_budget_s = cfg.solver_budget_s;
  controller.limits = cfg.limits;

  LinkStateTable states;
  SchemeState state;
  state.scheme = Scheme::kFlexAlgo;
  std::vector<double> powers(node_count, 0.0);
  for (int s = 0; s < sat_count; ++s) powers[s] = CpuCoefficients{}.base_idle;

  for (int t = 0; t < slot; ++t) {
    TopologySnapshot snap = constellation.propagate(t, cfg.slot_seconds);
    std::vector<Demand> demands = generate_demands(scenario, t);
    StepResult res = step(t, snap, states, demands, powers, sat_count, state,
                          controller);
    apply_traffic(snap, states, res.routed);
    powers = forwarding_power(res.routed, node_count, sat_count, powers);
  }

  TopologySnapshot snap = constellation.propagate(slot, cfg.slot_seconds);
  std::vector<Demand> demands = generate_demands(scenario, slot);
  MilpInstance inst = slice_instance(snap, states, demands, powers, sat_count,
                                     algo_id, cfg.limits);
  write_lp(inst, os);
}

RunSummary export_from_ledger(const RunConfig& cfg, const std::string& ledger_dir,
                              const std::string& out_dir) {
  fs::path in_dir(ledger_dir);
  std::ifstream metrics_in(in_dir / "metrics.csv");
  if (!metrics_in) {
    throw std::runtime_error((in_dir / "metrics.csv").string() + ": cannot open");
  }

  Ledger ledger;
  std::string line;
  std::getline(metrics_in, line);  // header
  while (std::getline(metrics_in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string slot, scheme, cpu, pdr, latency;
    std::getline(ss, slot, ',');
    std::getline(ss, scheme, ',');
    std::getline(ss, cpu, ',');
    std::getline(ss, pdr, ',');
    std::getline(ss, latency, ',');
    MetricsRecord m;
    m.slot = std::stoi(slot);
    bool known = false;
    for (Scheme s : {Scheme::kOspf, Scheme::kSrv6, Scheme::kGreen, Scheme::kFlexAlgo}) {
      if (scheme == to_string(s)) m.scheme = s, known = true;
    }
    if (!known) throw std::runtime_error("metrics.csv: unknown scheme " + scheme);
    m.cpu_avg = std::stod(cpu);
    m.pdr = std::stod(pdr);
    if (!latency.empty()) {
      m.latency_ms = std::stod(latency);
      m.latency_defined = true;
    }
    ledger.metrics.push_back(m);
  }

  std::ifstream decisions_in(in_dir / "decisions.csv");
  if (decisions_in) {
    std::getline(decisions_in, line);
    while (std::getline(decisions_in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string slot, scheme, slice, solve, events;
      std::getline(ss, slot, ',');
      std::getline(ss, scheme, ',');
      std::getline(ss, slice, ',');
      std::getline(ss, solve, ',');
      std::getline(ss, events, ',');
      DecisionRow d;
      d.slot = std::stoi(slot);
      for (Scheme s :
           {Scheme::kOspf, Scheme::kSrv6, Scheme::kGreen, Scheme::kFlexAlgo}) {
        if (scheme == to_string(s)) d.scheme = s;
      }
      d.active_slice = std::stoi(slice);
      d.solve_time_s = std::stod(solve);
      d.control_events = std::stoi(events);
      ledger.decisions.push_back(d);
    }
  }

  std::ifstream slices_in(in_dir / "slices.csv");
  if (slices_in) {
    std::getline(slices_in, line);
    while (std::getline(slices_in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string slot, algo, latency, hops;
      std::getline(ss, slot, ',');
      std::getline(ss, algo, ',');
      std::getline(ss, latency, ',');
      std::getline(ss, hops, ',');
      SliceRow s;
      s.slot = std::stoi(slot);
      s.algo = std::stoi(algo);
      if (!latency.empty()) s.latency_ms = std::stod(latency);
      s.hops = std::stoi(hops);
      ledger.slices.push_back(s);
    }
  }

  RunSummary summary = summarize(cfg, ledger);
  write_outputs(cfg, out_dir, ledger, summary);
  return summary;
}

}  // namespace flexsat
