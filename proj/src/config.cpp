#include "flexsat/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "flexsat/constellation.hpp"

namespace flexsat {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

void expect_keys(const json& obj, const std::string& where,
                 const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (allowed.count(key) == 0) {
      fail(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

double get_number(const json& obj, const std::string& where, const std::string& key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& where, const std::string& key,
            int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) fail(where + "." + key, "expected an integer");
  return obj[key].get<int>();
}

std::string get_string(const json& obj, const std::string& where,
                       const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) fail(where + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

std::vector<SlotRange> get_ranges(const json& obj, const std::string& where,
                                  const std::string& key,
                                  std::vector<SlotRange> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& arr = obj[key];
  if (!arr.is_array()) fail(where + "." + key, "expected an array of [first, last]");
  std::vector<SlotRange> out;
  for (const json& item : arr) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() ||
        !item[1].is_number_integer()) {
      fail(where + "." + key, "each interval must be [first, last] integers");
    }
    out.push_back({item[0].get<int>(), item[1].get<int>()});
  }
  return out;
}

ScenarioKind parse_scenario(const std::string& name) {
  if (name == "default") return ScenarioKind::kDefault;
  if (name == "high-demand") return ScenarioKind::kHighDemand;
  if (name == "urgent-flow") return ScenarioKind::kUrgentFlow;
  fail("scenario.name", "unknown scenario '" + name + "'");
}

Scheme parse_scheme(const std::string& name) {
  if (name == "ospf") return Scheme::kOspf;
  if (name == "srv6") return Scheme::kSrv6;
  if (name == "green") return Scheme::kGreen;
  if (name == "flexalgo") return Scheme::kFlexAlgo;
  fail("schemes", "unknown scheme '" + name + "'");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON at byte " + std::to_string(e.byte) +
                      ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  expect_keys(root, "", {"constellation", "scenario", "policy", "milp", "schemes",
                         "output_dir", "seed", "solver_budget_s"});

  RunConfig cfg;

  if (root.contains("constellation")) {
    const json& c = root["constellation"];
    if (!c.is_object()) fail("constellation", "expected an object");
    expect_keys(c, "constellation",
                {"min_elevation_deg", "link_capacity_mbps", "slot_seconds"});
    cfg.min_elevation_deg =
        get_number(c, "constellation", "min_elevation_deg", cfg.min_elevation_deg);
    cfg.link_capacity_mbps =
        get_number(c, "constellation", "link_capacity_mbps", cfg.link_capacity_mbps);
    cfg.slot_seconds = get_number(c, "constellation", "slot_seconds", cfg.slot_seconds);
  }

  if (root.contains("scenario")) {
    const json& s = root["scenario"];
    if (!s.is_object()) fail("scenario", "expected an object");
    expect_keys(s, "scenario",
                {"name", "total_slots", "base_load_mbps", "burst_load_mbps",
                 "urgent_load_mbps", "burst_intervals", "urgent_intervals",
                 "packet_timeout_s", "source", "destination"});
    cfg.scenario = parse_scenario(get_string(s, "scenario", "name", "default"));
    cfg.total_slots = get_int(s, "scenario", "total_slots", cfg.total_slots);
    cfg.base_load_mbps = get_number(s, "scenario", "base_load_mbps", cfg.base_load_mbps);
    cfg.burst_load_mbps =
        get_number(s, "scenario", "burst_load_mbps", cfg.burst_load_mbps);
    cfg.urgent_load_mbps =
        get_number(s, "scenario", "urgent_load_mbps", cfg.urgent_load_mbps);
    cfg.burst_intervals =
        get_ranges(s, "scenario", "burst_intervals", cfg.burst_intervals);
    cfg.urgent_intervals =
        get_ranges(s, "scenario", "urgent_intervals", cfg.urgent_intervals);
    cfg.packet_timeout_s =
        get_number(s, "scenario", "packet_timeout_s", cfg.packet_timeout_s);
    cfg.source = get_string(s, "scenario", "source", cfg.source);
    cfg.destination = get_string(s, "scenario", "destination", cfg.destination);
  }

  if (root.contains("policy")) {
    const json& p = root["policy"];
    if (!p.is_object()) fail("policy", "expected an object");
    expect_keys(p, "policy", {"congestion_utilization", "calm_slots_to_revert"});
    cfg.policy.congestion_utilization = get_number(
        p, "policy", "congestion_utilization", cfg.policy.congestion_utilization);
    cfg.policy.calm_slots_to_revert =
        get_int(p, "policy", "calm_slots_to_revert", cfg.policy.calm_slots_to_revert);
  }

  if (root.contains("milp")) {
    const json& m = root["milp"];
    if (!m.is_object()) fail("milp", "expected an object");
    expect_keys(m, "milp", {"p_lim", "t_node_ms", "shared_capacity"});
    cfg.limits.p_lim = get_number(m, "milp", "p_lim", cfg.limits.p_lim);
    cfg.limits.t_node_ms = get_number(m, "milp", "t_node_ms", cfg.limits.t_node_ms);
    if (m.contains("shared_capacity")) {
      if (!m["shared_capacity"].is_boolean()) {
        fail("milp.shared_capacity", "expected a boolean");
      }
      cfg.limits.shared_capacity = m["shared_capacity"].get<bool>();
    }
  }

  if (root.contains("schemes")) {
    const json& s = root["schemes"];
    if (!s.is_array()) fail("schemes", "expected an array of scheme names");
    cfg.schemes.clear();
    for (const json& item : s) {
      if (!item.is_string()) fail("schemes", "expected strings");
      cfg.schemes.push_back(parse_scheme(item.get<std::string>()));
    }
  }

  cfg.output_dir = get_string(root, "config", "output_dir", cfg.output_dir);
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer()) fail("seed", "expected an integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  cfg.solver_budget_s =
      get_number(root, "config", "solver_budget_s", cfg.solver_budget_s);

  validate_config(cfg);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate_config(const RunConfig& cfg) {
  if (cfg.min_elevation_deg < 0.0 || cfg.min_elevation_deg >= 90.0) {
    fail("constellation.min_elevation_deg", "must be in [0, 90)");
  }
  if (cfg.link_capacity_mbps <= 0.0) {
    fail("constellation.link_capacity_mbps", "must be positive");
  }
  if (cfg.slot_seconds <= 0.0) fail("constellation.slot_seconds", "must be positive");
  if (cfg.total_slots <= 0) fail("scenario.total_slots", "must be positive");
  if (cfg.base_load_mbps <= 0.0) fail("scenario.base_load_mbps", "must be positive");
  if (cfg.burst_load_mbps <= 0.0) fail("scenario.burst_load_mbps", "must be positive");
  if (cfg.urgent_load_mbps <= 0.0) fail("scenario.urgent_load_mbps", "must be positive");
  auto check_ranges = [&](const std::vector<SlotRange>& ranges, const char* key) {
    for (const SlotRange& r : ranges) {
      if (r.first > r.last) fail(std::string("scenario.") + key, "first > last");
      if (r.first < 0 || r.last >= cfg.total_slots) {
        fail(std::string("scenario.") + key,
             "interval [" + std::to_string(r.first) + ", " + std::to_string(r.last) +
                 "] outside [0, " + std::to_string(cfg.total_slots) + ")");
      }
    }
  };
  check_ranges(cfg.burst_intervals, "burst_intervals");
  check_ranges(cfg.urgent_intervals, "urgent_intervals");
  if (cfg.packet_timeout_s <= 0.0) fail("scenario.packet_timeout_s", "must be positive");

  std::set<std::string> known;
  for (const GroundStation& g : default_stations()) known.insert(g.name);
  if (known.count(cfg.source) == 0) {
    fail("scenario.source", "unknown ground station '" + cfg.source + "'");
  }
  if (known.count(cfg.destination) == 0) {
    fail("scenario.destination", "unknown ground station '" + cfg.destination + "'");
  }
  if (cfg.source == cfg.destination) {
    fail("scenario.destination", "must differ from the source");
  }

  if (cfg.policy.congestion_utilization <= 0.0 ||
      cfg.policy.congestion_utilization > 1.0) {
    fail("policy.congestion_utilization", "must be in (0, 1]");
  }
  if (cfg.policy.calm_slots_to_revert < 1) {
    fail("policy.calm_slots_to_revert", "must be at least 1");
  }
  if (cfg.limits.p_lim <= 0.0) fail("milp.p_lim", "must be positive");
  if (cfg.limits.t_node_ms < 0.0) fail("milp.t_node_ms", "must be non-negative");
  if (cfg.solver_budget_s <= 0.0) fail("solver_budget_s", "must be positive");
  if (cfg.schemes.empty()) fail("schemes", "at least one scheme required");
  std::set<Scheme> seen;
  for (Scheme s : cfg.schemes) {
    if (!seen.insert(s).second) {
      fail("schemes", std::string("duplicate scheme '") + to_string(s) + "'");
    }
  }
  if (cfg.output_dir.empty()) fail("output_dir", "must not be empty");
}

std::string echo_config(const RunConfig& cfg) {
  json root;
  root["constellation"] = {{"min_elevation_deg", cfg.min_elevation_deg},
                           {"link_capacity_mbps", cfg.link_capacity_mbps},
                           {"slot_seconds", cfg.slot_seconds}};
  json ranges_b = json::array(), ranges_u = json::array();
  for (const SlotRange& r : cfg.burst_intervals) ranges_b.push_back({r.first, r.last});
  for (const SlotRange& r : cfg.urgent_intervals) ranges_u.push_back({r.first, r.last});
  root["scenario"] = {{"name", to_string(cfg.scenario)},
                      {"total_slots", cfg.total_slots},
                      {"base_load_mbps", cfg.base_load_mbps},
                      {"burst_load_mbps", cfg.burst_load_mbps},
                      {"urgent_load_mbps", cfg.urgent_load_mbps},
                      {"burst_intervals", ranges_b},
                      {"urgent_intervals", ranges_u},
                      {"packet_timeout_s", cfg.packet_timeout_s},
                      {"source", cfg.source},
                      {"destination", cfg.destination}};
  root["policy"] = {{"congestion_utilization", cfg.policy.congestion_utilization},
                    {"calm_slots_to_revert", cfg.policy.calm_slots_to_revert}};
  root["milp"] = {{"p_lim", cfg.limits.p_lim},
                  {"t_node_ms", cfg.limits.t_node_ms},
                  {"shared_capacity", cfg.limits.shared_capacity}};
  json schemes = json::array();
  for (Scheme s : cfg.schemes) schemes.push_back(to_string(s));
  root["schemes"] = schemes;
  root["output_dir"] = cfg.output_dir;
  root["seed"] = cfg.seed;
  root["solver_budget_s"] = cfg.solver_budget_s;
  return root.dump(2) + "\n";
}

std::vector<Scheme> parse_scheme_list(const std::string& csv) {
  std::vector<Scheme> out;
  std::istringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_scheme(item));
  }
  if (out.empty()) fail("schemes", "at least one scheme required");
  return out;
}

}  // namespace flexsat
