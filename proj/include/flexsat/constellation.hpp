#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flexsat/geometry.hpp"

namespace flexsat {

using NodeId = int32_t;

// One Walker-style shell of circular orbits. Planes are evenly spaced in
// right ascension over 360 degrees; satellites are evenly spaced within a
// plane. `phasing` is the Walker F parameter: adjacent planes are offset
// in-plane by phasing * 360 / satellite_count degrees.
struct ShellConfig {
  int satellite_count = 0;
  double altitude_km = 0.0;
  double inclination_deg = 0.0;
  int plane_count = 1;
  int phasing = 0;
  // Cross-plane ISLs are dropped while either endpoint is above this
  // |latitude|; counter-rotating planes converge near the poles.
  double interplane_lat_limit_deg = 75.0;
};

struct GroundStation {
  std::string name;
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
};

struct Satellite {
  NodeId id = 0;
  int shell = 0;
  int plane = 0;
  int slot_in_plane = 0;
  double idle_power = 2.0;  // baseline CPU-power proxy when activated
  int terminal_count = 4;
};

enum class LinkKind { kIntraPlane, kInterPlane, kUplink, kDownlink };

// Directed link. ISLs and ground links are generated in symmetric pairs,
// so (a,b) present implies (b,a) present with equal distance and delay.
struct Link {
  NodeId a = 0;
  NodeId b = 0;
  LinkKind kind = LinkKind::kIntraPlane;
  double distance_km = 0.0;
  double delay_ms = 0.0;
  double capacity_mbps = 0.0;

  bool is_isl() const {
    return kind == LinkKind::kIntraPlane || kind == LinkKind::kInterPlane;
  }
};

struct TopologySnapshot {
  int slot_index = 0;
  double epoch_s = 0.0;
  std::vector<Vec3> positions;  // ECEF km, indexed by NodeId
  std::vector<Link> links;      // sorted by (a, b)

  int node_count() const { return static_cast<int>(positions.size()); }
  // Number of distinct ISL neighbors of a satellite.
  int isl_degree(NodeId sat) const;
  const Link* find_link(NodeId a, NodeId b) const;
  bool has_link(NodeId a, NodeId b) const { return find_link(a, b) != nullptr; }
};

// d = distance / c. Throws std::domain_error on negative distance.
double propagation_delay_ms(double distance_km);

// Immutable two-shell (or n-shell) constellation plus ground segment.
// Node ids: satellites first in shell/plane/slot order, then ground
// stations. propagate() is a pure function of (config, slot_index).
class Constellation {
 public:
  static Constellation build(const std::vector<ShellConfig>& shells,
                             const std::vector<GroundStation>& stations,
                             double min_elevation_deg = 25.0,
                             double link_capacity_mbps = 20.0);

  TopologySnapshot propagate(int slot_index, double slot_duration_s) const;

  int satellite_count() const { return static_cast<int>(satellites_.size()); }
  int station_count() const { return static_cast<int>(stations_.size()); }
  int node_count() const { return satellite_count() + station_count(); }

  bool is_satellite(NodeId id) const {
    return id >= 0 && id < satellite_count();
  }
  const Satellite& satellite(NodeId id) const { return satellites_[id]; }
  const std::vector<Satellite>& satellites() const { return satellites_; }
  const GroundStation& station(NodeId id) const {
    return stations_[id - satellite_count()];
  }
  // Node id of a station by name; -1 if absent.
  NodeId station_id(const std::string& name) const;

  double min_elevation_deg() const { return min_elevation_deg_; }
  double link_capacity_mbps() const { return link_capacity_mbps_; }
  const std::vector<ShellConfig>& shells() const { return shells_; }

 private:
  Constellation() = default;

  Vec3 satellite_position_ecef(const Satellite& sat, double t_s) const;

  std::vector<ShellConfig> shells_;
  std::vector<GroundStation> stations_;
  std::vector<Satellite> satellites_;
  std::vector<Vec3> station_ecef_;
  double min_elevation_deg_ = 25.0;
  double link_capacity_mbps_ = 20.0;
};

// The Lightspeed-style defaults used by the evaluation scenarios:
// 78 satellites at 1015 km in 6 polar planes and 120 satellites at
// 1325 km in 10 inclined planes, with 10 ground stations including
// Ottawa and Vancouver.
std::vector<ShellConfig> lightspeed_shells();
std::vector<GroundStation> default_stations();

}  // namespace flexsat
