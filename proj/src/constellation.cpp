#include "flexsat/constellation.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace flexsat {

double propagation_delay_ms(double distance_km) {
  if (distance_km < 0.0) {
    throw std::domain_error("propagation_delay_ms: negative distance");
  }
  return distance_km / kLightSpeedKmPerS * 1000.0;
}

int TopologySnapshot::isl_degree(NodeId sat) const {
  int deg = 0;
  for (const Link& l : links) {
    if (l.a == sat && l.is_isl()) ++deg;
  }
  return deg;
}

const Link* TopologySnapshot::find_link(NodeId a, NodeId b) const {
  auto it = std::lower_bound(links.begin(), links.end(), std::make_pair(a, b),
                             [](const Link& l, const std::pair<NodeId, NodeId>& key) {
                               return std::make_pair(l.a, l.b) < key;
                             });
  if (it != links.end() && it->a == a && it->b == b) return &*it;
  return nullptr;
}

Constellation Constellation::build(const std::vector<ShellConfig>& shells,
                                   const std::vector<GroundStation>& stations,
                                   double min_elevation_deg,
                                   double link_capacity_mbps) {
  if (stations.empty()) {
    throw std::invalid_argument("constellation: station list is empty");
  }
  if (min_elevation_deg < 0.0 || min_elevation_deg >= 90.0) {
    throw std::invalid_argument("constellation: elevation mask out of [0,90)");
  }
  if (link_capacity_mbps <= 0.0) {
    throw std::invalid_argument("constellation: link capacity must be positive");
  }
  for (const ShellConfig& sh : shells) {
    if (sh.satellite_count <= 0 || sh.plane_count <= 0 ||
        sh.satellite_count % sh.plane_count != 0) {
      throw std::invalid_argument(
          "constellation: satellite count not divisible by plane count");
    }
    if (sh.altitude_km <= 0.0) {
      throw std::invalid_argument("constellation: altitude must be positive");
    }
    if (sh.inclination_deg < 0.0 || sh.inclination_deg > 180.0) {
      throw std::invalid_argument("constellation: inclination out of [0,180]");
    }
  }
  for (const GroundStation& gs : stations) {
    if (std::abs(gs.latitude_deg) > 90.0 || std::abs(gs.longitude_deg) > 180.0) {
      throw std::invalid_argument("constellation: station coordinates out of range");
    }
  }

  Constellation c;
  c.shells_ = shells;
  c.stations_ = stations;
  c.min_elevation_deg_ = min_elevation_deg;
  c.link_capacity_mbps_ = link_capacity_mbps;

  NodeId next = 0;
  for (int h = 0; h < static_cast<int>(shells.size()); ++h) {
    const ShellConfig& sh = shells[h];
    int per_plane = sh.satellite_count / sh.plane_count;
    for (int p = 0; p < sh.plane_count; ++p) {
      for (int s = 0; s < per_plane; ++s) {
        Satellite sat;
        sat.id = next++;
        sat.shell = h;
        sat.plane = p;
        sat.slot_in_plane = s;
        c.satellites_.push_back(sat);
      }
    }
  }

  for (const GroundStation& gs : stations) {
    double lat = deg2rad(gs.latitude_deg);
    double lon = deg2rad(gs.longitude_deg);
    c.station_ecef_.push_back({kEarthRadiusKm * std::cos(lat) * std::cos(lon),
                               kEarthRadiusKm * std::cos(lat) * std::sin(lon),
                               kEarthRadiusKm * std::sin(lat)});
  }
  return c;
}

NodeId Constellation::station_id(const std::string& name) const {
  for (int i = 0; i < station_count(); ++i) {
    if (stations_[i].name == name) return satellite_count() + i;
  }
  return -1;
}

Vec3 Constellation::satellite_position_ecef(const Satellite& sat, double t_s) const {
  const ShellConfig& sh = shells_[sat.shell];
  int per_plane = sh.satellite_count / sh.plane_count;
  double a = kEarthRadiusKm + sh.altitude_km;
  double n = std::sqrt(kMuEarthKm3PerS2 / (a * a * a));  // rad/s
  double incl = deg2rad(sh.inclination_deg);

  double raan = 2.0 * kPi * sat.plane / sh.plane_count;
  double u0 = 2.0 * kPi * sat.slot_in_plane / per_plane +
              2.0 * kPi * sh.phasing * sat.plane / sh.satellite_count;
  double u = u0 + n * t_s;

  // ECI position on the circular orbit, then rotate by the Earth rotation
  // angle (ECI and ECEF are aligned at t = 0).
  double cu = std::cos(u), su = std::sin(u);
  double co = std::cos(raan), so = std::sin(raan);
  double ci = std::cos(incl), si = std::sin(incl);
  Vec3 eci = {a * (cu * co - su * so * ci), a * (cu * so + su * co * ci),
              a * (su * si)};

  double theta = kEarthRotationRadPerS * t_s;
  double ct = std::cos(theta), st = std::sin(theta);
  return {ct * eci.x + st * eci.y, -st * eci.x + ct * eci.y, eci.z};
}

TopologySnapshot Constellation::propagate(int slot_index,
                                          double slot_duration_s) const {
  if (slot_index < 0) {
    throw std::invalid_argument("propagate: negative slot index");
  }
  TopologySnapshot snap;
  snap.slot_index = slot_index;
  snap.epoch_s = slot_index * slot_duration_s;
  snap.positions.resize(node_count());

  for (const Satellite& sat : satellites_) {
    snap.positions[sat.id] = satellite_position_ecef(sat, snap.epoch_s);
  }
  for (int i = 0; i < station_count(); ++i) {
    snap.positions[satellite_count() + i] = station_ecef_[i];
  }

  auto add_pair = [&](NodeId i, NodeId j, LinkKind kind_fwd, LinkKind kind_rev) {
    double d = distance(snap.positions[i], snap.positions[j]);
    double delay = propagation_delay_ms(d);
    snap.links.push_back({i, j, kind_fwd, d, delay, link_capacity_mbps_});
    snap.links.push_back({j, i, kind_rev, d, delay, link_capacity_mbps_});
  };

  // ISLs, +grid pattern: a ring within each plane plus a slot-index
  // matching between adjacent planes. The matching keeps the ISL degree
  // at most 4 by construction.
  NodeId base = 0;
  for (const ShellConfig& sh : shells_) {
    int per_plane = sh.satellite_count / sh.plane_count;
    auto sat_at = [&](int p, int s) {
      p = (p % sh.plane_count + sh.plane_count) % sh.plane_count;
      s = (s % per_plane + per_plane) % per_plane;
      return base + p * per_plane + s;
    };

    for (int p = 0; p < sh.plane_count; ++p) {
      for (int s = 0; s < per_plane; ++s) {
        NodeId self = sat_at(p, s);
        // Intra-plane ring; a 2-satellite plane yields a single link and
        // the wraparound edge closes the ring for larger planes.
        if (per_plane > 1 && (s + 1 < per_plane || per_plane > 2)) {
          NodeId nxt = sat_at(p, s + 1);
          add_pair(self, nxt, LinkKind::kIntraPlane, LinkKind::kIntraPlane);
        }
        // Next plane, cyclic over the shell.
        if (sh.plane_count > 1) {
          NodeId other = sat_at(p + 1, s);
          bool dup = sh.plane_count == 2 && p == 1;  // both directions map to the same pair
          if (!dup) {
            double lat_a = latitude_deg(snap.positions[self]);
            double lat_b = latitude_deg(snap.positions[other]);
            if (std::abs(lat_a) <= sh.interplane_lat_limit_deg &&
                std::abs(lat_b) <= sh.interplane_lat_limit_deg) {
              add_pair(self, other, LinkKind::kInterPlane, LinkKind::kInterPlane);
            }
          }
        }
      }
    }
    base += sh.satellite_count;
  }

  // Ground links wherever the elevation mask is met.
  for (int g = 0; g < station_count(); ++g) {
    NodeId gid = satellite_count() + g;
    for (const Satellite& sat : satellites_) {
      double elev = elevation_deg(snap.positions[gid], snap.positions[sat.id]);
      if (elev >= min_elevation_deg_) {
        add_pair(gid, sat.id, LinkKind::kUplink, LinkKind::kDownlink);
      }
    }
  }

  std::sort(snap.links.begin(), snap.links.end(), [](const Link& l, const Link& r) {
    return std::make_pair(l.a, l.b) < std::make_pair(r.a, r.b);
  });
  return snap;
}

std::vector<ShellConfig> lightspeed_shells() {
  ShellConfig polar;
  polar.satellite_count = 78;
  polar.altitude_km = 1015.0;
  polar.inclination_deg = 99.5;
  polar.plane_count = 6;
  polar.phasing = 1;
  polar.interplane_lat_limit_deg = 75.0;

  ShellConfig inclined;
  inclined.satellite_count = 120;
  inclined.altitude_km = 1325.0;
  inclined.inclination_deg = 50.88;
  inclined.plane_count = 10;
  inclined.phasing = 1;
  inclined.interplane_lat_limit_deg = 75.0;

  return {polar, inclined};
}

std::vector<GroundStation> default_stations() {
  return {
      {"ottawa", 45.42, -75.70},    {"vancouver", 49.28, -123.12},
      {"stjohns", 47.56, -52.71},   {"toronto", 43.65, -79.38},
      {"winnipeg", 49.90, -97.14},  {"calgary", 51.05, -114.07},
      {"london", 51.51, -0.13},     {"frankfurt", 50.11, 8.68},
      {"tokyo", 35.68, 139.69},     {"sydney", -33.87, 151.21},
  };
}

}  // namespace flexsat
