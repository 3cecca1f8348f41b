#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "flexsat/constellation.hpp"

using namespace flexsat;

namespace {

ShellConfig small_shell(int sats, int planes, double alt_km = 1000.0,
                        double incl_deg = 90.0) {
  ShellConfig sh;
  sh.satellite_count = sats;
  sh.plane_count = planes;
  sh.altitude_km = alt_km;
  sh.inclination_deg = incl_deg;
  return sh;
}

}  // namespace

TEST_CASE("propagation delay") {
  CHECK(propagation_delay_ms(0.0) == doctest::Approx(0.0));
  // c covers 2997.92458 km in exactly 10 ms.
  CHECK(propagation_delay_ms(2997.92458) == doctest::Approx(10.0));
  CHECK(propagation_delay_ms(299.792458) == doctest::Approx(1.0));
  CHECK_THROWS_AS(propagation_delay_ms(-1.0), std::domain_error);
}

TEST_CASE("two-shell Lightspeed layout has 198 satellites and 10 ground nodes") {
  Constellation c = Constellation::build(lightspeed_shells(), default_stations());
  CHECK(c.satellite_count() == 198);
  CHECK(c.station_count() == 10);
  CHECK(c.node_count() == 208);
  CHECK(c.station_id("ottawa") >= 198);
  CHECK(c.station_id("vancouver") >= 198);
  CHECK(c.station_id("nowhere") == -1);
}

TEST_CASE("even spacing in a 2x2 shell") {
  Constellation c = Constellation::build({small_shell(4, 2)}, {{"gs", 0.0, 0.0}});
  REQUIRE(c.satellite_count() == 4);
  CHECK(c.satellite(0).plane == 0);
  CHECK(c.satellite(1).plane == 0);
  CHECK(c.satellite(2).plane == 1);
  CHECK(c.satellite(3).plane == 1);
  CHECK(c.satellite(1).slot_in_plane == 1);

  // Two slots per plane: in-plane neighbors sit 180 degrees apart, i.e.
  // antipodal at equal radius.
  TopologySnapshot snap = c.propagate(0, 1.0);
  Vec3 p0 = snap.positions[0];
  Vec3 p1 = snap.positions[1];
  CHECK((p0 + p1).norm() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("polar orbit sweeps to both poles over a period") {
  ShellConfig sh = small_shell(2, 1, 1015.0, 90.0);
  Constellation c = Constellation::build({sh}, {{"gs", 0.0, 0.0}});
  double r = kEarthRadiusKm + 1015.0;
  double period_s = 2.0 * kPi * std::sqrt(r * r * r / kMuEarthKm3PerS2);
  double max_lat = -90.0, min_lat = 90.0;
  int steps = 400;
  for (int i = 0; i < steps; ++i) {
    TopologySnapshot snap = c.propagate(i, period_s / steps);
    double lat = latitude_deg(snap.positions[0]);
    max_lat = std::max(max_lat, lat);
    min_lat = std::min(min_lat, lat);
  }
  CHECK(max_lat > 89.0);
  CHECK(min_lat < -89.0);
}

TEST_CASE("propagate is deterministic") {
  Constellation c = Constellation::build(lightspeed_shells(), default_stations());
  TopologySnapshot a = c.propagate(7, 10.0);
  TopologySnapshot b = c.propagate(7, 10.0);
  REQUIRE(a.positions.size() == b.positions.size());
  for (size_t i = 0; i < a.positions.size(); ++i) {
    CHECK(a.positions[i].x == b.positions[i].x);
    CHECK(a.positions[i].y == b.positions[i].y);
    CHECK(a.positions[i].z == b.positions[i].z);
  }
  REQUIRE(a.links.size() == b.links.size());
  for (size_t i = 0; i < a.links.size(); ++i) {
    CHECK(a.links[i].a == b.links[i].a);
    CHECK(a.links[i].b == b.links[i].b);
    CHECK(a.links[i].distance_km == b.links[i].distance_km);
  }
}

TEST_CASE("single-plane ring gives exactly 2 ISLs each") {
  Constellation c = Constellation::build({small_shell(4, 1)}, {{"gs", 0.0, 0.0}});
  TopologySnapshot snap = c.propagate(0, 1.0);
  for (NodeId s = 0; s < 4; ++s) CHECK(snap.isl_degree(s) == 2);
  // Ring closes: 0-1, 1-2, 2-3, 3-0.
  CHECK(snap.has_link(0, 1));
  CHECK(snap.has_link(1, 2));
  CHECK(snap.has_link(2, 3));
  CHECK(snap.has_link(3, 0));
  CHECK_FALSE(snap.has_link(0, 2));
}

TEST_CASE("intra-plane ISL distance matches the chord formula") {
  // 13 sats per plane at 1015 km: chord = 2 (R+h) sin(pi/13).
  ShellConfig sh = small_shell(13, 1, 1015.0, 99.5);
  Constellation c = Constellation::build({sh}, {{"gs", 0.0, 0.0}});
  TopologySnapshot snap = c.propagate(0, 1.0);
  double chord = 2.0 * (kEarthRadiusKm + 1015.0) * std::sin(kPi / 13.0);
  const Link* l = snap.find_link(0, 1);
  REQUIRE(l != nullptr);
  CHECK(l->distance_km == doctest::Approx(chord).epsilon(1e-9));
  CHECK(l->delay_ms == doctest::Approx(chord / kLightSpeedKmPerS * 1000.0));
}

TEST_CASE("Lightspeed snapshots: degree bound, symmetry, altitude") {
  Constellation c = Constellation::build(lightspeed_shells(), default_stations());
  int max_degree = 0;
  for (int slot = 0; slot < 500; ++slot) {
    TopologySnapshot snap = c.propagate(slot, 10.0);

    for (NodeId s = 0; s < c.satellite_count(); ++s) {
      int d = snap.isl_degree(s);
      REQUIRE(d <= 4);
      max_degree = std::max(max_degree, d);
    }

    if (slot % 100 == 0) {
      // Symmetric pairs with equal delay.
      for (const Link& l : snap.links) {
        const Link* rev = snap.find_link(l.b, l.a);
        REQUIRE(rev != nullptr);
        REQUIRE(rev->delay_ms == l.delay_ms);
      }
      // Circular orbits hold their shell radius.
      for (NodeId s = 0; s < c.satellite_count(); ++s) {
        double alt = snap.positions[s].norm() - kEarthRadiusKm;
        const ShellConfig& sh = c.shells()[c.satellite(s).shell];
        REQUIRE(std::abs(alt - sh.altitude_km) < 1.0);
      }
    }
  }
  CHECK(max_degree == 4);
}

TEST_CASE("ground links follow the elevation mask") {
  Constellation c = Constellation::build(lightspeed_shells(), default_stations());
  TopologySnapshot snap = c.propagate(3, 10.0);
  int ground_links = 0;
  for (NodeId g = c.satellite_count(); g < c.node_count(); ++g) {
    for (NodeId s = 0; s < c.satellite_count(); ++s) {
      double elev = elevation_deg(snap.positions[g], snap.positions[s]);
      bool linked = snap.has_link(g, s);
      if (elev >= c.min_elevation_deg()) {
        REQUIRE(linked);
        ++ground_links;
      } else {
        REQUIRE_FALSE(linked);
      }
    }
  }
  CHECK(ground_links > 0);  // mask admits someone somewhere
}

TEST_CASE("interplane links stay below the latitude limit") {
  Constellation c = Constellation::build(lightspeed_shells(), default_stations());
  for (int slot : {0, 17, 250, 499}) {
    TopologySnapshot snap = c.propagate(slot, 10.0);
    for (const Link& l : snap.links) {
      if (l.kind != LinkKind::kInterPlane) continue;
      double limit =
          c.shells()[c.satellite(l.a).shell].interplane_lat_limit_deg;
      REQUIRE(std::abs(latitude_deg(snap.positions[l.a])) <= limit);
      REQUIRE(std::abs(latitude_deg(snap.positions[l.b])) <= limit);
    }
  }
}

TEST_CASE("build validation") {
  CHECK_THROWS_AS(Constellation::build({small_shell(5, 2)}, {{"gs", 0.0, 0.0}}),
                  std::invalid_argument);  // 5 not divisible by 2
  ShellConfig bad_alt = small_shell(4, 2);
  bad_alt.altitude_km = -10.0;
  CHECK_THROWS_AS(Constellation::build({bad_alt}, {{"gs", 0.0, 0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Constellation::build({small_shell(4, 2)}, {}),
                  std::invalid_argument);  // no stations
  CHECK_THROWS_AS(Constellation::build({small_shell(4, 2)}, {{"gs", 99.0, 0.0}}),
                  std::invalid_argument);  // bad latitude
}
