#pragma once

#include <cmath>

namespace flexsat {

// Physical constants used throughout. Spherical Earth, circular orbits.
constexpr double kEarthRadiusKm = 6371.0;
constexpr double kLightSpeedKmPerS = 299792.458;
constexpr double kMuEarthKm3PerS2 = 398600.4418;
constexpr double kEarthRotationRadPerS = 7.2921159e-5;
constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Geocentric latitude in degrees for a position in km.
inline double latitude_deg(const Vec3& p) {
  double r = p.norm();
  if (r == 0.0) return 0.0;
  return rad2deg(std::asin(p.z / r));
}

// Elevation angle of a satellite seen from a ground position, degrees.
// Both positions in the same Earth-fixed frame.
inline double elevation_deg(const Vec3& ground, const Vec3& sat) {
  Vec3 d = sat - ground;
  double dn = d.norm();
  double gn = ground.norm();
  if (dn == 0.0 || gn == 0.0) return 90.0;
  double s = d.dot(ground) / (dn * gn);
  if (s > 1.0) s = 1.0;
  if (s < -1.0) s = -1.0;
  return rad2deg(std::asin(s));
}

}  // namespace flexsat
