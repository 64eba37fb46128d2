#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mmshare/rng.hpp"

namespace mmshare {

// Square simulation region. With wraparound the region is a torus, which
// removes boundary effects from the interference statistics.
struct Region {
  double side_m = 1000.0;
  bool wraparound = true;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct PlacedNode {
  Point pos;
  int op = 1;  // operator id, 1..I
};

struct Deployment {
  std::vector<PlacedNode> bs;
  std::vector<PlacedNode> ue;
  Region region;
};

// Homogeneous PPP over the region: Poisson count with mean intensity*area,
// positions i.i.d. uniform. Intensity is per km^2.
inline std::vector<Point> sample_hppp(double intensity_per_km2, const Region& region, Rng& rng) {
  if (intensity_per_km2 < 0.0) throw std::invalid_argument("sample_hppp: negative intensity");
  if (region.side_m <= 0.0) throw std::invalid_argument("sample_hppp: nonpositive region side");
  const double area_km2 = (region.side_m / 1000.0) * (region.side_m / 1000.0);
  const std::uint64_t count = rng.poisson(intensity_per_km2 * area_km2);
  std::vector<Point> pts(count);
  for (auto& p : pts) {
    p.x = rng.uniform() * region.side_m;
    p.y = rng.uniform() * region.side_m;
  }
  return pts;
}

namespace detail {

// Displacement component a->b under the region metric; minimum image when
// the region wraps.
inline double axis_delta(double from, double to, const Region& region) {
  double d = to - from;
  if (region.wraparound) {
    const double s = region.side_m;
    d -= s * std::round(d / s);
  }
  return d;
}

}  // namespace detail

inline double distance(const Point& a, const Point& b, const Region& region) {
  const double dx = detail::axis_delta(a.x, b.x, region);
  const double dy = detail::axis_delta(a.y, b.y, region);
  return std::hypot(dx, dy);
}

// Azimuth of the ray from->to in degrees, (-180, 180], wraparound-consistent.
inline double azimuth_deg(const Point& from, const Point& to, const Region& region) {
  const double dx = detail::axis_delta(from.x, to.x, region);
  const double dy = detail::axis_delta(from.y, to.y, region);
  return std::atan2(dy, dx) * 57.29577951308232;
}

// Fold an angle difference into [0, 180].
inline double fold_angle_deg(double deg) {
  double a = std::fmod(std::fabs(deg), 360.0);
  return a > 180.0 ? 360.0 - a : a;
}

// Angular offset at `source` between the boresight ray (toward
// `boresight_target`) and the ray toward `other`. Result in [0, 180].
inline double angle_from_boresight(const Point& source, const Point& boresight_target,
                                   const Point& other, const Region& region) {
  if (source.x == boresight_target.x && source.y == boresight_target.y)
    throw std::invalid_argument("angle_from_boresight: coincident source and boresight target");
  const double a = azimuth_deg(source, boresight_target, region);
  const double b = azimuth_deg(source, other, region);
  return fold_angle_deg(a - b);
}

}  // namespace mmshare
