#pragma once

#include <vector>

namespace rogue::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

using Polygon = std::vector<Vec2>;

// Shoelace area; positive for counter-clockwise vertex order.
double signed_area(const Polygon& poly);
inline double area(const Polygon& poly) {
  const double a = signed_area(poly);
  return a < 0.0 ? -a : a;
}

// Sutherland-Hodgman: clips subject against each edge of a convex polygon.
// The clip polygon may be given in either orientation.
Polygon clip_convex(const Polygon& subject, const Polygon& convex_clip);

double intersection_area(const Polygon& a, const Polygon& convex_b);

Polygon rectangle(double x_min, double y_min, double x_max, double y_max);

}  // namespace rogue::geom
