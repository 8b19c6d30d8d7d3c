#include "rogue/coords.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rogue/errors.hpp"

namespace rogue {

PixelPoint CoordMap::to_pixel(double i, double j) const {
  PixelPoint p;
  p.px = offset_x + scale_x * j;
  const double row = offset_y + scale_y * i;
  p.py = time_up ? static_cast<double>(image_h - 1) - row : row;
  return p;
}

MatrixPoint CoordMap::to_matrix(double px, double py) const {
  MatrixPoint m;
  m.j = (px - offset_x) / scale_x;
  const double row = time_up ? static_cast<double>(image_h - 1) - py : py;
  m.i = (row - offset_y) / scale_y;
  return m;
}

CoordMap CoordMap::fit(std::size_t nt, std::size_t nx, int width, int height, bool time_up) {
  if (nt == 0 || nx == 0) throw ValidationError("cannot fit a coordinate map to an empty matrix");
  if (width < 1 || height < 1) throw ValidationError("image dimensions must be positive");
  if ((nx > 1 && width < 2) || (nt > 1 && height < 2)) {
    throw ValidationError("an image axis needs at least 2 pixels to show more than one cell");
  }
  CoordMap m;
  m.image_w = width;
  m.image_h = height;
  m.time_up = time_up;
  if (nx > 1) {
    m.scale_x = static_cast<double>(width - 1) / static_cast<double>(nx - 1);
  } else {
    m.offset_x = 0.5 * static_cast<double>(width - 1);
  }
  if (nt > 1) {
    m.scale_y = static_cast<double>(height - 1) / static_cast<double>(nt - 1);
  } else {
    m.offset_y = 0.5 * static_cast<double>(height - 1);
  }
  return m;
}

CoordMap CoordMap::identity(int width, int height) {
  CoordMap m;
  m.image_w = width;
  m.image_h = height;
  return m;
}

void CoordMap::validate(std::size_t nt, std::size_t nx) const {
  if (!(scale_x > 0.0) || !(scale_y > 0.0)) throw ValidationError("coordinate map scales must be > 0");
  if (image_w < 1 || image_h < 1) throw ValidationError("image dimensions must be positive");
  if (nt == 0 || nx == 0) throw ValidationError("empty matrix");
  const double last_i = static_cast<double>(nt - 1);
  const double last_j = static_cast<double>(nx - 1);
  for (double i : {0.0, last_i}) {
    for (double j : {0.0, last_j}) {
      const auto p = to_pixel(i, j);
      // Rounding in scale * (n - 1) may land a hair outside pixel 0.
      constexpr double kSlack = 1e-9;
      if (p.px < -kSlack || p.px >= image_w || p.py < -kSlack || p.py >= image_h) {
        throw ValidationError("coordinate map sends matrix " + std::to_string(nt) + "x" +
                              std::to_string(nx) + " outside the " + std::to_string(image_w) +
                              "x" + std::to_string(image_h) + " image");
      }
    }
  }
}

BoundingBox BoundingBox::from_corners(double x_min, double y_min, double x_max, double y_max) {
  BoundingBox b;
  b.cx = 0.5 * (x_min + x_max);
  b.cy = 0.5 * (y_min + y_max);
  b.w = x_max - x_min;
  b.h = y_max - y_min;
  return b;
}

PhysRect to_physical(const BoundingBox& box, const CoordMap& map, const Axes& axes) {
  const auto a = map.to_matrix(box.x_min(), box.y_min());
  const auto b = map.to_matrix(box.x_max(), box.y_max());
  PhysRect r;
  r.x_min = std::min(axes.x(a.j), axes.x(b.j));
  r.x_max = std::max(axes.x(a.j), axes.x(b.j));
  r.t_min = std::min(axes.t(a.i), axes.t(b.i));
  r.t_max = std::max(axes.t(a.i), axes.t(b.i));
  return r;
}

}  // namespace rogue
