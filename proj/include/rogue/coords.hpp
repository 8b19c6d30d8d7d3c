#pragma once

// Matrix <-> image pixel <-> physical (x, t) coordinates, and axis-aligned boxes.

#include <cstddef>

namespace rogue {

struct PixelPoint {
  double px = 0.0;  // column, grows with x
  double py = 0.0;  // row
};

struct MatrixPoint {
  double i = 0.0;  // time index
  double j = 0.0;  // space index
};

// Affine matrix -> pixel map.  px = offset_x + scale_x * j; the time axis is
// py = offset_y + scale_y * i, mirrored to (image_h - 1) - py when time_up.
struct CoordMap {
  double scale_x = 1.0;
  double scale_y = 1.0;
  double offset_x = 0.0;
  double offset_y = 0.0;
  int image_w = 1;
  int image_h = 1;
  bool time_up = false;

  PixelPoint to_pixel(double i, double j) const;
  MatrixPoint to_matrix(double px, double py) const;

  // Corner-aligned fit: cell (0, 0) and (nt-1, nx-1) land on the first and last pixel centers.
  static CoordMap fit(std::size_t nt, std::size_t nx, int width, int height, bool time_up = true);
  static CoordMap identity(int width, int height);

  // Throws ValidationError unless every index of an nt x nx matrix maps inside the image.
  void validate(std::size_t nt, std::size_t nx) const;
};

// Physical axes of a recorded matrix.
struct Axes {
  double t0 = 0.0;
  double dt = 1.0;
  double x0 = 0.0;
  double dx = 1.0;

  double t(double i) const { return t0 + i * dt; }
  double x(double j) const { return x0 + j * dx; }
};

// Axis-aligned rectangle in physical (x, t) coordinates.
struct PhysRect {
  double x_min = 0.0;
  double x_max = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;

  double area() const { return (x_max - x_min) * (t_max - t_min); }
};

// Box in continuous pixel coordinates plus the physical point it was built around.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double t = 0.0;
  double x = 0.0;
  double amplitude = 0.0;

  double x_min() const { return cx - 0.5 * w; }
  double x_max() const { return cx + 0.5 * w; }
  double y_min() const { return cy - 0.5 * h; }
  double y_max() const { return cy + 0.5 * h; }
  double area() const { return w * h; }

  static BoundingBox from_corners(double x_min, double y_min, double x_max, double y_max);
};

// Box extent mapped back through the CoordMap into physical coordinates.
PhysRect to_physical(const BoundingBox& box, const CoordMap& map, const Axes& axes);

}  // namespace rogue
