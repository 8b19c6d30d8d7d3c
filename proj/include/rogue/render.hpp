#pragma once

// Amplitude matrix -> RGB image through a piecewise-linear colormap and a
// fixed normalization range, nearest-neighbour resampled via a CoordMap.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rogue/coords.hpp"
#include "rogue/nlse.hpp"

namespace rogue::render {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct ColorStop {
  double value = 0.0;  // in [0, 1]
  std::array<double, 3> rgb{};  // components in [0, 1]
};

struct Colormap {
  std::string name;
  std::vector<ColorStop> stops;

  // Stops strictly increasing from 0 to 1.
  void validate() const;
  // v is clamped to [0, 1].
  Rgb at(double v) const;

  // navy, blue, cyan, yellow, red at 0, 0.25, 0.5, 0.75, 1
  static Colormap ramp();
  static Colormap grayscale();
  // "ramp" or "gray"
  static Colormap by_name(const std::string& name);
};

struct Range {
  double lo = 0.0;
  double hi = 3.2;
  void validate() const;
  double normalize(double a) const { return (a - lo) / (hi - lo); }
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Rgb pixel(int x, int y) const;
  void set(int x, int y, Rgb c);
};

// Pixel (px, py) shows the cell nearest to map_spec.to_matrix(px, py).
Image render(const nlse::AmplitudeMatrix& m, const Colormap& cmap, const CoordMap& map_spec,
             const Range& range = {});

// Generic rows x cols grid (NaN cells are drawn black).
Image render_values(std::span<const double> values, std::size_t rows, std::size_t cols,
                    const Colormap& cmap, const CoordMap& map_spec, const Range& range);

// 8-bit RGB, no timestamps or text chunks.
void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

}  // namespace rogue::render
