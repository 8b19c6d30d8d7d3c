#include "rogue/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "rogue/errors.hpp"

namespace rogue::render {
namespace {

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::size_t nearest(double v, std::size_t n) {
  const double r = std::round(v);
  if (r <= 0.0) return 0;
  if (r >= static_cast<double>(n - 1)) return n - 1;
  return static_cast<std::size_t>(r);
}

}  // namespace

void Colormap::validate() const {
  if (stops.size() < 2) throw ValidationError("colormap needs at least two stops");
  if (stops.front().value != 0.0 || stops.back().value != 1.0) {
    throw ValidationError("colormap stops must start at 0 and end at 1");
  }
  for (std::size_t k = 1; k < stops.size(); ++k) {
    if (!(stops[k].value > stops[k - 1].value)) {
      throw ValidationError("colormap stop values must be strictly increasing");
    }
  }
}

Rgb Colormap::at(double v) const {
  if (std::isnan(v)) return {};
  v = std::clamp(v, 0.0, 1.0);
  std::size_t k = 1;
  while (k + 1 < stops.size() && v > stops[k].value) ++k;
  const auto& a = stops[k - 1];
  const auto& b = stops[k];
  const double w = (v - a.value) / (b.value - a.value);
  return {to_byte(a.rgb[0] + w * (b.rgb[0] - a.rgb[0])),
          to_byte(a.rgb[1] + w * (b.rgb[1] - a.rgb[1])),
          to_byte(a.rgb[2] + w * (b.rgb[2] - a.rgb[2]))};
}

Colormap Colormap::ramp() {
  return {"ramp",
          {{0.0, {0.0, 0.0, 0.5}},
           {0.25, {0.0, 0.0, 1.0}},
           {0.5, {0.0, 1.0, 1.0}},
           {0.75, {1.0, 1.0, 0.0}},
           {1.0, {1.0, 0.0, 0.0}}}};
}

Colormap Colormap::grayscale() {
  return {"gray", {{0.0, {0.0, 0.0, 0.0}}, {1.0, {1.0, 1.0, 1.0}}}};
}

Colormap Colormap::by_name(const std::string& name) {
  if (name == "ramp") return ramp();
  if (name == "gray" || name == "grayscale") return grayscale();
  throw ValidationError("unknown colormap '" + name + "' (expected ramp or gray)");
}

void Range::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ValidationError("render range needs a_lo < a_hi");
  }
}

Rgb Image::pixel(int x, int y) const {
  const std::size_t k = 3 * (static_cast<std::size_t>(y) * width + x);
  return {rgb[k], rgb[k + 1], rgb[k + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t k = 3 * (static_cast<std::size_t>(y) * width + x);
  rgb[k] = c.r;
  rgb[k + 1] = c.g;
  rgb[k + 2] = c.b;
}

Image render_values(std::span<const double> values, std::size_t rows, std::size_t cols,
                    const Colormap& cmap, const CoordMap& map_spec, const Range& range) {
  range.validate();
  cmap.validate();
  if (values.size() != rows * cols) throw ValidationError("render: value count does not match shape");
  map_spec.validate(rows, cols);
  Image img;
  img.width = map_spec.image_w;
  img.height = map_spec.image_h;
  img.rgb.assign(3 * static_cast<std::size_t>(img.width) * img.height, 0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const auto mp = map_spec.to_matrix(x, y);
      const std::size_t i = nearest(mp.i, rows);
      const std::size_t j = nearest(mp.j, cols);
      img.set(x, y, cmap.at(range.normalize(values[i * cols + j])));
    }
  }
  return img;
}

Image render(const nlse::AmplitudeMatrix& m, const Colormap& cmap, const CoordMap& map_spec,
             const Range& range) {
  m.validate();
  return render_values(m.a, m.nt, m.nx, cmap, map_spec, range);
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.width < 1 || img.height < 1 ||
      img.rgb.size() != 3 * static_cast<std::size_t>(img.width) * img.height) {
    throw ValidationError("write_png: malformed image buffer");
  }
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng error while writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, img.rgb.data() + 3 * static_cast<std::size_t>(y) * img.width);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw FormatError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng error while reading " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_expand(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);
  Image img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.rgb.resize(3 * static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, img.rgb.data() + 3 * static_cast<std::size_t>(y) * img.width, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace rogue::render
