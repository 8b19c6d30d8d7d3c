#pragma once

// Annotated rogue-wave image datasets: per (eps, mu) simulate, render, run
// Peak Search, and write image + annotation + field; split whole images into
// train/val/test with a seeded shuffle.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rogue/coords.hpp"
#include "rogue/detect_eval.hpp"
#include "rogue/nlse.hpp"
#include "rogue/peak_search.hpp"
#include "rogue/pipeline.hpp"
#include "rogue/render.hpp"

namespace rogue::dataset {

// start, start + step, ... up to stop inclusive (1e-9 relative slack).
struct ParamRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
  std::vector<double> values() const;
  void validate(const char* what) const;
};

// "start:stop:step", "a,b,c" or a single value.
std::vector<double> parse_values(const std::string& text, const char* what);

struct Sweep {
  std::vector<double> eps;
  std::vector<double> mu;
  // eps-major order
  std::vector<nlse::GaussParams> items() const;
  void validate() const;
};

enum class Split { Train, Val, Test };
const char* split_name(Split s);

// Deterministic across platforms: mt19937_64 with rejection-sampled indices
// drives a Fisher-Yates shuffle; the first floor(0.6 n) shuffled positions are
// train, the next floor(0.2 n) val, the rest test.
std::vector<Split> assign_splits(std::size_t n, std::uint64_t seed);

struct GridMeta {
  double x0 = 0.0, dx = 0.0, t0 = 0.0, dt_record = 0.0;
  std::size_t nt = 0, nx = 0;
};

struct Annotation {
  std::string image_file;
  int width = 0;
  int height = 0;
  std::optional<nlse::GaussParams> params;
  GridMeta grid;
  CoordMap map;
  std::vector<BoundingBox> boxes;
  std::optional<double> gt_time;
};

Annotation make_annotation(const std::string& image_file, const nlse::AmplitudeMatrix& m,
                           const CoordMap& map_spec, const std::vector<BoundingBox>& boxes);
nlohmann::json annotation_json(const Annotation& a);
Annotation parse_annotation(const nlohmann::json& j);

nlohmann::json coordmap_json(const CoordMap& m);
CoordMap parse_coordmap(const nlohmann::json& j);

// Peaks rebuilt from the physical centers stored with each box.
std::vector<peaks::Peak> peaks_from_annotation(const Annotation& a);
Axes axes_of(const Annotation& a);
double t_end_of(const Annotation& a);

// Corner-format listing for detection evaluation.
eval::ImageBoxes to_corners(const Annotation& a, const std::string& image_id);

struct Options {
  pipeline::Settings settings;  // settings.grid.t_max is the rendered time span
  render::Colormap cmap = render::Colormap::ramp();
  render::Range range;
  bool write_fields = true;
  int jobs = 1;
  std::uint64_t seed = 0;
};

struct Item {
  std::string id;
  nlse::GaussParams params;
  std::optional<Split> split;
  std::string image, annotation, field;  // relative to the output directory
  std::size_t n_boxes = 0;
  std::optional<double> gt_time;
  std::string error;  // non-empty for failed items
};

struct Manifest {
  std::uint64_t seed = 0;
  Sweep sweep;
  nlohmann::json settings;
  std::vector<Item> items;  // successful items, sweep order
  std::vector<Item> failures;
};

// Writes images/, annotations/, fields/, truth_corners.json and manifest.json
// under out_dir.  Item failures are recorded, not thrown.
Manifest make_dataset(const Sweep& sweep, const Options& opt, const std::filesystem::path& out_dir);

nlohmann::json manifest_json(const Manifest& m);
Manifest parse_manifest(const nlohmann::json& j);

nlohmann::json settings_json(const pipeline::Settings& s);

}  // namespace rogue::dataset
