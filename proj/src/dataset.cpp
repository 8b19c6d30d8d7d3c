#include "rogue/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "rogue/errors.hpp"
#include "rogue/field_io.hpp"
#include "rogue/parallel.hpp"

namespace fs = std::filesystem;

namespace rogue::dataset {
namespace {

double parse_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw ValidationError(std::string("cannot parse ") + what + " value '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// Uniform integer in [0, bound) without std::uniform_int_distribution, whose
// output differs between standard libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

std::string item_id(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rw_%05zu", k);
  return buf;
}

const nlohmann::json& need(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double num(const nlohmann::json& j, const char* key) {
  const auto& v = need(j, key);
  if (!v.is_number()) throw FormatError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

nlohmann::json opt_num(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

Split split_from(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw FormatError("unknown split tag '" + s + "'");
}

}  // namespace

std::vector<double> ParamRange::values() const {
  validate("range");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = start + static_cast<double>(k) * step;
  return out;
}

void ParamRange::validate(const char* what) const {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
    throw ValidationError(std::string(what) + " range must be finite");
  }
  if (!(step > 0.0)) throw ValidationError(std::string(what) + " range step must be > 0");
  if (stop < start) throw ValidationError(std::string(what) + " range is empty (stop < start)");
}

std::vector<double> parse_values(const std::string& text, const char* what) {
  if (text.empty()) throw ValidationError(std::string(what) + " values are empty");
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ValidationError(std::string(what) + " range must be start:stop:step");
    ParamRange r{parse_double(parts[0], what), parse_double(parts[1], what), parse_double(parts[2], what)};
    r.validate(what);
    return r.values();
  }
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_double(p, what));
  return out;
}

std::vector<nlse::GaussParams> Sweep::items() const {
  validate();
  std::vector<nlse::GaussParams> out;
  for (double e : eps) {
    for (double m : mu) out.push_back({e, m});
  }
  return out;
}

void Sweep::validate() const {
  if (eps.empty() || mu.empty()) throw ValidationError("sweep ranges must be non-empty");
  for (double e : eps) nlse::GaussParams{e, 1.0}.validate();
  for (double m : mu) nlse::GaussParams{1.0, m}.validate();
}

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

std::vector<Split> assign_splits(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i-- > 1;) {
    std::swap(order[i], order[uniform_below(rng, i + 1)]);
  }
  const std::size_t n_train = n * 6 / 10;
  const std::size_t n_val = n * 2 / 10;
  std::vector<Split> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[order[k]] = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
  }
  return out;
}

Annotation make_annotation(const std::string& image_file, const nlse::AmplitudeMatrix& m,
                           const CoordMap& map_spec, const std::vector<BoundingBox>& boxes) {
  Annotation a;
  a.image_file = image_file;
  a.width = map_spec.image_w;
  a.height = map_spec.image_h;
  a.params = m.params;
  a.grid = {m.x0, m.dx, m.t0, m.dt_record, m.nt, m.nx};
  a.map = map_spec;
  a.boxes = boxes;
  for (const auto& b : boxes) a.gt_time = a.gt_time ? std::min(*a.gt_time, b.t) : b.t;
  return a;
}

nlohmann::json coordmap_json(const CoordMap& m) {
  return {{"scale_x", m.scale_x},   {"scale_y", m.scale_y}, {"offset_x", m.offset_x},
          {"offset_y", m.offset_y}, {"image_w", m.image_w}, {"image_h", m.image_h},
          {"time_up", m.time_up}};
}

CoordMap parse_coordmap(const nlohmann::json& j) {
  CoordMap m;
  m.scale_x = num(j, "scale_x");
  m.scale_y = num(j, "scale_y");
  m.offset_x = num(j, "offset_x");
  m.offset_y = num(j, "offset_y");
  m.image_w = static_cast<int>(num(j, "image_w"));
  m.image_h = static_cast<int>(num(j, "image_h"));
  const auto& up = need(j, "time_up");
  if (!up.is_boolean()) throw FormatError("field 'time_up' must be a boolean");
  m.time_up = up.get<bool>();
  return m;
}

nlohmann::json annotation_json(const Annotation& a) {
  nlohmann::json j;
  j["image"] = {{"file", a.image_file}, {"width", a.width}, {"height", a.height}};
  j["params"] = a.params ? nlohmann::json{{"eps", a.params->eps}, {"mu", a.params->mu}}
                         : nlohmann::json(nullptr);
  j["grid"] = {{"x0", a.grid.x0}, {"dx", a.grid.dx},         {"t0", a.grid.t0},
               {"dt_record", a.grid.dt_record}, {"nt", a.grid.nt}, {"nx", a.grid.nx}};
  j["coordmap"] = coordmap_json(a.map);
  auto boxes = nlohmann::json::array();
  for (const auto& b : a.boxes) {
    boxes.push_back({{"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h},
                     {"t", b.t},   {"x", b.x},   {"amplitude", b.amplitude}});
  }
  j["boxes"] = boxes;
  j["gt_time"] = opt_num(a.gt_time);
  return j;
}

Annotation parse_annotation(const nlohmann::json& j) {
  Annotation a;
  const auto& img = need(j, "image");
  const auto& file = need(img, "file");
  if (!file.is_string()) throw FormatError("image.file must be a string");
  a.image_file = file.get<std::string>();
  a.width = static_cast<int>(num(img, "width"));
  a.height = static_cast<int>(num(img, "height"));
  if (j.contains("params") && !j.at("params").is_null()) {
    a.params = nlse::GaussParams{num(j.at("params"), "eps"), num(j.at("params"), "mu")};
  }
  const auto& g = need(j, "grid");
  a.grid = {num(g, "x0"), num(g, "dx"), num(g, "t0"), num(g, "dt_record"),
            static_cast<std::size_t>(num(g, "nt")), static_cast<std::size_t>(num(g, "nx"))};
  a.map = parse_coordmap(need(j, "coordmap"));
  const auto& boxes = need(j, "boxes");
  if (!boxes.is_array()) throw FormatError("'boxes' must be a list");
  for (const auto& b : boxes) {
    BoundingBox box;
    box.cx = num(b, "cx");
    box.cy = num(b, "cy");
    box.w = num(b, "w");
    box.h = num(b, "h");
    box.t = num(b, "t");
    box.x = num(b, "x");
    box.amplitude = num(b, "amplitude");
    if (!(box.w > 0.0 && box.h > 0.0)) throw FormatError("box extents must be > 0");
    a.boxes.push_back(box);
  }
  if (j.contains("gt_time") && !j.at("gt_time").is_null()) a.gt_time = num(j, "gt_time");
  return a;
}

Axes axes_of(const Annotation& a) {
  return Axes{a.grid.t0, a.grid.dt_record, a.grid.x0, a.grid.dx};
}

double t_end_of(const Annotation& a) {
  return a.grid.nt == 0 ? a.grid.t0 : a.grid.t0 + static_cast<double>(a.grid.nt - 1) * a.grid.dt_record;
}

std::vector<peaks::Peak> peaks_from_annotation(const Annotation& a) {
  std::vector<peaks::Peak> out;
  for (const auto& b : a.boxes) {
    peaks::Peak p;
    const double fi = a.grid.dt_record > 0.0 ? (b.t - a.grid.t0) / a.grid.dt_record : 0.0;
    const double fj = a.grid.dx > 0.0 ? (b.x - a.grid.x0) / a.grid.dx : 0.0;
    p.i = static_cast<std::size_t>(std::max(0.0, std::round(fi)));
    p.j = static_cast<std::size_t>(std::max(0.0, std::round(fj)));
    p.t = b.t;
    p.x = b.x;
    p.amplitude = b.amplitude;
    out.push_back(p);
  }
  return out;
}

eval::ImageBoxes to_corners(const Annotation& a, const std::string& image_id) {
  eval::ImageBoxes out;
  out.image_id = image_id;
  out.boxes = a.boxes;
  return out;
}

nlohmann::json settings_json(const pipeline::Settings& s) {
  nlohmann::json j;
  j["grid"] = {{"t_max", s.grid.t_max},
               {"length", s.grid.length ? nlohmann::json(*s.grid.length) : nlohmann::json(nullptr)},
               {"nx", s.grid.nx ? nlohmann::json(*s.grid.nx) : nlohmann::json(nullptr)},
               {"dt", s.grid.dt},
               {"dt_record", s.grid.dt_record}};
  j["solver"] = {{"scheme", "if-rk4"}, {"dealias", s.solver.dealias}};
  j["peak_search"] = {{"eta", s.peak.eta},
                      {"level", s.peak.level},
                      {"radius", s.peak.radius},
                      {"box_px", s.peak.box_px},
                      {"metric", s.peak.metric == peaks::Metric::Chebyshev ? "chebyshev" : "euclidean"}};
  j["theta"] = {{"method", s.theta.method == metrics::ThetaMethod::BoundaryFit ? "boundary" : "hull"},
                {"bin_width", s.theta.bin_width}};
  j["image"] = {{"width", s.image_w}, {"height", s.image_h}, {"time_up", s.time_up}};
  return j;
}

Manifest make_dataset(const Sweep& sweep, const Options& opt, const fs::path& out_dir) {
  const auto params = sweep.items();
  opt.range.validate();
  opt.cmap.validate();
  opt.settings.peak.validate();
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "annotations");
  if (opt.write_fields) fs::create_directories(out_dir / "fields");

  std::vector<Item> results(params.size());
  std::vector<Annotation> annotations(params.size());
  parallel_for(params.size(), opt.jobs, [&](std::size_t k) {
    Item& it = results[k];
    it.id = item_id(k);
    it.params = params[k];
    try {
      const auto det = pipeline::simulate_and_detect(params[k], opt.settings);
      const auto& m = det.run.amplitude;
      it.image = "images/" + it.id + ".png";
      it.annotation = "annotations/" + it.id + ".json";
      render::write_png(out_dir / it.image, render::render(m, opt.cmap, det.map, opt.range));
      if (opt.write_fields) {
        it.field = "fields/" + it.id + ".rwf";
        io::write_rwf1(out_dir / it.field, m);
        nlse::RecordOptions rec;
        rec.record_every = nlse::record_every_for(det.grid, opt.settings.grid.dt_record);
        rec.solver = opt.settings.solver;
        io::write_json(io::sidecar_path(out_dir / it.field),
                       io::run_sidecar(m, io::PayloadKind::Amplitude, det.grid, rec, det.run.diagnostics));
      }
      annotations[k] = make_annotation(fs::path(it.image).filename().string(), m, det.map, det.found.boxes);
      io::write_json(out_dir / it.annotation, annotation_json(annotations[k]));
      it.n_boxes = det.found.boxes.size();
      it.gt_time = annotations[k].gt_time;
    } catch (const std::exception& e) {
      it.error = e.what();
      if (it.error.empty()) it.error = "unknown failure";
    }
  });

  Manifest man;
  man.seed = opt.seed;
  man.sweep = sweep;
  man.settings = settings_json(opt.settings);
  std::vector<std::size_t> ok;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (results[k].error.empty()) {
      ok.push_back(k);
    } else {
      man.failures.push_back(results[k]);
    }
  }
  const auto splits = assign_splits(ok.size(), opt.seed);
  std::vector<eval::ImageBoxes> truth;
  for (std::size_t n = 0; n < ok.size(); ++n) {
    Item it = results[ok[n]];
    it.split = splits[n];
    truth.push_back(to_corners(annotations[ok[n]], it.id));
    man.items.push_back(std::move(it));
  }
  io::write_json(out_dir / "truth_corners.json", eval::box_file_json(truth));
  io::write_json(out_dir / "manifest.json", manifest_json(man));
  return man;
}

nlohmann::json manifest_json(const Manifest& m) {
  nlohmann::json j;
  j["format"] = "rw-dataset-manifest";
  j["version"] = 1;
  j["seed"] = m.seed;
  j["sweep"] = {{"eps", m.sweep.eps}, {"mu", m.sweep.mu}};
  j["settings"] = m.settings;
  std::size_t counts[3] = {0, 0, 0};
  auto items = nlohmann::json::array();
  for (const auto& it : m.items) {
    if (it.split) ++counts[static_cast<int>(*it.split)];
    items.push_back({{"id", it.id},
                     {"eps", it.params.eps},
                     {"mu", it.params.mu},
                     {"split", it.split ? nlohmann::json(split_name(*it.split)) : nlohmann::json(nullptr)},
                     {"image", it.image},
                     {"annotation", it.annotation},
                     {"field", it.field.empty() ? nlohmann::json(nullptr) : nlohmann::json(it.field)},
                     {"n_boxes", it.n_boxes},
                     {"gt_time", opt_num(it.gt_time)}});
  }
  auto failures = nlohmann::json::array();
  for (const auto& f : m.failures) {
    failures.push_back({{"id", f.id}, {"eps", f.params.eps}, {"mu", f.params.mu}, {"error", f.error}});
  }
  j["counts"] = {{"items", m.items.size()},
                 {"train", counts[0]},
                 {"val", counts[1]},
                 {"test", counts[2]},
                 {"failed", m.failures.size()}};
  j["items"] = items;
  j["failures"] = failures;
  return j;
}

Manifest parse_manifest(const nlohmann::json& j) {
  Manifest m;
  m.seed = need(j, "seed").get<std::uint64_t>();
  const auto& sw = need(j, "sweep");
  m.sweep.eps = need(sw, "eps").get<std::vector<double>>();
  m.sweep.mu = need(sw, "mu").get<std::vector<double>>();
  m.settings = j.value("settings", nlohmann::json::object());
  for (const auto& e : need(j, "items")) {
    Item it;
    it.id = need(e, "id").get<std::string>();
    it.params = {num(e, "eps"), num(e, "mu")};
    if (!e.at("split").is_null()) it.split = split_from(e.at("split").get<std::string>());
    it.image = need(e, "image").get<std::string>();
    it.annotation = need(e, "annotation").get<std::string>();
    if (e.contains("field") && !e.at("field").is_null()) it.field = e.at("field").get<std::string>();
    it.n_boxes = need(e, "n_boxes").get<std::size_t>();
    if (!e.at("gt_time").is_null()) it.gt_time = num(e, "gt_time");
    m.items.push_back(std::move(it));
  }
  for (const auto& e : j.value("failures", nlohmann::json::array())) {
    Item it;
    it.id = need(e, "id").get<std::string>();
    it.params = {num(e, "eps"), num(e, "mu")};
    it.error = need(e, "error").get<std::string>();
    m.failures.push_back(std::move(it));
  }
  return m;
}

}  // namespace rogue::dataset
