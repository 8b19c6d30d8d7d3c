// rwave: simulate -> render -> detect -> measure -> sweep/fit -> eval.
//
// Exit codes: 0 ok, 1 I/O or unexpected failure (or every batch item failed),
// 2 invalid arguments / unreadable input, 3 solver blow-up, 4 measurement failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rogue/coords.hpp"
#include "rogue/dataset.hpp"
#include "rogue/detect_eval.hpp"
#include "rogue/errors.hpp"
#include "rogue/field_io.hpp"
#include "rogue/losses.hpp"
#include "rogue/metrics.hpp"
#include "rogue/nlse.hpp"
#include "rogue/parallel.hpp"
#include "rogue/peak_search.hpp"
#include "rogue/pipeline.hpp"
#include "rogue/render.hpp"
#include "rogue/sweep.hpp"

#ifndef RWAVE_VERSION
#define RWAVE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace rogue;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInvalid = 2;
constexpr int kBlowUp = 3;
constexpr int kMeasurement = 4;

struct BatchFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_text(path, text);
  }
}

io::FieldFile load_field(const std::string& path) {
  try {
    return io::read_rwf1(path);
  } catch (const FormatError& e) {
    throw ValidationError(std::string("unreadable field: ") + e.what());
  }
}

nlohmann::json load_json(const std::string& path) {
  try {
    return io::read_json(path);
  } catch (const FormatError& e) {
    throw ValidationError(e.what());
  }
}

// ---------------------------------------------------------------- flag groups

struct ImageFlags {
  int width = 512;
  int height = 512;
  bool time_down = false;

  void add(CLI::App* app) {
    app->add_option("--width", width, "Image width in pixels")->capture_default_str();
    app->add_option("--height", height, "Image height in pixels")->capture_default_str();
    app->add_flag("--time-down", time_down, "Time grows downward (default: upward)");
  }
  CoordMap map_for(const nlse::AmplitudeMatrix& m) const {
    return CoordMap::fit(m.nt, m.nx, width, height, !time_down);
  }
};

struct PeakFlags {
  peaks::PeakSearchParams p;
  std::string metric = "chebyshev";

  void add(CLI::App* app) {
    app->add_option("--eta", p.eta, "Threshold multiplier (threshold = eta * level)")->capture_default_str();
    app->add_option("--level", p.level, "Background level l")->capture_default_str();
    app->add_option("--radius", p.radius, "Local-maximum radius in cells")->capture_default_str();
    app->add_option("--box", p.box_px, "Box side in pixels")->capture_default_str();
    app->add_option("--metric", metric, "Window metric")
        ->check(CLI::IsMember({"chebyshev", "euclidean"}))
        ->capture_default_str();
  }
  peaks::PeakSearchParams get() const {
    auto q = p;
    q.metric = metric == "euclidean" ? peaks::Metric::Euclidean : peaks::Metric::Chebyshev;
    q.validate();
    return q;
  }
};

struct ThetaFlags {
  std::string method = "boundary";
  double bin_width = 2.0;

  void add(CLI::App* app) {
    app->add_option("--theta-method", method, "Apex-angle estimator")
        ->check(CLI::IsMember({"boundary", "hull"}))
        ->capture_default_str();
    app->add_option("--bin-width", bin_width, "Time-bin width of the boundary estimator")
        ->capture_default_str();
  }
  metrics::ThetaOptions get() const {
    if (!(bin_width > 0.0)) throw ValidationError("--bin-width must be > 0");
    metrics::ThetaOptions o;
    o.method = method == "hull" ? metrics::ThetaMethod::ConvexHull : metrics::ThetaMethod::BoundaryFit;
    o.bin_width = bin_width;
    return o;
  }
};

struct GridFlags {
  double t_max = 15.0;
  double length = 0.0;
  std::size_t nx = 0;
  double dt = 1e-3;
  double dt_record = 0.025;
  bool dealias = false;
  CLI::Option* length_opt = nullptr;
  CLI::Option* nx_opt = nullptr;

  void add(CLI::App* app, double default_t_max) {
    t_max = default_t_max;
    app->add_option("--t-max", t_max, "Final simulation time")->capture_default_str();
    length_opt = app->add_option("--length", length, "Domain length L (default: from t_max and mu)");
    nx_opt = app->add_option("--nx", nx, "Grid points, a power of two (default: from L)");
    app->add_option("--dt", dt, "Time step")->capture_default_str();
    app->add_option("--dt-record", dt_record, "Recording cadence, a multiple of dt")->capture_default_str();
    app->add_flag("--dealias", dealias, "2/3-rule dealiasing of the cubic term");
  }
  nlse::GridRequest request() const {
    nlse::GridRequest r;
    r.t_max = t_max;
    if (length_opt->count()) r.length = length;
    if (nx_opt->count()) r.nx = nx;
    r.dt = dt;
    r.dt_record = dt_record;
    return r;
  }
};

struct JobsFlag {
  int jobs = 0;
  CLI::Option* opt = nullptr;
  void add(CLI::App* app) {
    opt = app->add_option("--jobs", jobs, "Worker threads (default: RW_JOBS or logical cores)");
  }
  int get() const { return resolve_jobs(opt->count() ? std::optional<int>(jobs) : std::nullopt); }
};

pipeline::Settings settings_from(const GridFlags& g, const PeakFlags& pk, const ThetaFlags& th,
                                 const ImageFlags& img) {
  pipeline::Settings s;
  s.grid = g.request();
  s.solver.dealias = g.dealias;
  s.peak = pk.get();
  s.theta = th.get();
  s.image_w = img.width;
  s.image_h = img.height;
  s.time_up = !img.time_down;
  return s;
}

// ---------------------------------------------------------------- simulate

struct SimulateCmd {
  double eps = 0.0, mu = 0.0;
  std::string initial = "gauss";
  double t0 = 0.0;
  bool analytic = false;
  std::size_t record_every = 0;
  bool complex_payload = false;
  std::string out;
  GridFlags grid;
  CLI::Option* eps_opt = nullptr;
  CLI::Option* mu_opt = nullptr;
  CLI::Option* every_opt = nullptr;

  CLI::App* add(CLI::App& app) {
    auto* c = app.add_subcommand("simulate", "Evolve the NLSE and write an RWF1 field file");
    eps_opt = c->add_option("--eps", eps, "Gaussian parameter eps (> 0)");
    mu_opt = c->add_option("--mu", mu, "Gaussian width mu (> 0)");
    c->add_option("--initial", initial, "Initial data")
        ->check(CLI::IsMember({"gauss", "peregrine", "plane"}))
        ->capture_default_str();
    c->add_option("--t0", t0, "Start time (peregrine and plane data)")->capture_default_str();
    c->add_flag("--analytic", analytic, "Sample the exact Peregrine solution instead of evolving");
    every_opt = c->add_option("--record-every", record_every, "Record every N steps (overrides --dt-record)");
    c->add_flag("--complex", complex_payload, "Store complex u instead of |u|");
    c->add_option("--out", out, "Output field file (sidecar written to <out>.json)")->required();
    grid.add(c, 15.0);
    return c;
  }

  int run() {
    nlse::SimGrid g;
    std::optional<nlse::GaussParams> params;
    nlse::ComplexField init;
    if (initial == "gauss") {
      if (!eps_opt->count() || !mu_opt->count()) throw ValidationError("gauss initial data needs --eps and --mu");
      if (t0 != 0.0) throw ValidationError("--t0 applies to peregrine and plane data only");
      params = nlse::GaussParams{eps, mu};
      params->validate();
      g = nlse::auto_grid(*params, grid.request());
      init = nlse::gaussian_initial(g, *params);
    } else {
      if (eps_opt->count() || mu_opt->count()) throw ValidationError("--eps/--mu apply to gauss data only");
      g.length = grid.length_opt->count() ? grid.length : 80.0;
      g.nx = grid.nx_opt->count() ? grid.nx : 1024;
      g.dt = grid.dt;
      g.t_max = grid.t_max;
      g.validate();
      init = initial == "peregrine" ? nlse::peregrine_field(g, t0) : nlse::plane_wave(g);
      init.t = t0;
    }
    if (analytic && initial != "peregrine") throw ValidationError("--analytic needs --initial peregrine");

    nlse::RecordOptions rec;
    rec.solver.dealias = grid.dealias;
    rec.keep_complex = complex_payload;
    if (every_opt->count()) {
      if (record_every == 0) throw ValidationError("--record-every must be >= 1");
      rec.record_every = record_every;
    } else {
      rec.record_every = nlse::record_every_for(g, grid.dt_record);
    }

    const auto run = analytic ? nlse::peregrine_record(g, t0, rec) : nlse::evolve_record(g, init, rec, params);
    const auto kind = complex_payload ? io::PayloadKind::Complex : io::PayloadKind::Amplitude;
    if (complex_payload) {
      io::write_rwf1_complex(out, run.amplitude, run.complex_rows);
    } else {
      io::write_rwf1(out, run.amplitude);
    }
    auto side = io::run_sidecar(run.amplitude, kind, g, rec, run.diagnostics);
    side["initial"] = initial;
    side["analytic"] = analytic;
    io::write_json(io::sidecar_path(out), side);

    const auto& d = run.diagnostics;
    const auto& m = run.amplitude;
    std::cout << "wrote " << out << ": " << m.nt << " x " << m.nx << " (t " << m.t0 << " .. " << m.t_end()
              << ", L " << g.length << ", nx " << g.nx << ", dt " << g.dt << ", " << d.steps << " steps)\n";
    std::cout << "mass drift " << fmt(d.mass_drift(), 3) << ", energy drift " << fmt(d.energy_drift(), 3) << "\n";
    for (const auto& w : d.warnings) std::cerr << "warning: " << w << "\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- render

struct RenderCmd {
  std::string field, out, cmap = "ramp";
  double a_lo = 0.0, a_hi = 3.2;
  ImageFlags image;

  CLI::App* add(CLI::App& app) {
    auto* c = app.add_subcommand("render", "Render a field file to an 8-bit RGB PNG");
    c->add_option("--field", field, "Input RWF1 field")->required();
    c->add_option("--out", out, "Output PNG")->required();
    c->add_option("--colormap", cmap, "Colormap")->check(CLI::IsMember({"ramp", "gray"}))->capture_default_str();
    c->add_option("--a-lo", a_lo, "Amplitude drawn at the bottom of the colormap")->capture_default_str();
    c->add_option("--a-hi", a_hi, "Amplitude drawn at the top of the colormap")->capture_default_str();
    image.add(c);
    return c;
  }

  int run() {
    const render::Range range{a_lo, a_hi};
    range.validate();
    const auto f = load_field(field);
    const auto map = image.map_for(f.amplitude);
    render::write_png(out, render::render(f.amplitude, render::Colormap::by_name(cmap), map, range));
    std::cout << "wrote " << out << " (" << image.width << " x " << image.height << ")\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- detect

struct DetectCmd {
  std::string field, out, image_file, corners_out;
  PeakFlags peak;
  ImageFlags image;

  CLI::App* add(CLI::App& app) {
    auto* c = app.add_subcommand("detect", "Run Peak Search on a field and write an annotation");
    c->add_option("--field", field, "Input RWF1 field")->required();
    c->add_option("--out", out, "Annotation JSON (default: stdout)");
    c->add_option("--image-file", image_file, "Image name recorded in the annotation (default: <field stem>.png)");
    c->add_option("--corners-out", corners_out, "Also write a corner-format box listing");
    peak.add(c);
    image.add(c);
    return c;
  }

  int run() {
    const auto params = peak.get();
    const auto f = load_field(field);
    const auto map = image.map_for(f.amplitude);
    const auto found = peaks::peak_search(f.amplitude, params, map);
    const std::string img = image_file.empty() ? fs::path(field).stem().string() + ".png" : image_file;
    const auto ann = dataset::make_annotation(img, f.amplitude, map, found.boxes);
    write_or_print(out, dataset::annotation_json(ann).dump(2) + "\n");
    if (!corners_out.empty()) {
      const std::vector<eval::ImageBoxes> listing{dataset::to_corners(ann, fs::path(img).stem().string())};
      io::write_json(corners_out, eval::box_file_json(listing));
    }
    std::cerr << found.boxes.size() << " rogue-wave box(es)";
    if (ann.gt_time) std::cerr << ", first peak at t = " << *ann.gt_time;
    std::cerr << "\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- measure

struct MeasureCmd {
  std::string field, annotation, out, csv;
  double delta_t = 15.0;
  ThetaFlags theta;

  CLI::App* add(CLI::App& app) {
    auto* c = app.add_subcommand("measure", "GT, theta, N and DRW from an annotation");
    c->add_option("--annotation", annotation, "Annotation JSON from detect or dataset")->required();
    c->add_option("--field", field, "Field the annotation was made from (checked for consistency)");
    c->add_option("--delta-t", delta_t, "Triangle height above the first peak")->capture_default_str();
    c->add_option("--out", out, "Metrics JSON (default: stdout)");
    c->add_option("--csv", csv, "Also write a one-row CSV");
    theta.add(c);
    return c;
  }

  int run() {
    if (!(delta_t > 0.0)) throw ValidationError("--delta-t must be > 0");
    dataset::Annotation a;
    try {
      a = dataset::parse_annotation(load_json(annotation));
    } catch (const FormatError& e) {
      throw ValidationError(std::string("bad annotation: ") + e.what());
    }
    if (!field.empty()) {
      const auto f = load_field(field);
      if (f.amplitude.nt != a.grid.nt || f.amplitude.nx != a.grid.nx) {
        throw ValidationError("field shape does not match the annotation grid");
      }
    }
    const auto m = sweep::measure_annotation(a, delta_t, theta.get());
    nlohmann::json j;
    j["eps"] = a.params ? nlohmann::json(a.params->eps) : nlohmann::json(nullptr);
    j["mu"] = a.params ? nlohmann::json(a.params->mu) : nlohmann::json(nullptr);
    j["gt"] = m.gt;
    j["theta_deg"] = metrics::rad_to_deg(m.theta);
    j["apex"] = {{"x", m.apex.x}, {"t", m.apex.t}};
    j["delta_t"] = m.delta_t;
    j["n"] = m.n;
    j["s_abc"] = m.s_abc;
    j["drw"] = m.drw;
    j["boxes_total"] = m.boxes_total;
    j["triangle"] = {{"a", {m.triangle.a.x, m.triangle.a.t}},
                     {"b", {m.triangle.b.x, m.triangle.b.t}},
                     {"c", {m.triangle.c.x, m.triangle.c.t}}};
    write_or_print(out, j.dump(2) + "\n");
    if (!csv.empty()) {
      pipeline::ItemMeasurement item;
      item.params = a.params.value_or(nlse::GaussParams{std::nan(""), std::nan("")});
      item.measurement = m;
      io::write_text(csv, sweep::measurements_csv({item}));
    }
    return kOk;
  }
};

// ---------------------------------------------------------------- dataset

struct DatasetCmd {
  std::string eps = "11:110:1", mu = "0.5:50:0.5", out, cmap = "ramp";
  std::uint64_t seed = 0;
  bool no_fields = false;
  GridFlags grid;
  PeakFlags peak;
  ImageFlags image;
  JobsFlag jobs;

  CLI::App* add(CLI::App& app) {
    auto* c = app.add_subcommand("dataset", "Generate an annotated image dataset over an (eps, mu) sweep");
    c->add_option("--eps", eps, "eps values: start:stop:step or a,b,c")->capture_default_str();
    c->add_option("--mu", mu, "mu values: start:stop:step or a,b,c")->capture_default_str();
    c->add_option("--seed", seed, "Split seed")->capture_default_str();
    c->add_option("--out", out, "Output directory")->required();
    c->add_option("--colormap", cmap, "Colormap")->check(CLI::IsMember({"ramp", "gray"}))->capture_default_str();
    c->add_flag("--no-fields", no_fields, "Skip writing RWF1 field files");
    grid.add(c, 20.0);
    peak.add(c);
    image.add(c);
    jobs.add(c);
    return c;
  }

  int run() {
    dataset::Sweep sw{dataset::parse_values(eps, "eps"), dataset::parse_values(mu, "mu")};
    sw.validate();
    dataset::Options opt;
    opt.settings = settings_from(grid, peak, ThetaFlags{}, image);
    opt.cmap = render::Colormap::by_name(cmap);
    opt.write_fields = !no_fields;
    opt.jobs = jobs.get();
    opt.seed = seed;
    const auto man = dataset::make_dataset(sw, opt, out);
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& it : man.items) ++counts[static_cast<int>(*it.split)];
    std::cout << "dataset " << out << ": " << man.items.size() << " items (train " << counts[0] << ", val "
              << counts[1] << ", test " << counts[2] << "), " << man.failures.size() << " failed\n";
    for (const auto& f : man.failures) {
      std::cerr << "failed " << f.id << " (eps " << f.params.eps << ", mu " << f.params.mu << "): " << f.error << "\n";
    }
    if (man.items.empty()) throw BatchFailed("every dataset item failed");
    return kOk;
  }
};

// ---------------------------------------------------------------- sweep

struct SweepCmd {
  std::string eps = "20,40,60,80,100", mu = "2,5,10,20,40", out, manifest, curve = "", png;
  double delta_t = 15.0, t_cap = 60.0;
  GridFlags grid;
  PeakFlags peak;
  ThetaFlags theta;
  ImageFlags image;
  JobsFlag jobs;

  CLI::App* add(CLI::App& app) {
    auto* c = app.add_subcommand("sweep", "Measure DRW, GT, theta and N over an (eps, mu) grid");
    c->add_option("--eps", eps, "eps values")->capture_default_str();
    c->add_option("--mu", mu, "mu values")->capture_default_str();
    c->add_option("--manifest", manifest, "Measure the items of an existing dataset instead of simulating");
    c->add_option("--delta-t", delta_t, "Triangle height")->capture_default_str();
    c->add_option("--curve-delta-t", curve, "Extra delta_t values for DRW-vs-delta_t curves (a,b,c)");
    c->add_option("--t-cap", t_cap, "Never simulate past this time")->capture_default_str();
    c->add_option("--out", out, "Output directory")->required();
    c->add_option("--png", png, "Also render the DRW grid as a PNG heatmap");
    grid.add(c, 20.0);
    peak.add(c);
    theta.add(c);
    image.add(c);
    jobs.add(c);
    return c;
  }

  int run() {
    if (!(delta_t > 0.0)) throw ValidationError("--delta-t must be > 0");
    std::vector<double> curve_dts;
    if (!curve.empty()) curve_dts = dataset::parse_values(curve, "curve delta_t");
    std::vector<pipeline::ItemMeasurement> items;
    if (!manifest.empty()) {
      dataset::Manifest man;
      try {
        man = dataset::parse_manifest(load_json(manifest));
      } catch (const FormatError& e) {
        throw ValidationError(std::string("bad manifest: ") + e.what());
      }
      items = sweep::from_manifest(fs::path(manifest).parent_path(), man, delta_t, theta.get(), curve_dts);
    } else {
      dataset::Sweep sw{dataset::parse_values(eps, "eps"), dataset::parse_values(mu, "mu")};
      sweep::Options opt;
      opt.settings = settings_from(grid, peak, theta, image);
      opt.settings.t_cap = t_cap;
      opt.delta_t = delta_t;
      opt.curve_delta_ts = curve_dts;
      opt.jobs = jobs.get();
      items = sweep::run(sw.items(), opt);
    }
    fs::create_directories(out);
    const fs::path dir(out);
    const auto tr = sweep::trends(items);
    io::write_text(dir / "measurements.csv", sweep::measurements_csv(items));
    io::write_text(dir / "drw_grid.csv", sweep::drw_grid_csv(items));
    io::write_text(dir / "drw_vs_delta_t.csv", sweep::drw_curves_csv(items));
    io::write_text(dir / "n_vs_eps.csv", sweep::n_vs_eps_csv(items));
    io::write_text(dir / "n_vs_mu.csv", sweep::n_vs_mu_csv(items));
    io::write_json(dir / "summary.json", sweep::summary_json(items, tr, delta_t));
    if (!png.empty()) write_heatmap(items);

    std::size_t ok = 0;
    for (const auto& it : items) {
      if (it.measurement) {
        ++ok;
      } else {
        std::cerr << "skipped eps " << it.params.eps << ", mu " << it.params.mu << ": " << it.error << "\n";
      }
    }
    std::cout << "sweep " << out << ": " << ok << "/" << items.size() << " measured; DRW decreasing in "
              << fmt(100.0 * tr.drw_decreasing().fraction(), 4) << "% of " << tr.drw_decreasing().pairs
              << " adjacent pairs, GT increasing in " << fmt(100.0 * tr.gt_increasing().fraction(), 4) << "% of "
              << tr.gt_increasing().pairs << "\n";
    if (ok == 0) throw BatchFailed("no sweep item could be measured");
    return kOk;
  }

  void write_heatmap(const std::vector<pipeline::ItemMeasurement>& items) const {
    const auto g = sweep::drw_grid(items);
    double hi = 0.0;
    for (double v : g.drw) {
      if (std::isfinite(v)) hi = std::max(hi, v);
    }
    const render::Range range{0.0, hi > 0.0 ? hi : 1.0};
    const int cell = 32;
    CoordMap map;
    map.image_w = static_cast<int>(g.eps.size()) * cell;
    map.image_h = static_cast<int>(g.mu.size()) * cell;
    map.scale_x = map.scale_y = static_cast<double>(cell);
    map.offset_x = map.offset_y = 0.5 * (cell - 1);
    map.time_up = true;  // small mu at the bottom, like a plot
    render::write_png(png, render::render_values(g.drw, g.mu.size(), g.eps.size(), render::Colormap::ramp(),
                                                 map, range));
  }
};

// ---------------------------------------------------------------- fit

struct FitCmd {
  std::string input, model = "log_eps", out;
  CLI::Option* mu_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
  double mu_value = 0.0, eps_value = 0.0;

  CLI::App* add(CLI::App& app) {
    auto* c = app.add_subcommand("fit", "Fit GT = a ln(eps) + b or GT = c sqrt(mu) + d to a sweep CSV");
    c->add_option("--input", input, "measurements.csv from sweep (columns eps, mu, gt)")->required();
    c->add_option("--model", model, "Model")->check(CLI::IsMember({"log_eps", "sqrt_mu"}))->capture_default_str();
    mu_opt = c->add_option("--mu", mu_value, "Use only rows at this mu (log_eps)");
    eps_opt = c->add_option("--eps", eps_value, "Use only rows at this eps (sqrt_mu)");
    c->add_option("--out", out, "Fit JSON (default: stdout)");
    return c;
  }

  int run() {
    std::string text;
    {
      std::ifstream is(input);
      if (!is) throw ValidationError("cannot open " + input);
      std::stringstream ss;
      ss << is.rdbuf();
      text = ss.str();
    }
    std::vector<sweep::CsvRow> rows;
    try {
      rows = sweep::parse_measurements_csv(text);
    } catch (const FormatError& e) {
      throw ValidationError(e.what());
    }
    const bool by_eps = model == "log_eps";
    CLI::Option* filter = by_eps ? mu_opt : eps_opt;
    if ((by_eps ? eps_opt : mu_opt)->count()) {
      throw ValidationError(by_eps ? "log_eps fits filter on --mu, not --eps" : "sqrt_mu fits filter on --eps, not --mu");
    }
    const double want = by_eps ? mu_value : eps_value;
    std::set<double> groups;
    std::vector<std::pair<double, double>> samples;
    for (const auto& r : rows) {
      const double key = by_eps ? r.mu : r.eps;
      groups.insert(key);
      if (filter->count() && std::abs(key - want) > 1e-9 * std::max(1.0, std::abs(want))) continue;
      samples.emplace_back(by_eps ? r.eps : r.mu, r.gt);
    }
    if (!filter->count() && groups.size() > 1) {
      std::ostringstream os;
      os << "rows span several " << (by_eps ? "mu" : "eps") << " values (";
      bool first = true;
      for (double g : groups) {
        os << (first ? "" : ", ") << g;
        first = false;
      }
      os << "); pick one with " << (by_eps ? "--mu" : "--eps");
      throw ValidationError(os.str());
    }
    metrics::LinearFit f;
    nlohmann::json j;
    if (by_eps) {
      f = metrics::fit_gt_log_eps(samples).detail;
      j = sweep::fit_json("log_eps", f);
      if (!groups.empty()) j["mu"] = filter->count() ? want : *groups.begin();
    } else {
      f = metrics::fit_gt_sqrt_mu(samples).detail;
      j = sweep::fit_json("sqrt_mu", f);
      if (!groups.empty()) j["eps"] = filter->count() ? want : *groups.begin();
    }
    write_or_print(out, j.dump(2) + "\n");
    return kOk;
  }
};

// ---------------------------------------------------------------- eval

struct EvalCmd {
  std::string pred, truth, out, pr_csv, interp = "step";
  double iou = 0.5;

  CLI::App* add(CLI::App& app) {
    auto* c = app.add_subcommand("eval", "Average precision of detections against ground-truth boxes");
    c->add_option("--pred", pred, "Predictions (corner-format JSON list)")->required();
    c->add_option("--truth", truth, "Ground truth (corner-format JSON list)")->required();
    c->add_option("--iou", iou, "IoU threshold")->capture_default_str();
    c->add_option("--interp", interp, "AP rule: step (precision at each recall step) or envelope")
        ->check(CLI::IsMember({"step", "envelope"}))
        ->capture_default_str();
    c->add_option("--out", out, "Report JSON (default: stdout)");
    c->add_option("--pr-csv", pr_csv, "Pooled precision-recall curve as CSV");
    return c;
  }

  int run() {
    std::vector<eval::ImageBoxes> p, t;
    try {
      p = eval::parse_box_file(load_json(pred));
      t = eval::parse_box_file(load_json(truth));
    } catch (const FormatError& e) {
      throw ValidationError(e.what());
    }
    const auto rule = interp == "envelope" ? eval::ApInterpolation::Envelope : eval::ApInterpolation::Step;
    const auto report = eval::evaluate_dataset(p, t, iou, rule);
    write_or_print(out, eval::report_json(report, rule).dump(2) + "\n");
    if (!pr_csv.empty()) io::write_text(pr_csv, eval::pr_curve_csv(report.pooled));
    for (const auto& id : report.missing_predictions) std::cerr << "warning: no predictions for " << id << "\n";
    for (const auto& id : report.unmatched_ids) std::cerr << "warning: predictions for unknown image " << id << "\n";
    std::cerr << "AP@" << iou << " = " << fmt(report.pooled.ap, 8) << "\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- losses-check

struct LossesCheckCmd {
  std::uint64_t seed = 42;

  CLI::App* add(CLI::App& app) {
    auto* c = app.add_subcommand("losses-check", "Run the loss-function reference checks");
    c->add_option("--seed", seed, "Seed for the randomized anchors")->capture_default_str();
    return c;
  }

  int run() {
    const auto results = losses::run_self_check(seed);
    std::size_t failed = 0;
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    for (const auto& r : results) {
      if (!r.pass) ++failed;
      std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name << std::string(width - r.name.size() + 2, ' ')
                << r.detail << "\n";
    }
    std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed == 0 ? kOk : kFailure;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rogue-wave pattern toolkit: NLSE simulation, Peak Search, DRW measurement, evaluation"};
  app.set_version_flag("--version", std::string("rwave ") + RWAVE_VERSION);
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 1 I/O failure or every batch item failed, 2 invalid arguments or unreadable input,\n"
      "3 solver blow-up, 4 measurement failure.  RW_JOBS sets the default worker count.");

  SimulateCmd simulate;
  RenderCmd render_cmd;
  DetectCmd detect;
  MeasureCmd measure;
  DatasetCmd dataset_cmd;
  SweepCmd sweep_cmd;
  FitCmd fit;
  EvalCmd eval_cmd;
  LossesCheckCmd losses_check;

  std::vector<std::pair<CLI::App*, std::function<int()>>> commands{
      {simulate.add(app), [&] { return simulate.run(); }},
      {render_cmd.add(app), [&] { return render_cmd.run(); }},
      {detect.add(app), [&] { return detect.run(); }},
      {measure.add(app), [&] { return measure.run(); }},
      {dataset_cmd.add(app), [&] { return dataset_cmd.run(); }},
      {sweep_cmd.add(app), [&] { return sweep_cmd.run(); }},
      {fit.add(app), [&] { return fit.run(); }},
      {eval_cmd.add(app), [&] { return eval_cmd.run(); }},
      {losses_check.add(app), [&] { return losses_check.run(); }},
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    for (auto& [cmd, fn] : commands) {
      if (cmd->parsed()) return fn();
    }
    return kInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const BlowUpError& e) {
    std::cerr << "error: " << e.what() << " (t = " << e.time() << ")\n";
    return kBlowUp;
  } catch (const MeasurementError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMeasurement;
  } catch (const BatchFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
