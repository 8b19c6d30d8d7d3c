// Acceptance run: one PASS/FAIL line per criterion, diagnostics indented below.
// Exits non-zero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "rogue/coords.hpp"
#include "rogue/detect_eval.hpp"
#include "rogue/losses.hpp"
#include "rogue/metrics.hpp"
#include "rogue/nlse.hpp"
#include "rogue/parallel.hpp"
#include "rogue/peak_search.hpp"
#include "rogue/pipeline.hpp"
#include "rogue/sweep.hpp"

namespace fs = std::filesystem;
using namespace rogue;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int n, bool pass, const std::string& what) {
  std::printf("CRITERION %2d %s  %s\n", n, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

__attribute__((format(printf, 1, 2))) void note(const char* fmt, ...) {
  std::printf("    ");
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::printf("\n");
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct PeregrineRun {
  double err_full = 0.0;
  double err_interior = 0.0;  // |x| <= 20
  double err_band40 = 0.0;    // |x| <= 40
  double seconds = 0.0;
};

// Evolves the Peregrine data from t = -5 to t = 0 and compares against the closed form.
PeregrineRun peregrine_run(double length, std::size_t nx, double dt, double stability = 1.0) {
  nlse::SimGrid g;
  g.length = length;
  g.nx = nx;
  g.dt = dt;
  g.t_max = 5.0;
  g.stability_factor = stability;
  const auto t0 = Clock::now();
  nlse::IfRk4Stepper s(g);
  s.load(nlse::peregrine_field(g, -5.0));
  const auto steps = static_cast<long>(std::llround(5.0 / dt));
  for (long n = 0; n < steps; ++n) s.step();
  PeregrineRun r;
  r.seconds = seconds_since(t0);
  const auto f = s.field();
  for (std::size_t j = 0; j < nx; ++j) {
    const double e = std::abs(f.values[j] - nlse::peregrine(g.x(j), 0.0));
    r.err_full = std::max(r.err_full, e);
    if (std::abs(g.x(j)) <= 20.0) r.err_interior = std::max(r.err_interior, e);
    if (std::abs(g.x(j)) <= 40.0) r.err_band40 = std::max(r.err_band40, e);
  }
  return r;
}

void criterion1() {
  const auto base = peregrine_run(80.0, 1024, 1e-3);
  const bool accurate = base.err_full < 1e-4;
  const bool fast = base.seconds < 60.0;
  note("L=80 nx=1024 dt=1e-3: Linf error %.3e over the whole domain, %.3e on |x|<=20, %.2f s",
       base.err_full, base.err_interior, base.seconds);
  const auto wide = peregrine_run(320.0, 4096, 1e-3);
  note("L=320 nx=4096 dt=1e-3 (same dx): Linf error %.3e over the whole domain, %.3e on |x|<=40", wide.err_full,
       wide.err_band40);

  // Temporal order: coarse steps so the time error dominates, same dx.  On L=80 the
  // dt-independent mismatch of the algebraic tails at the periodic seam swamps it, so
  // the ratios are taken on |x| <= 40 of the L=320 domain, which the seam never reaches.
  const double s = 5.0;  // dt up to 0.025 needs dt <= 5 dx^2
  const auto c80a = peregrine_run(80.0, 1024, 0.025, s);
  const auto c80b = peregrine_run(80.0, 1024, 0.0125, s);
  note("L=80 halving dt 0.025 -> 0.0125: full-domain error %.3e -> %.3e, ratio %.2f", c80a.err_full,
       c80b.err_full, c80a.err_full / c80b.err_full);
  const auto a = peregrine_run(320.0, 4096, 0.025, s);
  const auto b = peregrine_run(320.0, 4096, 0.0125, s);
  const auto c = peregrine_run(320.0, 4096, 0.00625, s);
  const double r1 = a.err_band40 / b.err_band40, r2 = b.err_band40 / c.err_band40;
  note("L=320 dt 0.025/0.0125/0.00625: error on |x|<=40 %.3e %.3e %.3e, ratios %.2f %.2f", a.err_band40,
       b.err_band40, c.err_band40, r1, r2);
  const bool order = r1 >= 12.0 && r1 <= 20.0 && r2 >= 12.0 && r2 <= 20.0;
  std::ostringstream os;
  os << "Peregrine oracle: Linf " << base.err_full << " (< 1e-4 " << (accurate ? "met" : "missed") << "), runtime "
     << base.seconds << " s, convergence ratios " << r1 << ", " << r2 << (order ? " in" : " outside") << " [12, 20]";
  verdict(1, accurate && fast && order, os.str());
}

nlse::RecordedRun gaussian_run(double eps, double mu, double t_max) {
  nlse::SimGrid g;
  g.t_max = t_max;
  const nlse::GaussParams p{eps, mu};
  return nlse::evolve_record(g, nlse::gaussian_initial(g, p), {}, p);
}

void criterion2(const nlse::RecordedRun& run) {
  const double dm = run.diagnostics.mass_drift(), de = run.diagnostics.energy_drift();
  std::ostringstream os;
  os << "conservation (eps=20, mu=2, t_max=15): mass drift " << dm << " (< 1e-10), energy drift " << de
     << " (< 1e-8)";
  verdict(2, dm < 1e-10 && de < 1e-8, os.str());
}

std::vector<std::pair<std::size_t, std::size_t>> library_peaks(const nlse::AmplitudeMatrix& m) {
  const peaks::PeakSearchParams p;
  const auto map = peaks::local_max_pass(m, peaks::threshold_pass(m, p), p);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& pk : peaks::collect_peaks(m, map)) out.emplace_back(pk.i, pk.j);
  return out;
}

void criterion3(const nlse::RecordedRun& run) {
  std::mt19937_64 rng(2024);
  int equal = 0;
  std::size_t total_peaks = 0;
  for (int k = 0; k < 50; ++k) {
    const auto m = oracle::random_matrix(rng, 256);
    const auto lib = library_peaks(m);
    total_peaks += lib.size();
    if (lib == oracle::brute_force_peaks(m, 1.7, 2.0)) ++equal;
  }
  const auto& g = run.amplitude;
  const auto lib = library_peaks(g);
  const bool gauss_equal = lib == oracle::brute_force_peaks(g, 1.7, 2.0);
  note("random matrices: %d/50 identical (%zu peaks in total); Gaussian run %zux%zu: %zu peaks, %s", equal,
       total_peaks, g.nt, g.nx, lib.size(), gauss_equal ? "identical" : "different");
  std::ostringstream os;
  os << "Peak Search equals brute force on " << equal << "/50 random matrices and "
     << (gauss_equal ? "the" : "NOT the") << " Gaussian run";
  verdict(3, equal == 50 && gauss_equal, os.str());
}

void criterion4() {
  nlse::SimGrid g;  // x grid of the default solver, t from -5 to 5
  g.t_max = 5.0;
  nlse::RecordOptions rec;
  const auto run = nlse::peregrine_record(g, -5.0, rec);
  const auto& m = run.amplitude;
  const auto cmap = CoordMap::fit(m.nt, m.nx, 512, 512);
  const auto r = peaks::peak_search(m, {}, cmap);
  // Nearest grid point to (0, 0).
  const auto i0 = static_cast<std::size_t>(std::llround((0.0 - m.t0) / m.dt_record));
  const auto j0 = static_cast<std::size_t>(std::llround((0.0 - m.x0) / m.dx));
  const double sampling = std::max({3.0 - std::abs(nlse::peregrine(0.5 * m.dx, 0.0)),
                                    3.0 - std::abs(nlse::peregrine(0.0, 0.5 * m.dt_record)),
                                    3.0 - std::abs(nlse::peregrine(0.5 * m.dx, 0.5 * m.dt_record))});
  bool ok = r.boxes.size() == 1 && r.peaks.size() == 1;
  std::ostringstream os;
  os << "Peregrine single unit: " << r.boxes.size() << " box(es)";
  if (!r.peaks.empty()) {
    const auto& pk = r.peaks.front();
    const auto centre = cmap.to_pixel(static_cast<double>(i0), static_cast<double>(j0));
    const bool at_origin = pk.i == i0 && pk.j == j0 && std::abs(r.boxes.front().cx - centre.px) < 1e-9 &&
                           std::abs(r.boxes.front().cy - centre.py) < 1e-9;
    const bool amp = std::abs(pk.amplitude - 3.0) <= sampling;
    ok = ok && at_origin && amp;
    os << " at cell (" << pk.i << ", " << pk.j << ") vs nearest (" << i0 << ", " << j0 << "), amplitude "
       << pk.amplitude << " (3 +- " << sampling << ")";
  }
  verdict(4, ok, os.str());
}

void criterion5() {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> un(0.0, 500.0), uth(1e-3, std::numbers::pi - 1e-3), udt(0.1, 60.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double n = un(rng), th = uth(rng), dt = udt(rng);
    const double back = metrics::drw(n, th, dt) * dt * dt * std::tan(th / 2);
    worst = std::max(worst, std::abs(back - n) / std::max(n, 1e-300));
  }
  // A 20x20 box centred on the right edge of the triangle, through the image map.
  const auto tri = metrics::Triangle::from_apex({0.0, 0.0}, metrics::deg_to_rad(120.0), 10.0);
  const Axes axes{0.0, 0.05, -20.0, 0.05};
  const auto map = CoordMap::identity(800, 800);
  const double te = 5.0, xe = te * std::tan(metrics::deg_to_rad(60.0));
  const double px = (xe - axes.x0) / axes.dx, py = (te - axes.t0) / axes.dt;
  const std::vector<BoundingBox> half{BoundingBox::from_corners(px - 10, py - 10, px + 10, py + 10)};
  const double n_half = metrics::fractional_count(half, tri, map, axes);
  note("worst relative identity error %.3e over 1000 draws; half-inside box counts %.15f", worst, n_half);
  std::ostringstream os;
  os << "DRW identity: worst relative error " << worst << " (<= 1e-9), half-inside box " << n_half
     << " (0.5 +- 1e-9)";
  verdict(5, worst <= 1e-9 && std::abs(n_half - 0.5) <= 1e-9, os.str());
}

void criterion6() {
  struct Model {
    double p, q;
  };
  const std::vector<Model> table1{{1.581, -0.804}, {2.136, -0.766}, {2.563, -0.819}};
  const std::vector<Model> table2{{0.682, 1.900}, {0.890, 2.760}, {1.042, 3.382}};
  std::vector<double> eps, mu;
  for (int k = 0; k < 100; ++k) eps.push_back(11.0 + k), mu.push_back(0.5 + 0.5 * k);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 0.01);
  double worst_exact = 0.0, worst_z = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const double sigma = pass == 0 ? 0.0 : 1.0;
    for (const auto& m : table1) {
      std::vector<std::pair<double, double>> data;
      for (double e : eps) data.emplace_back(e, m.p * std::log(e) + m.q + sigma * noise(rng));
      const auto f = metrics::fit_gt_log_eps(data);
      if (pass == 0) {
        worst_exact = std::max({worst_exact, std::abs(f.a - m.p), std::abs(f.b - m.q)});
      } else {
        worst_z = std::max({worst_z, std::abs(f.a - m.p) / f.detail.se_slope,
                            std::abs(f.b - m.q) / f.detail.se_intercept});
      }
    }
    for (const auto& m : table2) {
      std::vector<std::pair<double, double>> data;
      for (double u : mu) data.emplace_back(u, m.p * std::sqrt(u) + m.q + sigma * noise(rng));
      const auto f = metrics::fit_gt_sqrt_mu(data);
      if (pass == 0) {
        worst_exact = std::max({worst_exact, std::abs(f.c - m.p), std::abs(f.d - m.q)});
      } else {
        worst_z = std::max({worst_z, std::abs(f.c - m.p) / f.detail.se_slope,
                            std::abs(f.d - m.q) / f.detail.se_intercept});
      }
    }
  }
  std::ostringstream os;
  os << "fit recovery: noiseless worst error " << worst_exact << " (< 1e-9), sigma=0.01 worst deviation "
     << worst_z << " standard errors (<= 3)";
  verdict(6, worst_exact < 1e-9 && worst_z <= 3.0, os.str());
}

std::string pct(const sweep::Trend& t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%zu/%zu = %.1f%%", t.hits, t.pairs, 100.0 * t.fraction());
  return buf;
}

void criterion7() {
  sweep::Options opt;
  opt.settings.grid.t_max = 20.0;
  opt.delta_t = 10.0;
  opt.jobs = resolve_jobs(std::nullopt);
  std::vector<nlse::GaussParams> params;
  for (double e : {20.0, 40.0, 60.0, 80.0, 100.0})
    for (double m : {2.0, 5.0, 10.0, 20.0, 40.0}) params.push_back({e, m});
  note("5x5 sweep on %d worker(s), delta_t = 10 ...", opt.jobs);
  const auto t0 = Clock::now();
  const auto items = sweep::run(params, opt);
  const double secs = seconds_since(t0);
  std::size_t measured = 0;
  for (const auto& it : items) {
    if (it.measurement) {
      ++measured;
      const auto& m = *it.measurement;
      note("eps %5.1f mu %4.1f  t_max %6.2f  peaks %4zu  GT %7.3f  theta %7.2f  N %8.3f  DRW %.5f", it.params.eps,
           it.params.mu, it.t_max, it.peaks, m.gt, metrics::rad_to_deg(m.theta), m.n, m.drw);
    } else {
      note("eps %5.1f mu %4.1f  not measured: %s", it.params.eps, it.params.mu, it.error.c_str());
    }
  }
  const auto tr = sweep::trends(items);
  note("DRW decreasing along eps %s, along mu %s", pct(tr.drw_decreasing_eps).c_str(),
       pct(tr.drw_decreasing_mu).c_str());
  note("GT increasing along eps %s, along mu %s", pct(tr.gt_increasing_eps).c_str(),
       pct(tr.gt_increasing_mu).c_str());
  const bool drw_ok = tr.drw_decreasing_eps.fraction() >= 0.8 && tr.drw_decreasing_mu.fraction() >= 0.8;
  const bool gt_ok = tr.gt_increasing_eps.fraction() >= 0.9 && tr.gt_increasing_mu.fraction() >= 0.9;
  const bool time_ok = secs < 1800.0;
  std::ostringstream os;
  os << "5x5 trends: " << measured << "/25 measured; DRW decreasing " << pct(tr.drw_decreasing())
     << (drw_ok ? "" : " (below 80%)") << "; GT increasing " << pct(tr.gt_increasing())
     << (gt_ok ? "" : " (below 90%)") << "; runtime " << secs << " s";
  verdict(7, drw_ok && gt_ok && time_ok, os.str());
}

void criterion8() {
  sweep::Options opt;
  opt.settings.grid.t_max = 20.0;
  opt.delta_t = 10.0;
  opt.jobs = resolve_jobs(std::nullopt);
  std::vector<nlse::GaussParams> params;
  for (double e : {20.0, 40.0, 60.0, 80.0, 100.0}) params.push_back({e, 0.5});
  const auto items = sweep::run(params, opt);
  bool in_range = true;
  std::vector<double> theta;
  for (const auto& it : items) {
    if (!it.measurement) {
      in_range = false;
      note("eps %5.1f not measured: %s", it.params.eps, it.error.c_str());
      continue;
    }
    const double deg = metrics::rad_to_deg(it.measurement->theta);
    theta.push_back(deg);
    note("eps %5.1f mu 0.5  GT %7.3f  theta %7.2f", it.params.eps, it.measurement->gt, deg);
    if (deg < 115.0 || deg > 140.0) in_range = false;
  }
  std::size_t pairs = 0, hits = 0;
  for (std::size_t k = 1; k < theta.size(); ++k, ++pairs) hits += theta[k] <= theta[k - 1];
  const double frac = pairs ? static_cast<double>(hits) / static_cast<double>(pairs) : 0.0;
  std::ostringstream os;
  os << "theta row mu=0.5: " << (in_range ? "all" : "NOT all") << " in [115, 140] deg; non-increasing in " << hits
     << "/" << pairs << " adjacent pairs (>= 75% required)";
  verdict(8, in_range && frac >= 0.75, os.str());
}

void criterion9() {
  const auto checks = losses::run_self_check(42);
  std::size_t passed = 0;
  for (const auto& c : checks) {
    passed += c.pass;
    note("%s %-44s %s", c.pass ? "ok  " : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  std::ostringstream os;
  os << "loss suite: " << passed << "/" << checks.size() << " checks";
  verdict(9, passed == checks.size() && !checks.empty(), os.str());
}

void criterion10() {
  using namespace eval;
  auto b = [](double x0) { return BoundingBox::from_corners(x0, 0, x0 + 10, 10); };
  const std::vector<BoundingBox> truths{b(0), b(20), b(40)};
  std::vector<DetectionRecord> dets(4);
  const double xs[] = {0, 60, 20, 41}, conf[] = {0.9, 0.8, 0.7, 0.6};
  for (int k = 0; k < 4; ++k) dets[k].box = b(xs[k]), dets[k].confidence = conf[k], dets[k].image_id = "img";
  std::vector<ScoredMatch> sm;
  std::string pattern;
  for (const auto& m : match_detections(dets, truths, 0.5)) {
    sm.push_back({dets[m.det].confidence, m.truth.has_value()});
    pattern += m.truth ? "TP " : "FP ";
  }
  const double ap = average_precision(sm, truths.size()).ap;
  const double hand = (1.0 + 2.0 / 3.0 + 3.0 / 4.0) / 3.0;
  const bool hand_ok = pattern == "TP FP TP TP " && std::abs(ap - hand) <= 1e-6 &&
                       std::round(ap * 1e4) / 1e4 == 0.8056;

  std::vector<DetectionRecord> perfect;
  for (const auto& t : truths) {
    DetectionRecord d;
    d.box = t;
    perfect.push_back(d);
  }
  std::vector<ScoredMatch> ps;
  for (const auto& m : match_detections(perfect, truths, 0.5)) ps.push_back({1.0, m.truth.has_value()});
  const double ap1 = average_precision(ps, truths.size()).ap;
  note("ranked %s-> AP %.10f (hand value %.10f, envelope rule would give %.10f)", pattern.c_str(), ap, hand,
       average_precision(sm, truths.size(), ApInterpolation::Envelope).ap);
  note("the 99.29%% detector AP needs the trained network and is not attempted");
  std::ostringstream os;
  os << "evaluation oracle: AP " << ap << " (0.8056 +- 1e-6 on the exact hand value), predictions=truths AP " << ap1;
  verdict(10, hand_ok && ap1 == 1.0, os.str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void criterion11() {
  std::random_device rd;
  const auto root = fs::temp_directory_path() / ("rwave_accept_" + std::to_string(rd()));
  fs::create_directories(root);
  const std::string args = " dataset --eps 20,40,60,80,100 --mu 1,2 --seed 7 --out ";
  bool ran = true;
  for (const char* d : {"a", "b"}) {
    const std::string cmd = std::string(RWAVE_PATH) + args + (root / d).string() + " > " +
                            (root / (std::string(d) + ".log")).string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    ran = ran && WIFEXITED(st) && WEXITSTATUS(st) == 0;
  }
  bool identical = ran;
  std::size_t compared = 0;
  std::string splits = "n/a";
  if (ran) {
    std::vector<fs::path> files{"manifest.json"};
    for (const auto& e : fs::directory_iterator(root / "a" / "annotations")) files.push_back("annotations" / e.path().filename());
    for (const auto& f : files) {
      ++compared;
      if (!fs::exists(root / "b" / f) || slurp(root / "a" / f) != slurp(root / "b" / f)) identical = false;
    }
    const auto man = nlohmann::json::parse(slurp(root / "a" / "manifest.json"));
    const auto& c = man["counts"];
    splits = std::to_string(c["train"].get<int>()) + "/" + std::to_string(c["val"].get<int>()) + "/" +
             std::to_string(c["test"].get<int>());
    note("items %d, failed %d", c["items"].get<int>(), c["failed"].get<int>());
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  std::ostringstream os;
  os << "dataset determinism: " << compared << " files " << (identical ? "byte-identical" : "DIFFER")
     << " across two runs, splits " << splits << " (6/2/2)";
  verdict(11, identical && compared == 11 && splits == "6/2/2", os.str());
}

}  // namespace

int main() {
  const auto start = Clock::now();
  criterion1();
  const auto run = gaussian_run(20.0, 2.0, 15.0);
  criterion2(run);
  criterion3(run);
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  std::printf("%d of 11 criteria failed (%.0f s)\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
