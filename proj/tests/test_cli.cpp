#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

struct Sandbox {
  fs::path dir;
  Sandbox() {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("rwave_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(dir);
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }

  Run rwave(const std::string& args) const {
    const auto log = dir / "last.log";
    const std::string cmd = std::string(RWAVE_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read(log);
    return r;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary) << text;
  }
};

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2, help and version exit 0") {
  Sandbox sb;
  CHECK(sb.rwave("--version").code == 0);
  CHECK(sb.rwave("--help").code == 0);
  CHECK(sb.rwave("simulate --help").code == 0);
  CHECK(sb.rwave("").code == 2);
  CHECK(sb.rwave("frobnicate").code == 2);
  CHECK(sb.rwave("simulate --bogus --out " + sb.p("x.rwf")).code == 2);
  CHECK(sb.rwave("simulate --eps 0 --mu 2 --out " + sb.p("x.rwf")).code == 2);
  CHECK(sb.rwave("simulate --eps 20 --mu 2 --nx 1000 --out " + sb.p("x.rwf")).code == 2);
  CHECK(sb.rwave("render --field " + sb.p("missing.rwf") + " --out " + sb.p("x.png")).code == 2);
  CHECK(sb.rwave("eval --pred " + sb.p("none.json") + " --truth " + sb.p("none.json")).code == 2);
}

TEST_CASE("simulate, render, detect, measure") {
  Sandbox sb;
  auto r = sb.rwave("simulate --initial peregrine --t0 -5 --t-max 5 --analytic --out " + sb.p("p.rwf"));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(sb.p("p.rwf.json")));
  CHECK(sb.rwave("render --field " + sb.p("p.rwf") + " --out " + sb.p("p.png")).code == 0);
  CHECK(fs::file_size(sb.p("p.png")) > 100);
  r = sb.rwave("detect --field " + sb.p("p.rwf") + " --out " + sb.p("p.json"));
  REQUIRE(r.code == 0);
  const auto ann = nlohmann::json::parse(Sandbox::read(sb.p("p.json")));
  REQUIRE(ann["boxes"].size() == 1);
  CHECK(std::abs(ann["gt_time"].get<double>()) < 1e-9);
  // One unit and a window past the recorded span: measurement failure.
  CHECK(sb.rwave("measure --annotation " + sb.p("p.json") + " --delta-t 15").code == 4);
  CHECK(sb.rwave("detect --field " + sb.p("p.rwf") + " --eta 0.5").code == 2);

  r = sb.rwave("simulate --initial plane --t-max 0.05 --record-every 1 --out " + sb.p("w.rwf"));
  REQUIRE(r.code == 0);
  const auto side = nlohmann::json::parse(Sandbox::read(sb.p("w.rwf.json")));
  CHECK(side["nt"] == 51);
  CHECK(side["nx"] == 1024);
}

TEST_CASE("blow-up exits 3") {
  Sandbox sb;
  // Amplitude ~2000 makes the cubic term far too stiff for dt = 1e-3.
  CHECK(sb.rwave("simulate --eps 0.001 --mu 1 --t-max 1 --out " + sb.p("b.rwf")).code == 3);
}

TEST_CASE("sweep, fit and eval") {
  Sandbox sb;
  auto r = sb.rwave("sweep --eps 20,40 --mu 2,5 --delta-t 10 --jobs 2 --out " + sb.p("sw"));
  REQUIRE(r.code == 0);
  const auto csv = Sandbox::read(sb.p("sw/measurements.csv"));
  CHECK(csv.rfind("eps,mu,gt,theta_deg,delta_t,n,s_abc,drw\n", 0) == 0);
  CHECK(lines(csv) == 5);
  for (const auto* f : {"drw_grid.csv", "drw_vs_delta_t.csv", "n_vs_eps.csv", "n_vs_mu.csv", "summary.json"})
    CHECK(fs::exists(sb.dir / "sw" / f));
  // Several mu groups need a filter.
  CHECK(sb.rwave("fit --input " + sb.p("sw/measurements.csv") + " --model log_eps").code == 2);

  std::ostringstream synth;
  synth << "eps,mu,gt\n";
  for (double e : {20.0, 40.0, 60.0, 80.0, 100.0}) synth << e << ",10," << std::setprecision(17) << 2.136 * std::log(e) - 0.766 << "\n";
  sb.write("synth.csv", synth.str());
  r = sb.rwave("fit --input " + sb.p("synth.csv") + " --model log_eps --out " + sb.p("fit.json"));
  REQUIRE(r.code == 0);
  const auto fit = nlohmann::json::parse(Sandbox::read(sb.p("fit.json")));
  CHECK(std::abs(fit["params"][0].get<double>() - 2.136) < 1e-9);
  CHECK(std::abs(fit["params"][1].get<double>() + 0.766) < 1e-9);

  const std::string boxes =
      R"([{"image_id": "a", "boxes": [{"x_min": 0, "y_min": 0, "x_max": 10, "y_max": 10},
                                       {"x_min": 30, "y_min": 0, "x_max": 40, "y_max": 10}]},
          {"image_id": "b", "boxes": [{"x_min": 5, "y_min": 5, "x_max": 25, "y_max": 25}]}])";
  sb.write("truth.json", boxes);
  r = sb.rwave("eval --pred " + sb.p("truth.json") + " --truth " + sb.p("truth.json") + " --out " + sb.p("rep.json") +
               " --pr-csv " + sb.p("pr.csv"));
  REQUIRE(r.code == 0);
  const auto rep = nlohmann::json::parse(Sandbox::read(sb.p("rep.json")));
  CHECK(rep.dump().find("\"ap\":1.0") != std::string::npos);
  CHECK(fs::exists(sb.p("pr.csv")));
  CHECK(sb.rwave("eval --pred " + sb.p("truth.json") + " --truth " + sb.p("truth.json") + " --iou 1.5").code == 2);
}

TEST_CASE("dataset runs are reproducible") {
  Sandbox sb;
  const std::string common = "dataset --eps 20,30 --mu 1 --t-max 10 --width 96 --height 64 --seed 3";
  REQUIRE(sb.rwave(common + " --jobs 2 --out " + sb.p("d1")).code == 0);
  REQUIRE(sb.rwave(common + " --jobs 1 --out " + sb.p("d2")).code == 0);
  for (const auto* f : {"manifest.json", "annotations/rw_00000.json", "annotations/rw_00001.json",
                        "images/rw_00001.png", "truth_corners.json"}) {
    CHECK_MESSAGE(Sandbox::read(sb.dir / "d1" / f) == Sandbox::read(sb.dir / "d2" / f), f);
  }
  CHECK(sb.rwave("sweep --manifest " + sb.p("d1/manifest.json") + " --delta-t 100 --out " + sb.p("m")).code == 1);
  CHECK(sb.rwave("losses-check").code == 0);
}

}  // TEST_SUITE
