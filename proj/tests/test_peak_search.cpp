#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "rogue/errors.hpp"
#include "rogue/peak_search.hpp"

using namespace rogue;
using namespace rogue::peaks;

namespace {

std::vector<std::pair<std::size_t, std::size_t>> found(const nlse::AmplitudeMatrix& m,
                                                       const PeakSearchParams& p) {
  const auto map = local_max_pass(m, threshold_pass(m, p), p);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& pk : collect_peaks(m, map)) out.emplace_back(pk.i, pk.j);
  return out;
}

}  // namespace

TEST_SUITE("peak_search") {

TEST_CASE("threshold pass") {
  PeakSearchParams p;
  auto ones = oracle::matrix(8, 9, 1.0);
  CHECK(threshold_pass(ones, p).count(1) == 0);

  auto m = oracle::matrix(3, 3, 1.0);
  m.at(1, 1) = 1.7;  // inclusive boundary
  const auto map = threshold_pass(m, p);
  CHECK(map.at(1, 1) == 1);
  CHECK(map.count(1) == 1);

  const auto pm = oracle::sampled_peregrine(5.0, 0.1);
  const auto pmap = threshold_pass(pm, p);
  for (std::size_t i = 0; i < pm.nt; ++i) {
    for (std::size_t j = 0; j < pm.nx; ++j) {
      const bool above = std::abs(nlse::peregrine(pm.x(j), pm.time(i))) >= 1.7;
      CHECK(static_cast<bool>(pmap.at(i, j)) == above);
      if (pmap.at(i, j)) CHECK(std::hypot(pm.x(j), pm.time(i)) < 1.0);
    }
  }
}

TEST_CASE("local maximum pass") {
  PeakSearchParams p;
  auto m = oracle::matrix(10, 10, 1.0);
  m.at(4, 4) = 2.0;
  m.at(5, 6) = 2.0;  // Chebyshev distance 2
  auto map = local_max_pass(m, threshold_pass(m, p), p);
  CHECK(map.at(4, 4) == 2);
  CHECK(map.at(5, 6) == 1);

  auto iso = oracle::matrix(7, 7, 0.5);
  iso.at(3, 3) = 1.8;
  map = local_max_pass(iso, threshold_pass(iso, p), p);
  CHECK(map.at(3, 3) == 2);
  CHECK(map.count(2) == 1);

  // A plateau yields one peak.
  auto plateau = oracle::matrix(6, 6, 1.0);
  for (std::size_t i = 1; i < 4; ++i)
    for (std::size_t j = 1; j < 4; ++j) plateau.at(i, j) = 2.2;
  CHECK(found(plateau, p) == std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}});

  // Euclidean radius 2 ignores the (2, 2) corner of the square window.
  PeakSearchParams e = p;
  e.metric = Metric::Euclidean;
  auto diag = oracle::matrix(6, 6, 1.0);
  diag.at(1, 1) = 2.0;
  diag.at(3, 3) = 2.5;
  CHECK(found(diag, p).size() == 1);
  CHECK(found(diag, e).size() == 2);
}

TEST_CASE("brute-force equivalence on random matrices") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(1.0, 3.5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = oracle::random_matrix(rng);
    PeakSearchParams p;
    p.radius = trial < 25 ? 2.0 : radius(rng);
    CHECK(found(m, p) == oracle::brute_force_peaks(m, p.threshold(), p.radius));
    p.metric = Metric::Euclidean;
    CHECK(found(m, p) == oracle::brute_force_peaks(m, p.threshold(), p.radius, true));
  }
}

TEST_CASE("sampled peregrine gives one unit") {
  const auto m = oracle::sampled_peregrine(5.0, 0.1);
  const auto cmap = CoordMap::fit(m.nt, m.nx, 256, 256);
  const auto r = peak_search(m, PeakSearchParams{}, cmap);
  REQUIRE(r.peaks.size() == 1);
  CHECK(r.boxes.size() == 1);
  CHECK(r.peaks[0].i == 50);
  CHECK(r.peaks[0].j == 50);
  CHECK(r.peaks[0].amplitude == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.map.count(2) == 1);
}

TEST_CASE("boxes") {
  PeakSearchParams p;
  auto m = oracle::matrix(201, 201, 1.0);
  m.at(100, 100) = 2.0;
  m.at(0, 0) = 2.0;
  const auto cmap = CoordMap::identity(200, 200);
  CHECK_THROWS_AS(peak_search(m, p, cmap), ValidationError);  // column 200 is off-image

  auto m2 = oracle::matrix(200, 200, 1.0);
  m2.at(100, 100) = 2.0;
  m2.at(0, 0) = 2.0;
  const auto r = peak_search(m2, p, cmap);
  REQUIRE(r.boxes.size() == 2);
  // Lexicographic order: corner first.
  CHECK(r.boxes[0].x_min() == 0.0);
  CHECK(r.boxes[0].y_min() == 0.0);
  CHECK(r.boxes[0].w == 10.0);
  CHECK(r.boxes[0].h == 10.0);
  CHECK(r.boxes[1].cx == 100.0);
  CHECK(r.boxes[1].cy == 100.0);
  CHECK(r.boxes[1].w == 20.0);
  CHECK(r.boxes[1].h == 20.0);
  for (const auto& b : r.boxes) {
    CHECK(b.x_min() >= 0.0);
    CHECK(b.y_max() <= 200.0);
  }

  const auto flat = oracle::matrix(50, 50, 1.0);
  CHECK(peak_search(flat, p, CoordMap::identity(50, 50)).boxes.empty());
}

TEST_CASE("parameter validation") {
  PeakSearchParams p;
  p.eta = 1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.radius = 0.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.box_px = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("properties: monotone in eta, idempotent, translation, determinism") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = oracle::random_matrix(rng, 96);
    PeakSearchParams lo, hi;
    hi.eta = 2.2;
    const auto a = found(m, lo);
    CHECK(found(m, hi).size() <= a.size());
    CHECK(found(m, lo) == a);

    // Masked copy keeps the same peaks.
    auto masked = m;
    const auto map = threshold_pass(m, lo);
    for (std::size_t k = 0; k < m.a.size(); ++k)
      if (map.b[k] == 0) masked.a[k] = 0.0;
    CHECK(found(masked, lo) == a);

    // Zero padding shifts every peak by the offset.
    auto padded = oracle::matrix(m.nt + 7, m.nx + 4, 0.0);
    for (std::size_t i = 0; i < m.nt; ++i)
      for (std::size_t j = 0; j < m.nx; ++j) padded.at(i + 5, j + 3) = m.at(i, j);
    auto shifted = a;
    for (auto& [i, j] : shifted) i += 5, j += 3;
    CHECK(found(padded, lo) == shifted);
  }
}

TEST_CASE("gaussian run matches brute force") {
  nlse::SimGrid g;
  g.t_max = 15.0;
  const nlse::GaussParams gp{20.0, 2.0};
  const auto run = nlse::evolve_record(g, nlse::gaussian_initial(g, gp), {}, gp);
  const auto& m = run.amplitude;
  PeakSearchParams p;
  const auto r = peak_search(m, p, CoordMap::fit(m.nt, m.nx, 512, 512));
  const auto oracle_peaks = oracle::brute_force_peaks(m, p.threshold(), p.radius);
  CHECK(r.peaks.size() == oracle_peaks.size());
  CHECK(r.boxes.size() == oracle_peaks.size());
  CHECK(found(m, p) == oracle_peaks);
  CHECK(!oracle_peaks.empty());
}

}  // TEST_SUITE
