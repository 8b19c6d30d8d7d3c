#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "rogue/detect_eval.hpp"
#include "rogue/errors.hpp"

using namespace rogue;
using namespace rogue::eval;

namespace {

BoundingBox box(double x0, double y0, double x1, double y1) {
  return BoundingBox::from_corners(x0, y0, x1, y1);
}

DetectionRecord det(const BoundingBox& b, double conf, const std::string& id = "a") {
  DetectionRecord d;
  d.box = b;
  d.confidence = conf;
  d.image_id = id;
  return d;
}

std::vector<ScoredMatch> scored(std::span<const DetectionRecord> dets, const std::vector<Match>& ms) {
  std::vector<ScoredMatch> out;
  for (const auto& m : ms) out.push_back({dets[m.det].confidence, m.truth.has_value()});
  return out;
}

}  // namespace

TEST_SUITE("detect_eval") {

TEST_CASE("iou") {
  const auto a = box(0, 0, 10, 10);
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, box(20, 20, 30, 30)) == 0.0);
  CHECK(iou(a, box(10, 0, 20, 10)) == 0.0);
  CHECK(iou(a, box(5, 0, 15, 10)) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(a, box(0, 0, 5, 10)) == doctest::Approx(0.5));
}

TEST_CASE("hand-worked average precision") {
  const std::vector<BoundingBox> truths{box(0, 0, 10, 10), box(20, 0, 30, 10), box(40, 0, 50, 10)};
  const std::vector<DetectionRecord> dets{det(box(0, 0, 10, 10), 0.9), det(box(60, 0, 70, 10), 0.8),
                                          det(box(20, 0, 30, 10), 0.7), det(box(41, 0, 51, 10), 0.6)};
  const auto ms = match_detections(dets, truths, 0.5);
  const auto sm = scored(dets, ms);
  REQUIRE(sm.size() == 4);
  CHECK(sm[0].true_positive);
  CHECK_FALSE(sm[1].true_positive);
  CHECK(sm[2].true_positive);
  CHECK(sm[3].true_positive);
  const auto step = average_precision(sm, 3);
  CHECK(std::abs(step.ap - (1.0 + 2.0 / 3.0 + 0.75) / 3.0) < 1e-12);
  CHECK(std::abs(step.ap - 0.8056) < 1e-4);
  CHECK(std::abs(average_precision(sm, 3, ApInterpolation::Envelope).ap - 2.5 / 3.0) < 1e-12);
  CHECK(step.points.back().recall == 1.0);
  CHECK(step.points.back().precision == 0.75);

  // Predictions equal to the truths.
  std::vector<DetectionRecord> perfect;
  for (const auto& t : truths) perfect.push_back(det(t, 1.0));
  CHECK(average_precision(scored(perfect, match_detections(perfect, truths, 0.5)), 3).ap == 1.0);

  CHECK_THROWS_AS(match_detections(dets, truths, 0.0), ValidationError);
  CHECK_THROWS_AS(match_detections(dets, truths, 1.0), ValidationError);
  CHECK_THROWS_AS(average_precision(sm, 0), ValidationError);
}

TEST_CASE("matching takes the best unclaimed truth") {
  const std::vector<BoundingBox> truths{box(0, 0, 10, 10), box(2, 0, 12, 10)};
  const std::vector<DetectionRecord> dets{det(box(2, 0, 12, 10), 0.9), det(box(1, 0, 11, 10), 0.5)};
  const auto ms = match_detections(dets, truths, 0.5);
  REQUIRE(ms[0].truth.has_value());
  CHECK(*ms[0].truth == 1);
  REQUIRE(ms[1].truth.has_value());
  CHECK(*ms[1].truth == 0);
}

TEST_CASE("random scenes against the direct definition") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> jitter(-1.5, 1.5), conf(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 12), pick(0, 11);
  std::bernoulli_distribution noise(0.3), coarse(0.5);
  for (int trial = 0; trial < 300; ++trial) {
    // Truths 40 px apart: each detection overlaps at most one of them.
    const int nt = count(rng);
    std::vector<BoundingBox> truths;
    for (int k = 0; k < nt; ++k) truths.push_back(box(40.0 * k, 0, 40.0 * k + 20, 20));
    std::vector<DetectionRecord> dets;
    std::vector<int> target;
    const int nd = count(rng);
    for (int k = 0; k < nd; ++k) {
      // Coarse confidences force ties.
      const double c = coarse(rng) ? std::round(conf(rng) * 4) / 4 : conf(rng);
      if (noise(rng)) {
        dets.push_back(det(box(1000 + 30.0 * k, 0, 1020 + 30.0 * k, 20), c));
        target.push_back(-1);
      } else {
        const int t = pick(rng) % nt;
        const double dx = jitter(rng), dy = jitter(rng);
        dets.push_back(det(box(40.0 * t + dx, dy, 40.0 * t + 20 + dx, 20 + dy), c));
        target.push_back(t);
      }
    }
    const auto ms = match_detections(dets, truths, 0.5);
    // Oracle: walk the same order, a detection scores when its only candidate is free.
    std::vector<bool> claimed(truths.size(), false), tp;
    for (const auto& m : ms) {
      const int t = target[m.det];
      const bool hit = t >= 0 && !claimed[t];
      if (hit) claimed[t] = true;
      tp.push_back(hit);
      CHECK(m.truth.has_value() == hit);
    }
    const auto ap = average_precision(scored(dets, ms), truths.size()).ap;
    CHECK(std::abs(ap - oracle::direct_ap(tp, truths.size())) < 1e-12);

    // Input order does not matter.
    auto shuffled = dets;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto ap2 = average_precision(scored(shuffled, match_detections(shuffled, truths, 0.5)), truths.size()).ap;
    CHECK(ap2 == ap);
    CHECK(ap >= 0.0);
    CHECK(ap <= 1.0);
  }
}

TEST_CASE("dataset evaluation and box files") {
  std::vector<ImageBoxes> truth{{"img1", {box(0, 0, 10, 10), box(20, 0, 30, 10)}, {}, {}},
                                {"img2", {box(5, 5, 15, 15)}, {}, {}},
                                {"img3", {box(0, 0, 4, 4)}, {}, {}}};
  std::vector<ImageBoxes> pred{{"img1", {box(0, 0, 10, 10)}, {0.9}, {0.8}},
                               {"img2", {box(5, 5, 15, 15), box(50, 50, 60, 60)}, {0.8, 0.7}, {}},
                               {"extra", {box(0, 0, 1, 1)}, {0.5}, {}}};
  const auto rep = evaluate_dataset(pred, truth, 0.5);
  CHECK(rep.missing_predictions == std::vector<std::string>{"img3"});
  CHECK(rep.unmatched_ids == std::vector<std::string>{"extra"});
  // Pooled ranks: TP (0.9), TP (0.8), FP (0.7) over 3 truths in img1 and img2.
  CHECK(rep.pooled.ap == doctest::Approx(2.0 / 3.0));
  REQUIRE(rep.images.size() >= 2);

  const auto j = box_file_json(pred);
  const auto back = parse_box_file(nlohmann::json::parse(j.dump()));
  REQUIRE(back.size() == 3);
  CHECK(back[1].boxes.size() == 2);
  CHECK(back[1].confidence == std::vector<double>{0.8, 0.7});
  CHECK(box_file_json(back) == j);

  auto dup = pred;
  dup.push_back(pred[0]);
  CHECK_THROWS_AS(evaluate_dataset(dup, truth, 0.5), FormatError);
  CHECK_THROWS_AS(parse_box_file(nlohmann::json::parse(R"([{"image_id": "a", "boxes": [{"x_min": 0}]}])")),
                  FormatError);

  const auto csv = pr_curve_csv(rep.pooled);
  CHECK(csv.rfind("confidence,precision,recall\n", 0) == 0);
  const auto rj = report_json(rep, ApInterpolation::Step);
  CHECK(rj.dump().find("img3") != std::string::npos);
}

}  // TEST_SUITE
