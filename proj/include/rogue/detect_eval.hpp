#pragma once

// Detection evaluation: IoU, greedy confidence-ordered matching, precision/recall
// and average precision at a fixed IoU threshold.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rogue/coords.hpp"

namespace rogue::eval {

struct DetectionRecord {
  BoundingBox box;
  double confidence = 1.0;
  std::optional<double> soft_iou;
  std::string image_id;
};

double iou(const BoundingBox& a, const BoundingBox& b);

struct Match {
  std::size_t det = 0;
  std::optional<std::size_t> truth;
  double iou = 0.0;
};

// Detections are visited by descending confidence; equal confidences are
// ordered by box corners so the result does not depend on input order.  Each
// detection takes the unmatched truth with the highest IoU >= tau.
std::vector<Match> match_detections(std::span<const DetectionRecord> dets,
                                    std::span<const BoundingBox> truths, double tau);

struct ScoredMatch {
  double confidence = 0.0;
  bool true_positive = false;
};

enum class ApInterpolation {
  // Sum of precision at each recall increment (no envelope).
  Step,
  // Precision replaced by its maximum at any higher recall.
  Envelope,
};

struct PrPoint {
  double confidence = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct PRCurve {
  std::vector<PrPoint> points;
  double ap = 0.0;
  double iou_threshold = 0.5;
};

// matches must already be in evaluation order.
PRCurve average_precision(std::span<const ScoredMatch> matches, std::size_t n_truth,
                          ApInterpolation interp = ApInterpolation::Step);

struct ImageBoxes {
  std::string image_id;
  std::vector<BoundingBox> boxes;
  std::vector<double> confidence;  // empty means 1.0 for every box
  std::vector<std::optional<double>> soft_iou;
};

struct ImageReport {
  std::string image_id;
  std::size_t n_truth = 0;
  std::size_t n_pred = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::optional<double> ap;
};

struct EvalReport {
  PRCurve pooled;
  std::vector<ImageReport> images;
  std::optional<double> macro_ap;
  std::vector<std::string> missing_predictions;  // truth ids without predictions
  std::vector<std::string> unmatched_ids;        // prediction ids without truth
};

// Pooled (micro) AP over the images present in both lists.
EvalReport evaluate_dataset(std::span<const ImageBoxes> predictions,
                            std::span<const ImageBoxes> truths, double tau,
                            ApInterpolation interp = ApInterpolation::Step);

// `[{ "image_id": str, "boxes": [{"x_min","y_min","x_max","y_max","confidence"?}] }]`
std::vector<ImageBoxes> parse_box_file(const nlohmann::json& j);
nlohmann::json box_file_json(std::span<const ImageBoxes> images);

nlohmann::json report_json(const EvalReport& report, ApInterpolation interp);
// `confidence,precision,recall`
std::string pr_curve_csv(const PRCurve& curve);

}  // namespace rogue::eval
