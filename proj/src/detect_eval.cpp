#include "rogue/detect_eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "rogue/errors.hpp"

namespace rogue::eval {
namespace {

auto box_key(const BoundingBox& b) {
  return std::make_tuple(b.x_min(), b.y_min(), b.x_max(), b.y_max());
}

std::vector<std::size_t> evaluation_order(std::span<const DetectionRecord> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = dets[a];
    const auto& db = dets[b];
    if (da.confidence != db.confidence) return da.confidence > db.confidence;
    if (da.image_id != db.image_id) return da.image_id < db.image_id;
    return box_key(da.box) < box_key(db.box);
  });
  return order;
}

double number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw FormatError(std::string("box entry lacks numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min()));
  const double iy = std::max(0.0, std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min()));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<Match> match_detections(std::span<const DetectionRecord> dets,
                                    std::span<const BoundingBox> truths, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("IoU threshold must lie in (0, 1)");
  std::vector<bool> taken(truths.size(), false);
  std::vector<Match> out;
  out.reserve(dets.size());
  for (std::size_t d : evaluation_order(dets)) {
    Match m;
    m.det = d;
    double best = -1.0;
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (taken[t]) continue;
      const double v = iou(dets[d].box, truths[t]);
      if (v >= tau && v > best) {
        best = v;
        m.truth = t;
      }
    }
    if (m.truth) {
      taken[*m.truth] = true;
      m.iou = best;
    }
    out.push_back(m);
  }
  return out;
}

PRCurve average_precision(std::span<const ScoredMatch> matches, std::size_t n_truth,
                          ApInterpolation interp) {
  if (n_truth == 0) throw ValidationError("average precision needs at least one ground-truth box");
  PRCurve curve;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    if (matches[k].true_positive) ++tp;
    PrPoint p;
    p.confidence = matches[k].confidence;
    p.recall = static_cast<double>(tp) / static_cast<double>(n_truth);
    p.precision = static_cast<double>(tp) / static_cast<double>(k + 1);
    curve.points.push_back(p);
  }
  std::vector<double> prec(curve.points.size());
  for (std::size_t k = 0; k < prec.size(); ++k) prec[k] = curve.points[k].precision;
  if (interp == ApInterpolation::Envelope) {
    for (std::size_t k = prec.size(); k-- > 1;) prec[k - 1] = std::max(prec[k - 1], prec[k]);
  }
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < prec.size(); ++k) {
    const double r = curve.points[k].recall;
    curve.ap += (r - prev_recall) * prec[k];
    prev_recall = r;
  }
  curve.ap = std::clamp(curve.ap, 0.0, 1.0);
  return curve;
}

EvalReport evaluate_dataset(std::span<const ImageBoxes> predictions,
                            std::span<const ImageBoxes> truths, double tau,
                            ApInterpolation interp) {
  std::map<std::string, const ImageBoxes*> pred_by_id;
  for (const auto& p : predictions) {
    if (!pred_by_id.emplace(p.image_id, &p).second) {
      throw FormatError("duplicate image_id in predictions: " + p.image_id);
    }
  }
  std::set<std::string> truth_ids;
  EvalReport report;
  std::vector<DetectionRecord> pooled_dets;
  std::vector<bool> pooled_tp;
  std::size_t n_truth_total = 0;
  double macro_sum = 0.0;
  std::size_t macro_n = 0;

  for (const auto& truth : truths) {
    if (!truth_ids.insert(truth.image_id).second) {
      throw FormatError("duplicate image_id in ground truth: " + truth.image_id);
    }
    const auto it = pred_by_id.find(truth.image_id);
    if (it == pred_by_id.end()) {
      report.missing_predictions.push_back(truth.image_id);
      continue;
    }
    const ImageBoxes& pred = *it->second;
    std::vector<DetectionRecord> dets;
    for (std::size_t k = 0; k < pred.boxes.size(); ++k) {
      DetectionRecord d;
      d.box = pred.boxes[k];
      d.confidence = pred.confidence.empty() ? 1.0 : pred.confidence.at(k);
      if (k < pred.soft_iou.size()) d.soft_iou = pred.soft_iou[k];
      d.image_id = pred.image_id;
      dets.push_back(d);
    }
    const auto matches = match_detections(dets, truth.boxes, tau);
    ImageReport img;
    img.image_id = truth.image_id;
    img.n_truth = truth.boxes.size();
    img.n_pred = dets.size();
    std::vector<ScoredMatch> scored;
    for (const auto& m : matches) {
      const bool tp = m.truth.has_value();
      (tp ? img.tp : img.fp) += 1;
      scored.push_back({dets[m.det].confidence, tp});
      pooled_dets.push_back(dets[m.det]);
      pooled_tp.push_back(tp);
    }
    if (img.n_truth > 0) {
      img.ap = average_precision(scored, img.n_truth, interp).ap;
      macro_sum += *img.ap;
      ++macro_n;
    }
    n_truth_total += img.n_truth;
    report.images.push_back(img);
  }
  for (const auto& p : predictions) {
    if (!truth_ids.count(p.image_id)) report.unmatched_ids.push_back(p.image_id);
  }

  std::vector<ScoredMatch> pooled;
  for (std::size_t k : evaluation_order(pooled_dets)) {
    pooled.push_back({pooled_dets[k].confidence, pooled_tp[k]});
  }
  if (n_truth_total == 0) throw ValidationError("ground truth holds no boxes on the evaluated images");
  report.pooled = average_precision(pooled, n_truth_total, interp);
  report.pooled.iou_threshold = tau;
  if (macro_n > 0) report.macro_ap = macro_sum / static_cast<double>(macro_n);
  return report;
}

std::vector<ImageBoxes> parse_box_file(const nlohmann::json& j) {
  if (!j.is_array()) throw FormatError("box file must be a JSON list of images");
  std::vector<ImageBoxes> out;
  for (const auto& entry : j) {
    if (!entry.contains("image_id") || !entry.at("image_id").is_string()) {
      throw FormatError("image entry lacks string field 'image_id'");
    }
    ImageBoxes img;
    img.image_id = entry.at("image_id").get<std::string>();
    bool any_conf = false;
    std::vector<double> conf;
    for (const auto& b : entry.value("boxes", nlohmann::json::array())) {
      const double x0 = number(b, "x_min"), y0 = number(b, "y_min");
      const double x1 = number(b, "x_max"), y1 = number(b, "y_max");
      if (!(x1 > x0) || !(y1 > y0)) throw FormatError("box with non-positive extent in " + img.image_id);
      img.boxes.push_back(BoundingBox::from_corners(x0, y0, x1, y1));
      if (b.contains("confidence")) {
        const double c = number(b, "confidence");
        if (c < 0.0 || c > 1.0) throw FormatError("confidence outside [0, 1] in " + img.image_id);
        conf.push_back(c);
        any_conf = true;
      } else {
        conf.push_back(1.0);
      }
      if (b.contains("soft_iou")) {
        img.soft_iou.emplace_back(number(b, "soft_iou"));
      } else {
        img.soft_iou.emplace_back(std::nullopt);
      }
    }
    if (any_conf) img.confidence = std::move(conf);
    out.push_back(std::move(img));
  }
  return out;
}

nlohmann::json box_file_json(std::span<const ImageBoxes> images) {
  auto out = nlohmann::json::array();
  for (const auto& img : images) {
    auto boxes = nlohmann::json::array();
    for (std::size_t k = 0; k < img.boxes.size(); ++k) {
      const auto& b = img.boxes[k];
      nlohmann::json jb = {{"x_min", b.x_min()}, {"y_min", b.y_min()},
                           {"x_max", b.x_max()}, {"y_max", b.y_max()}};
      if (!img.confidence.empty()) jb["confidence"] = img.confidence[k];
      boxes.push_back(jb);
    }
    out.push_back({{"image_id", img.image_id}, {"boxes", boxes}});
  }
  return out;
}

nlohmann::json report_json(const EvalReport& report, ApInterpolation interp) {
  nlohmann::json j;
  j["iou_threshold"] = report.pooled.iou_threshold;
  j["interpolation"] = interp == ApInterpolation::Step ? "step" : "envelope";
  j["ap"] = report.pooled.ap;
  j["macro_ap"] = report.macro_ap ? nlohmann::json(*report.macro_ap) : nlohmann::json(nullptr);
  std::size_t tp = 0, fp = 0, n_truth = 0;
  auto per_image = nlohmann::json::array();
  for (const auto& img : report.images) {
    tp += img.tp;
    fp += img.fp;
    n_truth += img.n_truth;
    per_image.push_back({{"image_id", img.image_id},
                         {"n_truth", img.n_truth},
                         {"n_pred", img.n_pred},
                         {"tp", img.tp},
                         {"fp", img.fp},
                         {"ap", img.ap ? nlohmann::json(*img.ap) : nlohmann::json(nullptr)}});
  }
  j["n_images"] = report.images.size();
  j["n_truth"] = n_truth;
  j["tp"] = tp;
  j["fp"] = fp;
  j["per_image"] = per_image;
  j["missing_predictions"] = report.missing_predictions;
  j["unmatched_ids"] = report.unmatched_ids;
  return j;
}

std::string pr_curve_csv(const PRCurve& curve) {
  std::ostringstream os;
  os.precision(17);
  os << "confidence,precision,recall\n";
  for (const auto& p : curve.points) os << p.confidence << ',' << p.precision << ',' << p.recall << '\n';
  return os.str();
}

}  // namespace rogue::eval
