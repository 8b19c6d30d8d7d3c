#pragma once

// Reference detector training objectives evaluated on per-anchor outputs
// (confidence, offsets, predicted soft IoU).  No network, no optimizer.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rogue::losses {

using Vec4 = std::array<double, 4>;

// Keeps log() finite when a probability hits 0 or 1.
inline constexpr double kProbClamp = 1e-12;

struct AnchorLabel {
  int y = 0;      // 0 or 1
  Vec4 d{};       // ground-truth offsets (dx, dy, dw, dh)
  double iou = 0.0;
  void validate() const;
};

struct AnchorPrediction {
  double p = 0.5;  // confidence
  Vec4 d_hat{};
  double s = 0.5;  // predicted soft IoU
};

struct FocalParams {
  double alpha = 0.25;
  double gamma = 2.0;
  void validate() const;
};

double sigmoid_confidence(double z);

// -sum[ y a (1-p)^g log p + (1-y)(1-a) p^g log(1-p) ]
double focal_loss(std::span<const AnchorPrediction> preds, std::span<const AnchorLabel> labels,
                  const FocalParams& fp = {}, double clamp = kProbClamp);

// sum y Q(|d_hat - d|), Q(r) = r^2/2 for r < 1 else r - 1/2; r is the 4-vector norm.
double smooth_l1_box_loss(std::span<const AnchorPrediction> preds,
                          std::span<const AnchorLabel> labels);

// -sum[ iou log s + (1-iou) log(1-s) ]
double soft_iou_loss(std::span<const AnchorPrediction> preds, std::span<const AnchorLabel> labels,
                     double clamp = kProbClamp);

double overall_loss(double class_loss, double box_loss, double siou_loss);
// Average of per-image losses over the training set.
double dataset_mean(std::span<const double> per_image);

int decision_rule(double p);

// Per-anchor derivatives.
double focal_grad_p(const AnchorPrediction& pred, const AnchorLabel& label,
                    const FocalParams& fp = {}, double clamp = kProbClamp);
Vec4 smooth_l1_grad(const AnchorPrediction& pred, const AnchorLabel& label);
double soft_iou_grad_s(const AnchorPrediction& pred, const AnchorLabel& label,
                       double clamp = kProbClamp);

struct CenterBox {
  double cx = 0.0, cy = 0.0, w = 1.0, h = 1.0;
};

// Center shifts in anchor units, log ratios for extents.
Vec4 encode_offsets(const CenterBox& box, const CenterBox& anchor);
CenterBox decode_offsets(const Vec4& d, const CenterBox& anchor);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Hand examples, gradient checks against central differences, branch
// continuity and the gamma=0 reduction.
std::vector<CheckResult> run_self_check(std::uint64_t seed = 42);

}  // namespace rogue::losses
