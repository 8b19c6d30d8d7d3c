#include "rogue/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rogue/errors.hpp"

namespace rogue::losses {
namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw ValidationError("predictions and labels differ in length");
}

double clamp_prob(double p, double c) { return std::clamp(p, c, 1.0 - c); }

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0, 1]");
}

double norm4(const Vec4& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
}

Vec4 diff(const AnchorPrediction& pred, const AnchorLabel& label) {
  Vec4 r;
  for (int k = 0; k < 4; ++k) r[k] = pred.d_hat[k] - label.d[k];
  return r;
}

double smooth_l1(double r) { return r < 1.0 ? 0.5 * r * r : r - 0.5; }

double focal_term(double p, const AnchorLabel& l, const FocalParams& fp, double c) {
  p = clamp_prob(p, c);
  if (l.y == 1) return -fp.alpha * std::pow(1.0 - p, fp.gamma) * std::log(p);
  return -(1.0 - fp.alpha) * std::pow(p, fp.gamma) * std::log(1.0 - p);
}

double siou_term(double s, double iou, double c) {
  s = clamp_prob(s, c);
  return -(iou * std::log(s) + (1.0 - iou) * std::log(1.0 - s));
}

// ---- self check helpers ----

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

CheckResult near(std::string name, double got, double want, double tol) {
  const double err = std::abs(got - want);
  return {std::move(name), err <= tol, "got " + fmt(got) + ", want " + fmt(want) + ", |err| " + fmt(err)};
}

double rel_err(double a, double b) {
  const double den = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / den;
}

}  // namespace

void AnchorLabel::validate() const {
  if (y != 0 && y != 1) throw ValidationError("anchor label y must be 0 or 1");
  if (!(iou >= 0.0 && iou <= 1.0)) throw ValidationError("anchor IoU must lie in [0, 1]");
}

void FocalParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("focal alpha must lie in (0, 1)");
  if (!(gamma >= 0.0)) throw ValidationError("focal gamma must be >= 0");
}

double sigmoid_confidence(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double focal_loss(std::span<const AnchorPrediction> preds, std::span<const AnchorLabel> labels,
                  const FocalParams& fp, double clamp) {
  check_lengths(preds.size(), labels.size());
  fp.validate();
  double sum = 0.0;
  for (std::size_t a = 0; a < preds.size(); ++a) {
    labels[a].validate();
    check_prob(preds[a].p, "confidence p");
    sum += focal_term(preds[a].p, labels[a], fp, clamp);
  }
  return sum;
}

double smooth_l1_box_loss(std::span<const AnchorPrediction> preds,
                          std::span<const AnchorLabel> labels) {
  check_lengths(preds.size(), labels.size());
  double sum = 0.0;
  for (std::size_t a = 0; a < preds.size(); ++a) {
    labels[a].validate();
    if (labels[a].y == 0) continue;
    sum += smooth_l1(norm4(diff(preds[a], labels[a])));
  }
  return sum;
}

double soft_iou_loss(std::span<const AnchorPrediction> preds, std::span<const AnchorLabel> labels,
                     double clamp) {
  check_lengths(preds.size(), labels.size());
  double sum = 0.0;
  for (std::size_t a = 0; a < preds.size(); ++a) {
    labels[a].validate();
    check_prob(preds[a].s, "soft IoU s");
    sum += siou_term(preds[a].s, labels[a].iou, clamp);
  }
  return sum;
}

double overall_loss(double class_loss, double box_loss, double siou_loss) {
  return class_loss + box_loss + siou_loss;
}

double dataset_mean(std::span<const double> per_image) {
  if (per_image.empty()) throw ValidationError("dataset mean over an empty training set");
  return std::accumulate(per_image.begin(), per_image.end(), 0.0) /
         static_cast<double>(per_image.size());
}

int decision_rule(double p) {
  check_prob(p, "confidence p");
  return p >= 0.5 ? 1 : 0;
}

double focal_grad_p(const AnchorPrediction& pred, const AnchorLabel& label, const FocalParams& fp,
                    double clamp) {
  const double p = clamp_prob(pred.p, clamp);
  const double g = fp.gamma;
  if (label.y == 1) {
    const double q = 1.0 - p;
    const double dpow = g == 0.0 ? 0.0 : g * std::pow(q, g - 1.0);
    return -fp.alpha * (-dpow * std::log(p) + std::pow(q, g) / p);
  }
  const double dpow = g == 0.0 ? 0.0 : g * std::pow(p, g - 1.0);
  return -(1.0 - fp.alpha) * (dpow * std::log(1.0 - p) - std::pow(p, g) / (1.0 - p));
}

Vec4 smooth_l1_grad(const AnchorPrediction& pred, const AnchorLabel& label) {
  Vec4 g{};
  if (label.y == 0) return g;
  const Vec4 r = diff(pred, label);
  const double n = norm4(r);
  if (n == 0.0) return g;
  const double scale = n < 1.0 ? 1.0 : 1.0 / n;
  for (int k = 0; k < 4; ++k) g[k] = scale * r[k];
  return g;
}

double soft_iou_grad_s(const AnchorPrediction& pred, const AnchorLabel& label, double clamp) {
  const double s = clamp_prob(pred.s, clamp);
  return -(label.iou / s - (1.0 - label.iou) / (1.0 - s));
}

Vec4 encode_offsets(const CenterBox& box, const CenterBox& anchor) {
  if (!(box.w > 0.0 && box.h > 0.0 && anchor.w > 0.0 && anchor.h > 0.0)) {
    throw ValidationError("box and anchor extents must be > 0");
  }
  return {(box.cx - anchor.cx) / anchor.w, (box.cy - anchor.cy) / anchor.h,
          std::log(box.w / anchor.w), std::log(box.h / anchor.h)};
}

CenterBox decode_offsets(const Vec4& d, const CenterBox& anchor) {
  if (!(anchor.w > 0.0 && anchor.h > 0.0)) throw ValidationError("anchor extents must be > 0");
  return {anchor.cx + d[0] * anchor.w, anchor.cy + d[1] * anchor.h, anchor.w * std::exp(d[2]),
          anchor.h * std::exp(d[3])};
}

std::vector<CheckResult> run_self_check(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const double ln2 = std::log(2.0);

  out.push_back(near("sigmoid(0) = 0.5", sigmoid_confidence(0.0), 0.5, 1e-6));
  out.push_back(near("sigmoid(2) = 0.880797", sigmoid_confidence(2.0), 0.880797, 1e-6));
  out.push_back(near("sigmoid(700) -> 1", sigmoid_confidence(700.0), 1.0, 1e-6));
  {
    const double v = sigmoid_confidence(-700.0);
    out.push_back({"sigmoid(-700) finite and >= 0", std::isfinite(v) && v >= 0.0 && v < 1e-300,
                   "got " + fmt(v)});
  }

  const FocalParams fp;
  auto one = [](double p, int y) {
    AnchorPrediction pr;
    pr.p = p;
    AnchorLabel lb;
    lb.y = y;
    return std::make_pair(pr, lb);
  };
  {
    auto [pr, lb] = one(0.5, 1);
    out.push_back(near("focal y=1 p=0.5 = 0.25*0.25*ln2 = 0.043322",
                       focal_loss({&pr, 1}, {&lb, 1}, fp), 0.043322, 1e-6));
    pr.p = 1.0;
    out.push_back(near("focal y=1 p=1 -> 0", focal_loss({&pr, 1}, {&lb, 1}, fp), 0.0, 1e-6));
  }

  auto with_norm = [](double r, int y) {
    AnchorPrediction pr;
    pr.d_hat = {r / 2.0, -r / 2.0, r / 2.0, -r / 2.0};
    AnchorLabel lb;
    lb.y = y;
    return std::make_pair(pr, lb);
  };
  {
    auto [pr, lb] = with_norm(0.5, 1);
    out.push_back(near("smooth-L1 |r|=0.5 = 0.125", smooth_l1_box_loss({&pr, 1}, {&lb, 1}), 0.125, 1e-6));
  }
  {
    auto [pr, lb] = with_norm(2.0, 1);
    out.push_back(near("smooth-L1 |r|=2 = 1.5", smooth_l1_box_loss({&pr, 1}, {&lb, 1}), 1.5, 1e-6));
  }
  {
    auto [pr, lb] = with_norm(7.0, 0);
    out.push_back(near("smooth-L1 y=0 = 0", smooth_l1_box_loss({&pr, 1}, {&lb, 1}), 0.0, 1e-6));
  }
  {
    AnchorPrediction pr;
    pr.s = 0.5;
    AnchorLabel lb;
    lb.iou = 0.5;
    out.push_back(near("soft-IoU s=IoU=0.5 = ln2", soft_iou_loss({&pr, 1}, {&lb, 1}), ln2, 1e-6));
    pr.s = 0.6;
    lb.iou = 0.8;
    const double v = soft_iou_loss({&pr, 1}, {&lb, 1});
    out.push_back(near("soft-IoU IoU=0.8 s=0.6 = -(0.8 ln0.6 + 0.2 ln0.4)", v,
                       -(0.8 * std::log(0.6) + 0.2 * std::log(0.4)), 1e-6));
    out.push_back(near("soft-IoU IoU=0.8 s=0.6 rounds to 0.59192", v, 0.59192, 0.5e-5));
  }
  out.push_back(near("overall(0,0,0) = 0", overall_loss(0, 0, 0), 0.0, 1e-6));
  out.push_back(near("overall(1,2,3) = 6", overall_loss(1, 2, 3), 6.0, 1e-6));
  {
    const std::vector<double> per{0.2, 0.4};
    out.push_back(near("dataset mean(0.2, 0.4) = 0.3", dataset_mean(per), 0.3, 1e-6));
  }
  out.push_back({"decision(0.5) = 1", decision_rule(0.5) == 1, ""});
  out.push_back({"decision(0.49) = 0", decision_rule(0.49) == 0, ""});
  out.push_back({"decision(1.0) = 1", decision_rule(1.0) == 1, ""});

  // Randomized anchors for gradient and identity checks.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> prob(0.05, 0.95);
  std::uniform_real_distribution<double> off(-1.5, 1.5);
  const std::size_t n_anchor = 100;
  std::vector<AnchorPrediction> preds(n_anchor);
  std::vector<AnchorLabel> labels(n_anchor);
  for (std::size_t a = 0; a < n_anchor; ++a) {
    labels[a].y = unit(rng) < 0.5 ? 1 : 0;
    labels[a].iou = unit(rng);
    for (int k = 0; k < 4; ++k) {
      labels[a].d[k] = off(rng);
      preds[a].d_hat[k] = off(rng);
    }
    preds[a].p = prob(rng);
    preds[a].s = prob(rng);
  }
  // gradient checks always use y=1 for the box term so every anchor is exercised
  std::vector<AnchorLabel> box_labels = labels;
  for (auto& l : box_labels) l.y = 1;

  const double h = 1e-6;
  double worst_focal = 0.0, worst_box = 0.0, worst_siou = 0.0;
  for (std::size_t a = 0; a < n_anchor; ++a) {
    auto fd = [&](auto loss, auto field) {
      auto plus = preds, minus = preds;
      field(plus[a]) += h;
      field(minus[a]) -= h;
      return (loss(plus) - loss(minus)) / (2.0 * h);
    };
    const double gf = fd([&](auto& p) { return focal_loss(p, labels, fp); },
                         [](AnchorPrediction& p) -> double& { return p.p; });
    worst_focal = std::max(worst_focal, rel_err(focal_grad_p(preds[a], labels[a], fp), gf));
    const double gs = fd([&](auto& p) { return soft_iou_loss(p, labels); },
                         [](AnchorPrediction& p) -> double& { return p.s; });
    worst_siou = std::max(worst_siou, rel_err(soft_iou_grad_s(preds[a], labels[a]), gs));
    const Vec4 gb = smooth_l1_grad(preds[a], box_labels[a]);
    for (int k = 0; k < 4; ++k) {
      const double g = fd([&](auto& p) { return smooth_l1_box_loss(p, box_labels); },
                          [k](AnchorPrediction& p) -> double& { return p.d_hat[k]; });
      worst_box = std::max(worst_box, rel_err(gb[k], g));
    }
  }
  out.push_back({"focal dL/dp vs central difference (100 anchors)", worst_focal <= 1e-5,
                 "max rel err " + fmt(worst_focal)});
  out.push_back({"smooth-L1 dL/dd_hat vs central difference (100 anchors)", worst_box <= 1e-5,
                 "max rel err " + fmt(worst_box)});
  out.push_back({"soft-IoU dL/ds vs central difference (100 anchors)", worst_siou <= 1e-5,
                 "max rel err " + fmt(worst_siou)});

  {
    // Value and slope on both sides of |r| = 1.
    const double quad_v = 0.5 * 1.0 * 1.0;
    const double lin_v = 1.0 - 0.5;
    const double quad_slope = 1.0;
    const double lin_slope = 1.0;
    auto [pr, lb] = with_norm(1.0, 1);
    const double at = smooth_l1_box_loss({&pr, 1}, {&lb, 1});
    const Vec4 g = smooth_l1_grad(pr, lb);
    const double slope = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
    auto [pl, ll] = with_norm(std::nextafter(1.0, 0.0), 1);
    const Vec4 gl = smooth_l1_grad(pl, ll);
    const double slope_below = std::sqrt(gl[0] * gl[0] + gl[1] * gl[1] + gl[2] * gl[2] + gl[3] * gl[3]);
    const double err = std::max({std::abs(quad_v - lin_v), std::abs(at - 0.5),
                                 std::abs(quad_slope - lin_slope), std::abs(slope - 1.0),
                                 std::abs(slope_below - 1.0)});
    out.push_back({"smooth-L1 continuity at |r| = 1", err <= 1e-12, "max deviation " + fmt(err)});
  }
  {
    FocalParams half{0.5, 0.0};
    double bce = 0.0;
    for (std::size_t a = 0; a < n_anchor; ++a) {
      const double p = preds[a].p;
      bce -= labels[a].y * std::log(p) + (1 - labels[a].y) * std::log(1.0 - p);
    }
    const double f = focal_loss(preds, labels, half);
    out.push_back(near("focal(gamma=0, alpha=0.5) = 0.5 * BCE", f, 0.5 * bce, 1e-12));
  }
  {
    double lo = 0.0;
    std::uniform_real_distribution<double> anyp(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      auto p2 = preds;
      for (auto& p : p2) {
        p.p = anyp(rng);
        p.s = anyp(rng);
      }
      lo = std::min({lo, focal_loss(p2, labels, fp), smooth_l1_box_loss(p2, labels),
                     soft_iou_loss(p2, labels)});
    }
    out.push_back({"losses are non-negative", lo >= 0.0, "min " + fmt(lo)});
  }
  {
    auto p2 = preds;
    auto l2 = labels;
    std::vector<std::size_t> perm(n_anchor);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t a = 0; a < n_anchor; ++a) {
      p2[a] = preds[perm[a]];
      l2[a] = labels[perm[a]];
    }
    const double err = std::max({std::abs(focal_loss(p2, l2, fp) - focal_loss(preds, labels, fp)),
                                 std::abs(smooth_l1_box_loss(p2, l2) - smooth_l1_box_loss(preds, labels)),
                                 std::abs(soft_iou_loss(p2, l2) - soft_iou_loss(preds, labels))});
    out.push_back({"losses invariant under anchor permutation", err <= 1e-12, "max deviation " + fmt(err)});
  }
  {
    double err = 0.0;
    std::uniform_real_distribution<double> pos(1.0, 50.0);
    for (int trial = 0; trial < 100; ++trial) {
      const CenterBox anchor{off(rng) * 100, off(rng) * 100, pos(rng), pos(rng)};
      const CenterBox box{off(rng) * 100, off(rng) * 100, pos(rng), pos(rng)};
      const CenterBox back = decode_offsets(encode_offsets(box, anchor), anchor);
      err = std::max({err, std::abs(back.cx - box.cx), std::abs(back.cy - box.cy),
                      std::abs(back.w - box.w), std::abs(back.h - box.h)});
    }
    out.push_back({"decode(encode(box)) = box", err <= 1e-9, "max deviation " + fmt(err)});
  }
  return out;
}

}  // namespace rogue::losses
