#pragma once

// Rogue-wave pattern measurements: generation time GT, apex angle theta of
// the instability region, the triangle ABC, fractional box count N and the
// density DRW = N cot(theta/2) / dt^2.  Plus the GT curve fits.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rogue/coords.hpp"
#include "rogue/peak_search.hpp"

namespace rogue::metrics {

// Point in the physical (x, t) plane.
struct XT {
  double x = 0.0;
  double t = 0.0;
};

// Apex a at the first peak time; b and c on t = a.t + delta_t, ordered left to right.
struct Triangle {
  XT a, b, c;

  double area() const;
  static Triangle from_apex(XT apex, double theta, double delta_t);
};

struct Line {
  // x = intercept + slope * t
  double intercept = 0.0;
  double slope = 0.0;
};

enum class ThetaMethod { BoundaryFit, ConvexHull };

struct ThetaOptions {
  ThetaMethod method = ThetaMethod::BoundaryFit;
  // Width of the time bins whose extreme-x peaks trace the region edges.
  double bin_width = 2.0;
};

struct ThetaEstimate {
  double theta = 0.0;  // radians
  XT apex;
  Line left;
  Line right;
};

struct PatternMeasurement {
  double gt = 0.0;
  double theta = 0.0;  // radians
  XT apex;
  double delta_t = 0.0;
  double n = 0.0;
  double s_abc = 0.0;
  double drw = 0.0;
  Triangle triangle;
  std::size_t boxes_total = 0;
};

// Earliest peak time.  Throws NoRogueWavesError for an empty list.
double measure_gt(std::span<const peaks::Peak> peaks);

// Needs >= 6 peaks over >= 3 distinct times.
ThetaEstimate estimate_theta(std::span<const peaks::Peak> peaks, const ThetaOptions& opt = {});

// Share of the rectangle's area inside the triangle, in [0, 1].
double fraction_inside(const PhysRect& rect, const Triangle& tri);

double fractional_count(std::span<const BoundingBox> boxes, const Triangle& tri,
                        const CoordMap& map_spec, const Axes& axes);

double drw(double n, double theta, double delta_t);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
  double se_slope = 0.0;
  double se_intercept = 0.0;
  std::size_t n_samples = 0;
};

// Ordinary least squares y = slope * x + intercept.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

// GT = a ln(eps) + b
struct FitParamsLogEps {
  double a = 0.0;
  double b = 0.0;
  LinearFit detail;
};

// GT = c sqrt(mu) + d
struct FitParamsSqrtMu {
  double c = 0.0;
  double d = 0.0;
  LinearFit detail;
};

FitParamsLogEps fit_gt_log_eps(std::span<const std::pair<double, double>> eps_gt);
FitParamsSqrtMu fit_gt_sqrt_mu(std::span<const std::pair<double, double>> mu_gt);

// Full measurement over [GT, GT + delta_t].  theta uses the peaks inside the
// window; throws InfeasibleWindowError when GT + delta_t exceeds t_end.
PatternMeasurement measure_pattern(std::span<const peaks::Peak> peaks,
                                   std::span<const BoundingBox> boxes, const CoordMap& map_spec,
                                   const Axes& axes, double t_end, double delta_t,
                                   const ThetaOptions& opt = {});

double rad_to_deg(double rad);
double deg_to_rad(double deg);

}  // namespace rogue::metrics
