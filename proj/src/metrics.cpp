#include "rogue/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "rogue/errors.hpp"
#include "rogue/polygon.hpp"

namespace rogue::metrics {
namespace {

geom::Polygon as_polygon(const Triangle& tri) {
  return {{tri.a.x, tri.a.t}, {tri.b.x, tri.b.t}, {tri.c.x, tri.c.t}};
}

Line fit_side(const std::vector<XT>& pts) {
  std::vector<double> ts, xs;
  for (const auto& p : pts) {
    ts.push_back(p.t);
    xs.push_back(p.x);
  }
  const auto f = fit_linear(ts, xs);
  return Line{f.intercept, f.slope};
}

std::size_t distinct_times(const std::vector<XT>& pts) {
  std::set<double> ts;
  for (const auto& p : pts) ts.insert(p.t);
  return ts.size();
}

// Andrew's monotone chain, counter-clockwise, collinear points dropped.
std::vector<XT> convex_hull(std::vector<XT> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const XT& a, const XT& b) { return a.x < b.x || (a.x == b.x && a.t < b.t); });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const XT& a, const XT& b) { return a.x == b.x && a.t == b.t; }),
            pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const XT& o, const XT& a, const XT& b) {
    return (a.x - o.x) * (b.t - o.t) - (a.t - o.t) * (b.x - o.x);
  };
  std::vector<XT> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

ThetaEstimate from_lines(const Line& left, const Line& right) {
  if (!(right.slope - left.slope > 1e-12)) {
    throw DegenerateGeometryError("region boundaries are parallel or do not open in +t; theta undefined");
  }
  ThetaEstimate est;
  est.left = left;
  est.right = right;
  const double sl = left.slope;
  const double sr = right.slope;
  const double c = (sl * sr + 1.0) / std::sqrt((sl * sl + 1.0) * (sr * sr + 1.0));
  est.theta = std::acos(std::clamp(c, -1.0, 1.0));
  est.apex.t = (left.intercept - right.intercept) / (sr - sl);
  est.apex.x = left.intercept + sl * est.apex.t;
  return est;
}

}  // namespace

double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }
double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

double Triangle::area() const { return geom::area(as_polygon(*this)); }

Triangle Triangle::from_apex(XT apex, double theta, double delta_t) {
  const double half = delta_t * std::tan(0.5 * theta);
  Triangle tri;
  tri.a = apex;
  tri.b = {apex.x - half, apex.t + delta_t};
  tri.c = {apex.x + half, apex.t + delta_t};
  return tri;
}

double measure_gt(std::span<const peaks::Peak> peaks) {
  if (peaks.empty()) throw NoRogueWavesError();
  double gt = peaks.front().t;
  for (const auto& p : peaks) gt = std::min(gt, p.t);
  return gt;
}

ThetaEstimate estimate_theta(std::span<const peaks::Peak> peaks, const ThetaOptions& opt) {
  std::vector<XT> pts;
  pts.reserve(peaks.size());
  for (const auto& p : peaks) pts.push_back({p.x, p.t});
  if (pts.size() < 6 || distinct_times(pts) < 3) {
    std::ostringstream os;
    os << "theta needs >= 6 peaks over >= 3 distinct times (got " << pts.size() << " peaks, "
       << distinct_times(pts) << " times)";
    throw MeasurementError(os.str());
  }

  std::vector<XT> left, right;
  if (opt.method == ThetaMethod::BoundaryFit) {
    if (!(opt.bin_width > 0.0)) throw ValidationError("theta bin width must be > 0");
    double t_start = pts.front().t;
    double t_stop = pts.front().t;
    for (const auto& p : pts) {
      t_start = std::min(t_start, p.t);
      t_stop = std::max(t_stop, p.t);
    }
    // Equal bins partition [t_start, t_stop]; the last one is closed.
    const auto n_bins = std::max<long long>(1, std::llround((t_stop - t_start) / opt.bin_width));
    const double width = (t_stop - t_start) / static_cast<double>(n_bins);
    // bin -> (leftmost, rightmost); ties keep the earlier peak
    std::map<long long, std::pair<XT, XT>> bins;
    for (const auto& p : pts) {
      const auto key = std::min(n_bins - 1, static_cast<long long>(std::floor((p.t - t_start) / width)));
      auto [it, fresh] = bins.try_emplace(key, p, p);
      if (fresh) continue;
      auto& [lo, hi] = it->second;
      if (p.x < lo.x || (p.x == lo.x && p.t < lo.t)) lo = p;
      if (p.x > hi.x || (p.x == hi.x && p.t < hi.t)) hi = p;
    }
    for (const auto& [key, ext] : bins) {
      left.push_back(ext.first);
      right.push_back(ext.second);
    }
  } else {
    const auto hull = convex_hull(pts);
    if (hull.size() < 3) throw DegenerateGeometryError("peaks are collinear; theta undefined");
    const std::size_t n = hull.size();
    double x_mean = 0.0;
    for (const auto& p : pts) x_mean += p.x;
    x_mean /= static_cast<double>(pts.size());
    std::size_t apex = 0, lo = 0, hi = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const auto& h = hull[i];
      if (h.t < hull[apex].t ||
          (h.t == hull[apex].t && std::abs(h.x - x_mean) < std::abs(hull[apex].x - x_mean))) {
        apex = i;
      }
      if (h.x < hull[lo].x) lo = i;
      if (h.x > hull[hi].x) hi = i;
    }
    // Counter-clockwise from the apex runs along the right edge.
    for (std::size_t i = apex;; i = (i + 1) % n) {
      right.push_back(hull[i]);
      if (i == hi) break;
    }
    for (std::size_t i = apex;; i = (i + n - 1) % n) {
      left.push_back(hull[i]);
      if (i == lo) break;
    }
  }
  if (distinct_times(left) < 2 || distinct_times(right) < 2) {
    throw DegenerateGeometryError("region boundaries span a single time; theta undefined");
  }
  return from_lines(fit_side(left), fit_side(right));
}

double fraction_inside(const PhysRect& rect, const Triangle& tri) {
  const double box_area = rect.area();
  if (!(box_area > 0.0)) return 0.0;
  const auto rect_poly = geom::rectangle(rect.x_min, rect.t_min, rect.x_max, rect.t_max);
  const double inside = geom::intersection_area(rect_poly, as_polygon(tri));
  return std::clamp(inside / box_area, 0.0, 1.0);
}

double fractional_count(std::span<const BoundingBox> boxes, const Triangle& tri,
                        const CoordMap& map_spec, const Axes& axes) {
  if (!(tri.area() > 0.0)) throw DegenerateGeometryError("triangle ABC has zero area");
  double n = 0.0;
  for (const auto& box : boxes) n += fraction_inside(to_physical(box, map_spec, axes), tri);
  return n;
}

double drw(double n, double theta, double delta_t) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) throw ValidationError("theta must lie in (0, pi)");
  if (!(delta_t > 0.0)) throw ValidationError("delta_t must be > 0");
  if (!(n >= 0.0)) throw ValidationError("N must be >= 0");
  return n / (delta_t * delta_t * std::tan(0.5 * theta));
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("fit: x and y lengths differ");
  const std::size_t n = x.size();
  if (n < 2) throw ValidationError("fit needs at least two samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit is singular: all regressor values are equal");
  LinearFit f;
  f.n_samples = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    f.rss += r * r;
  }
  if (n > 2) {
    const double s2 = f.rss / static_cast<double>(n - 2);
    f.se_slope = std::sqrt(s2 / sxx);
    f.se_intercept = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  return f;
}

FitParamsLogEps fit_gt_log_eps(std::span<const std::pair<double, double>> eps_gt) {
  std::vector<double> x, y;
  for (const auto& [eps, gt] : eps_gt) {
    if (!(eps > 0.0)) throw ValidationError("eps samples must be > 0");
    x.push_back(std::log(eps));
    y.push_back(gt);
  }
  FitParamsLogEps p;
  p.detail = fit_linear(x, y);
  p.a = p.detail.slope;
  p.b = p.detail.intercept;
  return p;
}

FitParamsSqrtMu fit_gt_sqrt_mu(std::span<const std::pair<double, double>> mu_gt) {
  std::vector<double> x, y;
  for (const auto& [mu, gt] : mu_gt) {
    if (!(mu > 0.0)) throw ValidationError("mu samples must be > 0");
    x.push_back(std::sqrt(mu));
    y.push_back(gt);
  }
  FitParamsSqrtMu p;
  p.detail = fit_linear(x, y);
  p.c = p.detail.slope;
  p.d = p.detail.intercept;
  return p;
}

PatternMeasurement measure_pattern(std::span<const peaks::Peak> peaks,
                                   std::span<const BoundingBox> boxes, const CoordMap& map_spec,
                                   const Axes& axes, double t_end, double delta_t,
                                   const ThetaOptions& opt) {
  if (!(delta_t > 0.0)) throw ValidationError("delta_t must be > 0");
  PatternMeasurement m;
  m.gt = measure_gt(peaks);
  m.delta_t = delta_t;
  const double t_hi = m.gt + delta_t;
  if (t_hi > t_end + 1e-9 * std::max(1.0, std::abs(t_end))) {
    std::ostringstream os;
    os << "GT + delta_t = " << t_hi << " exceeds the recorded span (t_end = " << t_end << ")";
    throw InfeasibleWindowError(os.str());
  }
  std::vector<peaks::Peak> window;
  for (const auto& p : peaks) {
    if (p.t <= t_hi + 1e-12) window.push_back(p);
  }
  const auto th = estimate_theta(window, opt);
  m.theta = th.theta;
  m.apex = th.apex;
  m.triangle = Triangle::from_apex({th.apex.x, m.gt}, th.theta, delta_t);
  m.n = fractional_count(boxes, m.triangle, map_spec, axes);
  m.s_abc = m.triangle.area();
  m.drw = drw(m.n, m.theta, delta_t);
  m.boxes_total = boxes.size();
  return m;
}

}  // namespace rogue::metrics
