#include "rogue/peak_search.hpp"

#include <algorithm>
#include <cmath>

#include "rogue/errors.hpp"

namespace rogue::peaks {

void PeakSearchParams::validate() const {
  if (!(level > 0.0)) throw ValidationError("level l must be > 0");
  if (!(eta > 0.0)) throw ValidationError("peak factor eta must be > 0");
  if (!(eta * level > level)) {
    throw ValidationError("threshold eta*l must lie above the background level l (eta > 1)");
  }
  if (!(radius >= 1.0)) throw ValidationError("comparison radius r must be >= 1");
  if (box_px < 1) throw ValidationError("box size must be >= 1 pixel");
}

std::size_t PeakMap::count(std::uint8_t label) const {
  return static_cast<std::size_t>(std::count(b.begin(), b.end(), label));
}

PeakMap threshold_pass(const nlse::AmplitudeMatrix& m, const PeakSearchParams& p) {
  PeakMap map;
  map.nt = m.nt;
  map.nx = m.nx;
  map.b.resize(m.a.size());
  const double thr = p.threshold();
  std::transform(m.a.begin(), m.a.end(), map.b.begin(),
                 [thr](double a) { return static_cast<std::uint8_t>(a >= thr ? 1 : 0); });
  return map;
}

PeakMap local_max_pass(const nlse::AmplitudeMatrix& m, const PeakMap& map,
                       const PeakSearchParams& p) {
  PeakMap out = map;
  const auto reach = static_cast<std::ptrdiff_t>(std::floor(p.radius));
  const double r2 = p.radius * p.radius;
  const auto nt = static_cast<std::ptrdiff_t>(m.nt);
  const auto nx = static_cast<std::ptrdiff_t>(m.nx);
  for (std::ptrdiff_t i = 0; i < nt; ++i) {
    for (std::ptrdiff_t j = 0; j < nx; ++j) {
      if (map.at(i, j) == 0) continue;
      const double centre = m.at(i, j);
      bool is_max = true;
      for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, i - reach);
           is_max && k <= std::min(nt - 1, i + reach); ++k) {
        for (std::ptrdiff_t l = std::max<std::ptrdiff_t>(0, j - reach);
             l <= std::min(nx - 1, j + reach); ++l) {
          if (k == i && l == j) continue;
          if (p.metric == Metric::Euclidean &&
              static_cast<double>((k - i) * (k - i) + (l - j) * (l - j)) > r2) {
            continue;
          }
          const double other = m.at(k, l);
          // An equal neighbour earlier in (i, j) order takes the peak.
          if (other > centre || (other == centre && (k < i || (k == i && l < j)))) {
            is_max = false;
            break;
          }
        }
      }
      out.at(i, j) = is_max ? 2 : 1;
    }
  }
  return out;
}

std::vector<Peak> collect_peaks(const nlse::AmplitudeMatrix& m, const PeakMap& map) {
  std::vector<Peak> peaks;
  for (std::size_t i = 0; i < m.nt; ++i) {
    for (std::size_t j = 0; j < m.nx; ++j) {
      if (map.at(i, j) == 2) peaks.push_back(Peak{i, j, m.time(i), m.x(j), m.at(i, j)});
    }
  }
  return peaks;
}

std::vector<BoundingBox> peaks_to_boxes(const std::vector<Peak>& peaks,
                                        const nlse::AmplitudeMatrix& m,
                                        const CoordMap& map_spec,
                                        const PeakSearchParams& p) {
  map_spec.validate(m.nt, m.nx);
  const double half = 0.5 * static_cast<double>(p.box_px);
  const double w = static_cast<double>(map_spec.image_w);
  const double h = static_cast<double>(map_spec.image_h);
  std::vector<BoundingBox> boxes;
  boxes.reserve(peaks.size());
  for (const auto& pk : peaks) {
    const auto c = map_spec.to_pixel(static_cast<double>(pk.i), static_cast<double>(pk.j));
    auto box = BoundingBox::from_corners(std::max(0.0, c.px - half), std::max(0.0, c.py - half),
                                         std::min(w, c.px + half), std::min(h, c.py + half));
    box.t = pk.t;
    box.x = pk.x;
    box.amplitude = pk.amplitude;
    boxes.push_back(box);
  }
  return boxes;
}

PeakSearchResult peak_search(const nlse::AmplitudeMatrix& m, const PeakSearchParams& p,
                             const CoordMap& map_spec) {
  p.validate();
  map_spec.validate(m.nt, m.nx);
  PeakSearchResult r;
  r.map = local_max_pass(m, threshold_pass(m, p), p);
  r.peaks = collect_peaks(m, r.map);
  r.boxes = peaks_to_boxes(r.peaks, m, map_spec, p);
  return r;
}

}  // namespace rogue::peaks
