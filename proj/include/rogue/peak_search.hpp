#pragma once

// Peak Search: threshold the amplitude matrix at eta * level, keep cells that
// are maximal within a comparison radius, and expand them into fixed-size boxes.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rogue/coords.hpp"
#include "rogue/nlse.hpp"

namespace rogue::peaks {

enum class Metric { Chebyshev, Euclidean };

struct PeakSearchParams {
  double eta = 1.7;
  double level = 1.0;
  double radius = 2.0;  // grid cells
  int box_px = 20;
  Metric metric = Metric::Chebyshev;

  double threshold() const { return eta * level; }
  void validate() const;
};

// Labels: 0 background, 1 above threshold, 2 peak.
struct PeakMap {
  std::size_t nt = 0;
  std::size_t nx = 0;
  std::vector<std::uint8_t> b;

  std::uint8_t at(std::size_t i, std::size_t j) const { return b[i * nx + j]; }
  std::uint8_t& at(std::size_t i, std::size_t j) { return b[i * nx + j]; }
  std::size_t count(std::uint8_t label) const;
};

struct Peak {
  std::size_t i = 0;
  std::size_t j = 0;
  double t = 0.0;
  double x = 0.0;
  double amplitude = 0.0;

  friend bool operator==(const Peak&, const Peak&) = default;
};

PeakMap threshold_pass(const nlse::AmplitudeMatrix& m, const PeakSearchParams& p);

// Promotes label 1 to 2 when the cell is >= every cell within the radius.
// Equal amplitudes: the lexicographically smallest (i, j) wins.  The window is
// clipped at the matrix edges.
PeakMap local_max_pass(const nlse::AmplitudeMatrix& m, const PeakMap& map,
                       const PeakSearchParams& p);

// Label-2 cells in lexicographic order.
std::vector<Peak> collect_peaks(const nlse::AmplitudeMatrix& m, const PeakMap& map);

std::vector<BoundingBox> peaks_to_boxes(const std::vector<Peak>& peaks,
                                        const nlse::AmplitudeMatrix& m,
                                        const CoordMap& map_spec,
                                        const PeakSearchParams& p);

struct PeakSearchResult {
  PeakMap map;
  std::vector<Peak> peaks;
  std::vector<BoundingBox> boxes;
};

PeakSearchResult peak_search(const nlse::AmplitudeMatrix& m, const PeakSearchParams& p,
                             const CoordMap& map_spec);

inline Axes axes_of(const nlse::AmplitudeMatrix& m) {
  return Axes{m.t0, m.dt_record, m.x0, m.dx};
}

}  // namespace rogue::peaks
