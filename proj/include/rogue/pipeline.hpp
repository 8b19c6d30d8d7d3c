#pragma once

// Per-(eps, mu) orchestration: simulate, run Peak Search on the rendered
// coordinate frame, and measure the pattern.

#include <optional>
#include <string>
#include <vector>

#include "rogue/coords.hpp"
#include "rogue/metrics.hpp"
#include "rogue/nlse.hpp"
#include "rogue/peak_search.hpp"

namespace rogue::pipeline {

struct Settings {
  nlse::GridRequest grid;
  nlse::SolverOptions solver;
  peaks::PeakSearchParams peak;
  metrics::ThetaOptions theta;
  int image_w = 512;
  int image_h = 512;
  bool time_up = true;
  // measure_item never simulates past this time.
  double t_cap = 60.0;
};

struct Detection {
  nlse::GaussParams params;
  nlse::SimGrid grid;
  nlse::RecordedRun run;
  CoordMap map;
  peaks::PeakSearchResult found;
};

Detection simulate_and_detect(const nlse::GaussParams& params, const Settings& settings);

struct CurvePoint {
  double delta_t = 0.0;
  double n = 0.0;
  double drw = 0.0;
};

struct ItemMeasurement {
  nlse::GaussParams params;
  double t_max = 0.0;
  double length = 0.0;
  std::size_t nx = 0;
  std::size_t peaks = 0;
  std::optional<metrics::PatternMeasurement> measurement;
  std::vector<CurvePoint> curve;
  std::string error;
};

// Extends t_max (up to t_cap) until GT + delta_t fits inside the recorded span,
// then measures.  Failures are reported in `error`, never thrown.
ItemMeasurement measure_item(const nlse::GaussParams& params, const Settings& settings,
                             double delta_t, const std::vector<double>& curve_delta_ts = {});

// Measurement of an existing detection; throws MeasurementError subclasses.
metrics::PatternMeasurement measure_detection(const Detection& det, double delta_t,
                                              const metrics::ThetaOptions& theta);

}  // namespace rogue::pipeline
