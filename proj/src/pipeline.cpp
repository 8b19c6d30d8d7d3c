#include "rogue/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rogue/errors.hpp"

namespace rogue::pipeline {
namespace {

double round_up_to(double t, double step) {
  return std::ceil(t / step - 1e-9) * step;
}

}  // namespace

Detection simulate_and_detect(const nlse::GaussParams& params, const Settings& settings) {
  Detection det;
  det.params = params;
  det.grid = nlse::auto_grid(params, settings.grid);
  nlse::RecordOptions rec;
  rec.record_every = nlse::record_every_for(det.grid, settings.grid.dt_record);
  rec.solver = settings.solver;
  det.run = nlse::evolve_record(det.grid, nlse::gaussian_initial(det.grid, params), rec, params);
  const auto& m = det.run.amplitude;
  det.map = CoordMap::fit(m.nt, m.nx, settings.image_w, settings.image_h, settings.time_up);
  det.found = peaks::peak_search(m, settings.peak, det.map);
  return det;
}

metrics::PatternMeasurement measure_detection(const Detection& det, double delta_t,
                                              const metrics::ThetaOptions& theta) {
  const auto& m = det.run.amplitude;
  return metrics::measure_pattern(det.found.peaks, det.found.boxes, det.map, peaks::axes_of(m),
                                  m.t_end(), delta_t, theta);
}

ItemMeasurement measure_item(const nlse::GaussParams& params, const Settings& settings,
                             double delta_t, const std::vector<double>& curve_delta_ts) {
  ItemMeasurement out;
  out.params = params;
  Settings s = settings;
  s.grid.t_max = std::min(round_up_to(s.grid.t_max, s.grid.dt_record), s.t_cap);
  try {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const auto det = simulate_and_detect(params, s);
      const auto& m = det.run.amplitude;
      out.t_max = s.grid.t_max;
      out.length = det.grid.length;
      out.nx = det.grid.nx;
      out.peaks = det.found.peaks.size();
      if (det.found.peaks.empty()) {
        if (s.grid.t_max >= s.t_cap) {
          std::ostringstream os;
          os << "no rogue waves detected up to t = " << s.t_cap;
          out.error = os.str();
          return out;
        }
        s.grid.t_max = std::min(s.t_cap, round_up_to(2.0 * s.grid.t_max, s.grid.dt_record));
        continue;
      }
      const double need = metrics::measure_gt(det.found.peaks) + delta_t;
      if (need > m.t_end() + 1e-9) {
        if (need > s.t_cap) {
          std::ostringstream os;
          os << "GT + delta_t = " << need << " exceeds the simulation cap t = " << s.t_cap;
          out.error = os.str();
          return out;
        }
        s.grid.t_max = round_up_to(need, s.grid.dt_record);
        continue;
      }
      const auto pm = measure_detection(det, delta_t, s.theta);
      out.measurement = pm;
      for (double dt : curve_delta_ts) {
        if (!(dt > 0.0) || pm.gt + dt > m.t_end() + 1e-9) continue;
        const auto tri = metrics::Triangle::from_apex({pm.apex.x, pm.gt}, pm.theta, dt);
        CurvePoint cp;
        cp.delta_t = dt;
        cp.n = metrics::fractional_count(det.found.boxes, tri, det.map, peaks::axes_of(m));
        cp.drw = metrics::drw(cp.n, pm.theta, dt);
        out.curve.push_back(cp);
      }
      return out;
    }
    out.error = "could not reach a feasible measurement window";
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace rogue::pipeline
