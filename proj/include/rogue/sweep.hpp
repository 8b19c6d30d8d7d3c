#pragma once

// (eps, mu) sweeps: batch measurement, CSV tables and trend statistics.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rogue/dataset.hpp"
#include "rogue/metrics.hpp"
#include "rogue/pipeline.hpp"

namespace rogue::sweep {

struct Options {
  pipeline::Settings settings;
  double delta_t = 15.0;
  std::vector<double> curve_delta_ts;
  int jobs = 1;
};

// Items keep the order of `params`; failures are carried in ItemMeasurement::error.
std::vector<pipeline::ItemMeasurement> run(const std::vector<nlse::GaussParams>& params,
                                           const Options& opt);

// Measurement from a stored annotation (peaks are the box centers).
metrics::PatternMeasurement measure_annotation(const dataset::Annotation& a, double delta_t,
                                               const metrics::ThetaOptions& theta = {});

// Measures every manifest item from its annotation without re-simulating.
// Items whose window does not fit the stored span carry an error.
std::vector<pipeline::ItemMeasurement> from_manifest(const std::filesystem::path& dir,
                                                     const dataset::Manifest& manifest,
                                                     double delta_t,
                                                     const metrics::ThetaOptions& theta,
                                                     const std::vector<double>& curve_delta_ts);

struct Trend {
  std::size_t pairs = 0;
  std::size_t hits = 0;
  double fraction() const { return pairs == 0 ? 0.0 : static_cast<double>(hits) / pairs; }
};

struct TrendSummary {
  Trend drw_decreasing_eps;   // adjacent eps at fixed mu
  Trend drw_decreasing_mu;    // adjacent mu at fixed eps
  Trend gt_increasing_eps;
  Trend gt_increasing_mu;
  Trend theta_nonincreasing_eps;

  Trend drw_decreasing() const;
  Trend gt_increasing() const;
};

// Pairs are neighbours on the sorted eps and mu axes with both items measured.
TrendSummary trends(const std::vector<pipeline::ItemMeasurement>& items);

// eps,mu,gt,theta_deg,delta_t,n,s_abc,drw  (failed items omitted)
std::string measurements_csv(const std::vector<pipeline::ItemMeasurement>& items);
// First column mu, one column per eps; empty cells for missing measurements.
std::string drw_grid_csv(const std::vector<pipeline::ItemMeasurement>& items);
// eps,mu,delta_t,n,drw
std::string drw_curves_csv(const std::vector<pipeline::ItemMeasurement>& items);
// mu,eps,n sorted by mu then eps
std::string n_vs_eps_csv(const std::vector<pipeline::ItemMeasurement>& items);
// eps,mu,n sorted by eps then mu
std::string n_vs_mu_csv(const std::vector<pipeline::ItemMeasurement>& items);

nlohmann::json summary_json(const std::vector<pipeline::ItemMeasurement>& items,
                            const TrendSummary& t, double delta_t);

struct DrwGrid {
  std::vector<double> eps;  // sorted, columns
  std::vector<double> mu;   // sorted, rows
  std::vector<double> drw;  // mu-major, NaN where missing
};
DrwGrid drw_grid(const std::vector<pipeline::ItemMeasurement>& items);

// Rows of a measurements CSV (columns located by header name).
struct CsvRow {
  double eps = 0.0;
  double mu = 0.0;
  double gt = 0.0;
};
std::vector<CsvRow> parse_measurements_csv(const std::string& text);

// {"model": "log_eps"|"sqrt_mu", "params": [..], "rss", "n_samples", ...}
nlohmann::json fit_json(const std::string& model, const metrics::LinearFit& f);

}  // namespace rogue::sweep
