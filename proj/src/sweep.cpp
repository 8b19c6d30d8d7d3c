#include "rogue/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "rogue/errors.hpp"
#include "rogue/field_io.hpp"
#include "rogue/parallel.hpp"

namespace rogue::sweep {
namespace {

using pipeline::ItemMeasurement;

std::ostringstream csv_stream() {
  std::ostringstream os;
  os.precision(17);
  return os;
}

std::vector<const ItemMeasurement*> measured(const std::vector<ItemMeasurement>& items) {
  std::vector<const ItemMeasurement*> out;
  for (const auto& it : items) {
    if (it.measurement) out.push_back(&it);
  }
  return out;
}

std::vector<double> trim(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

}  // namespace

std::vector<ItemMeasurement> run(const std::vector<nlse::GaussParams>& params, const Options& opt) {
  std::vector<ItemMeasurement> out(params.size());
  parallel_for(params.size(), opt.jobs, [&](std::size_t k) {
    out[k] = pipeline::measure_item(params[k], opt.settings, opt.delta_t, opt.curve_delta_ts);
  });
  return out;
}

metrics::PatternMeasurement measure_annotation(const dataset::Annotation& a, double delta_t,
                                               const metrics::ThetaOptions& theta) {
  const auto peaks = dataset::peaks_from_annotation(a);
  return metrics::measure_pattern(peaks, a.boxes, a.map, dataset::axes_of(a), dataset::t_end_of(a),
                                  delta_t, theta);
}

std::vector<ItemMeasurement> from_manifest(const std::filesystem::path& dir,
                                           const dataset::Manifest& manifest, double delta_t,
                                           const metrics::ThetaOptions& theta,
                                           const std::vector<double>& curve_delta_ts) {
  std::vector<ItemMeasurement> out;
  for (const auto& item : manifest.items) {
    ItemMeasurement r;
    r.params = item.params;
    try {
      const auto a = dataset::parse_annotation(io::read_json(dir / item.annotation));
      r.t_max = dataset::t_end_of(a);
      r.length = a.grid.dx * static_cast<double>(a.grid.nx);
      r.nx = a.grid.nx;
      r.peaks = a.boxes.size();
      const auto m = measure_annotation(a, delta_t, theta);
      r.measurement = m;
      for (double dt : curve_delta_ts) {
        if (!(dt > 0.0) || m.gt + dt > r.t_max + 1e-9) continue;
        const auto tri = metrics::Triangle::from_apex({m.apex.x, m.gt}, m.theta, dt);
        pipeline::CurvePoint cp;
        cp.delta_t = dt;
        cp.n = metrics::fractional_count(a.boxes, tri, a.map, dataset::axes_of(a));
        cp.drw = metrics::drw(cp.n, m.theta, dt);
        r.curve.push_back(cp);
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

Trend TrendSummary::drw_decreasing() const {
  return {drw_decreasing_eps.pairs + drw_decreasing_mu.pairs,
          drw_decreasing_eps.hits + drw_decreasing_mu.hits};
}

Trend TrendSummary::gt_increasing() const {
  return {gt_increasing_eps.pairs + gt_increasing_mu.pairs,
          gt_increasing_eps.hits + gt_increasing_mu.hits};
}

TrendSummary trends(const std::vector<ItemMeasurement>& items) {
  std::map<std::pair<double, double>, const metrics::PatternMeasurement*> at;
  std::set<double> eps_axis, mu_axis;
  for (const auto& it : items) {
    eps_axis.insert(it.params.eps);
    mu_axis.insert(it.params.mu);
    if (it.measurement) at[{it.params.eps, it.params.mu}] = &*it.measurement;
  }
  const std::vector<double> eps(eps_axis.begin(), eps_axis.end());
  const std::vector<double> mu(mu_axis.begin(), mu_axis.end());
  auto find = [&](double e, double m) -> const metrics::PatternMeasurement* {
    const auto f = at.find({e, m});
    return f == at.end() ? nullptr : f->second;
  };
  TrendSummary s;
  for (double m : mu) {
    for (std::size_t k = 1; k < eps.size(); ++k) {
      const auto* a = find(eps[k - 1], m);
      const auto* b = find(eps[k], m);
      if (!a || !b) continue;
      ++s.drw_decreasing_eps.pairs;
      if (b->drw < a->drw) ++s.drw_decreasing_eps.hits;
      ++s.gt_increasing_eps.pairs;
      if (b->gt > a->gt) ++s.gt_increasing_eps.hits;
      ++s.theta_nonincreasing_eps.pairs;
      if (b->theta <= a->theta) ++s.theta_nonincreasing_eps.hits;
    }
  }
  for (double e : eps) {
    for (std::size_t k = 1; k < mu.size(); ++k) {
      const auto* a = find(e, mu[k - 1]);
      const auto* b = find(e, mu[k]);
      if (!a || !b) continue;
      ++s.drw_decreasing_mu.pairs;
      if (b->drw < a->drw) ++s.drw_decreasing_mu.hits;
      ++s.gt_increasing_mu.pairs;
      if (b->gt > a->gt) ++s.gt_increasing_mu.hits;
    }
  }
  return s;
}

std::string measurements_csv(const std::vector<ItemMeasurement>& items) {
  auto os = csv_stream();
  os << "eps,mu,gt,theta_deg,delta_t,n,s_abc,drw\n";
  for (const auto* it : measured(items)) {
    const auto& m = *it->measurement;
    os << it->params.eps << ',' << it->params.mu << ',' << m.gt << ',' << metrics::rad_to_deg(m.theta)
       << ',' << m.delta_t << ',' << m.n << ',' << m.s_abc << ',' << m.drw << '\n';
  }
  return os.str();
}

DrwGrid drw_grid(const std::vector<ItemMeasurement>& items) {
  std::set<double> eps_axis, mu_axis;
  for (const auto& it : items) {
    eps_axis.insert(it.params.eps);
    mu_axis.insert(it.params.mu);
  }
  DrwGrid g;
  g.eps.assign(eps_axis.begin(), eps_axis.end());
  g.mu.assign(mu_axis.begin(), mu_axis.end());
  g.drw.assign(g.eps.size() * g.mu.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto* it : measured(items)) {
    const auto r = std::lower_bound(g.mu.begin(), g.mu.end(), it->params.mu) - g.mu.begin();
    const auto c = std::lower_bound(g.eps.begin(), g.eps.end(), it->params.eps) - g.eps.begin();
    g.drw[static_cast<std::size_t>(r) * g.eps.size() + static_cast<std::size_t>(c)] = it->measurement->drw;
  }
  return g;
}

std::string drw_grid_csv(const std::vector<ItemMeasurement>& items) {
  const auto g = drw_grid(items);
  auto os = csv_stream();
  os << "mu";
  for (double e : g.eps) os << ",eps=" << e;
  os << '\n';
  for (std::size_t r = 0; r < g.mu.size(); ++r) {
    os << g.mu[r];
    for (std::size_t c = 0; c < g.eps.size(); ++c) {
      os << ',';
      const double v = g.drw[r * g.eps.size() + c];
      if (!std::isnan(v)) os << v;
    }
    os << '\n';
  }
  return os.str();
}

std::string drw_curves_csv(const std::vector<ItemMeasurement>& items) {
  auto os = csv_stream();
  os << "eps,mu,delta_t,n,drw\n";
  for (const auto* it : measured(items)) {
    for (const auto& p : it->curve) {
      os << it->params.eps << ',' << it->params.mu << ',' << p.delta_t << ',' << p.n << ',' << p.drw << '\n';
    }
  }
  return os.str();
}

std::string n_vs_eps_csv(const std::vector<ItemMeasurement>& items) {
  auto rows = measured(items);
  std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) {
    return std::tie(a->params.mu, a->params.eps) < std::tie(b->params.mu, b->params.eps);
  });
  auto os = csv_stream();
  os << "mu,eps,n\n";
  for (const auto* it : rows) os << it->params.mu << ',' << it->params.eps << ',' << it->measurement->n << '\n';
  return os.str();
}

std::string n_vs_mu_csv(const std::vector<ItemMeasurement>& items) {
  auto rows = measured(items);
  std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) {
    return std::tie(a->params.eps, a->params.mu) < std::tie(b->params.eps, b->params.mu);
  });
  auto os = csv_stream();
  os << "eps,mu,n\n";
  for (const auto* it : rows) os << it->params.eps << ',' << it->params.mu << ',' << it->measurement->n << '\n';
  return os.str();
}

nlohmann::json summary_json(const std::vector<ItemMeasurement>& items, const TrendSummary& t,
                            double delta_t) {
  auto trend = [](const Trend& tr) {
    return nlohmann::json{{"pairs", tr.pairs}, {"hits", tr.hits}, {"fraction", tr.fraction()}};
  };
  nlohmann::json j;
  j["delta_t"] = delta_t;
  j["n_items"] = items.size();
  j["n_measured"] = measured(items).size();
  j["trends"] = {{"drw_decreasing", trend(t.drw_decreasing())},
                 {"drw_decreasing_eps", trend(t.drw_decreasing_eps)},
                 {"drw_decreasing_mu", trend(t.drw_decreasing_mu)},
                 {"gt_increasing", trend(t.gt_increasing())},
                 {"gt_increasing_eps", trend(t.gt_increasing_eps)},
                 {"gt_increasing_mu", trend(t.gt_increasing_mu)},
                 {"theta_nonincreasing_eps", trend(t.theta_nonincreasing_eps)}};
  auto runs = nlohmann::json::array();
  auto failures = nlohmann::json::array();
  for (const auto& it : items) {
    if (it.measurement) {
      runs.push_back({{"eps", it.params.eps}, {"mu", it.params.mu}, {"t_max", it.t_max},
                      {"length", it.length}, {"nx", it.nx}, {"peaks", it.peaks}});
    } else {
      failures.push_back({{"eps", it.params.eps}, {"mu", it.params.mu}, {"error", it.error}});
    }
  }
  j["runs"] = runs;
  j["failures"] = failures;
  return j;
}

std::vector<CsvRow> parse_measurements_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw FormatError("measurement CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FormatError("measurement CSV lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ce = column("eps"), cm = column("mu"), cg = column("gt");
  std::vector<CsvRow> out;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto v = trim(line);
    if (v.size() <= std::max({ce, cm, cg})) throw FormatError("short CSV row: " + line);
    if (std::isnan(v[ce]) || std::isnan(v[cm])) throw FormatError("bad eps/mu in CSV row: " + line);
    if (std::isnan(v[cg])) continue;
    out.push_back({v[ce], v[cm], v[cg]});
  }
  return out;
}

nlohmann::json fit_json(const std::string& model, const metrics::LinearFit& f) {
  nlohmann::json j;
  j["model"] = model;
  j["params"] = {f.slope, f.intercept};
  j["std_errors"] = {f.se_slope, f.se_intercept};
  j["rss"] = f.rss;
  j["n_samples"] = f.n_samples;
  return j;
}

}  // namespace rogue::sweep
