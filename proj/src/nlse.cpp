#include "rogue/nlse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "rogue/errors.hpp"

namespace rogue::nlse {
namespace {

constexpr cplx kI{0.0, 1.0};

void check_matches(const ComplexField& field, const SimGrid& grid) {
  if (field.values.size() != grid.nx) {
    throw ValidationError("field length " + std::to_string(field.values.size()) +
                          " does not match grid nx " + std::to_string(grid.nx));
  }
  for (const auto& v : field.values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ValidationError("field contains non-finite values");
    }
  }
}

}  // namespace

std::size_t SimGrid::steps() const {
  return static_cast<std::size_t>(std::llround(t_max / dt));
}

std::vector<double> SimGrid::wavenumbers() const {
  std::vector<double> k(nx);
  const double base = 2.0 * std::numbers::pi / length;
  const auto half = static_cast<std::ptrdiff_t>(nx / 2);
  for (std::size_t m = 0; m < nx; ++m) {
    auto idx = static_cast<std::ptrdiff_t>(m);
    if (idx >= half) idx -= static_cast<std::ptrdiff_t>(nx);
    k[m] = base * static_cast<double>(idx);
  }
  return k;
}

void SimGrid::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) throw ValidationError("domain length must be > 0");
  if (nx < 2 || !std::has_single_bit(nx)) throw ValidationError("nx must be a power of two >= 2");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("t_max must be > 0");
  if (!(stability_factor > 0.0)) throw ValidationError("stability factor must be > 0");
  const double limit = stability_factor * dx() * dx();
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds stability limit " << limit << " (c_stab * dx^2)";
    throw ValidationError(os.str());
  }
}

void GaussParams::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps must be > 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be > 0");
}

void AmplitudeMatrix::validate() const {
  if (a.size() != nt * nx) throw ValidationError("amplitude matrix size does not match nt*nx");
  if (nt > 1 && !(dt_record > 0.0)) throw ValidationError("dt_record must be > 0");
  if (nx > 1 && !(dx > 0.0)) throw ValidationError("dx must be > 0");
  for (double v : a) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("amplitudes must be finite and >= 0");
  }
  if (params) params->validate();
}

cplx peregrine(double x, double t) {
  const cplx rational = 4.0 * cplx(1.0, 2.0 * t) / (1.0 + 4.0 * (x * x + t * t));
  return (1.0 - rational) * std::exp(kI * t);
}

ComplexField peregrine_field(const SimGrid& grid, double t) {
  ComplexField f;
  f.t = t;
  f.values.resize(grid.nx);
  for (std::size_t j = 0; j < grid.nx; ++j) f.values[j] = peregrine(grid.x(j), t);
  return f;
}

ComplexField gaussian_initial(const SimGrid& grid, const GaussParams& p) {
  p.validate();
  ComplexField f;
  f.values.resize(grid.nx);
  const double amp = 2.0 / p.eps;
  const double inv_mu2 = 1.0 / (p.mu * p.mu);
  for (std::size_t j = 0; j < grid.nx; ++j) {
    const double x = grid.x(j);
    f.values[j] = 1.0 + amp * std::exp(-x * x * inv_mu2);
  }
  return f;
}

ComplexField plane_wave(const SimGrid& grid) {
  ComplexField f;
  f.values.assign(grid.nx, cplx(1.0, 0.0));
  return f;
}

struct IfRk4Stepper::Impl {
  SimGrid grid;
  detail::Fft fft;
  std::vector<double> mask;
  // exp(+-i k^2 tau / 2) for tau = dt/2 and dt.
  std::vector<cplx> fwd_half, fwd_full, back_half, back_full;
  std::vector<cplx> state;  // spectral coefficients at time_
  std::vector<cplx> k1, k2, k3, k4, stage, spec, phys;
  std::size_t steps_taken = 0;
  double start_time = 0.0;

  Impl(const SimGrid& g, SolverOptions opt) : grid(g), fft(g.nx) {
    const std::size_t n = g.nx;
    const auto k = g.wavenumbers();
    fwd_half.resize(n);
    fwd_full.resize(n);
    back_half.resize(n);
    back_full.resize(n);
    mask.assign(n, 1.0);
    const double kcut = (2.0 / 3.0) * std::abs(k[n / 2]);
    for (std::size_t m = 0; m < n; ++m) {
      const double w = 0.5 * k[m] * k[m];
      fwd_half[m] = std::exp(kI * w * (0.5 * g.dt));
      fwd_full[m] = std::exp(kI * w * g.dt);
      back_half[m] = std::conj(fwd_half[m]);
      back_full[m] = std::conj(fwd_full[m]);
      if (opt.dealias && std::abs(k[m]) > kcut) mask[m] = 0.0;
    }
    for (auto* v : {&state, &k1, &k2, &k3, &k4, &stage, &spec, &phys}) v->assign(n, cplx{});
  }

  // out = E(tau) * F[i |u|^2 u] with u = F^-1[E(-tau) v]; tau in {0, dt/2, dt}.
  void rhs(const std::vector<cplx>& v, int tau_kind, std::vector<cplx>& out) {
    const std::size_t n = grid.nx;
    const std::vector<cplx>* back = tau_kind == 1 ? &back_half : tau_kind == 2 ? &back_full : nullptr;
    const std::vector<cplx>* fwd = tau_kind == 1 ? &fwd_half : tau_kind == 2 ? &fwd_full : nullptr;
    if (back != nullptr) {
      for (std::size_t m = 0; m < n; ++m) spec[m] = (*back)[m] * v[m];
      fft.inverse(spec, phys);
    } else {
      fft.inverse(v, phys);
    }
    for (auto& u : phys) u = kI * std::norm(u) * u;
    fft.forward(phys, out);
    for (std::size_t m = 0; m < n; ++m) {
      out[m] *= mask[m];
      if (fwd != nullptr) out[m] *= (*fwd)[m];
    }
  }

  void advance() {
    const std::size_t n = grid.nx;
    const double h = grid.dt;
    rhs(state, 0, k1);
    for (std::size_t m = 0; m < n; ++m) stage[m] = state[m] + 0.5 * h * k1[m];
    rhs(stage, 1, k2);
    for (std::size_t m = 0; m < n; ++m) stage[m] = state[m] + 0.5 * h * k2[m];
    rhs(stage, 1, k3);
    for (std::size_t m = 0; m < n; ++m) stage[m] = state[m] + h * k3[m];
    rhs(stage, 2, k4);
    for (std::size_t m = 0; m < n; ++m) {
      const cplx v = state[m] + (h / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
      state[m] = back_full[m] * v;
    }
    ++steps_taken;
  }
};

IfRk4Stepper::IfRk4Stepper(const SimGrid& grid, SolverOptions options)
    : impl_(std::make_unique<Impl>(grid, options)) {}
IfRk4Stepper::~IfRk4Stepper() = default;
IfRk4Stepper::IfRk4Stepper(IfRk4Stepper&&) noexcept = default;
IfRk4Stepper& IfRk4Stepper::operator=(IfRk4Stepper&&) noexcept = default;

void IfRk4Stepper::load(const ComplexField& field) {
  check_matches(field, impl_->grid);
  impl_->fft.forward(field.values, impl_->state);
  impl_->start_time = field.t;
  impl_->steps_taken = 0;
  time_ = field.t;
}

void IfRk4Stepper::step() {
  impl_->advance();
  time_ = impl_->start_time + static_cast<double>(impl_->steps_taken) * impl_->grid.dt;
  for (const auto& v : impl_->state) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << "solution blew up at t = " << time_;
      throw BlowUpError(time_, os.str());
    }
  }
}

ComplexField IfRk4Stepper::field() const {
  ComplexField f;
  f.t = time_;
  f.values.resize(impl_->grid.nx);
  impl_->fft.inverse(impl_->state, f.values);
  return f;
}

void IfRk4Stepper::amplitude_into(std::span<double> out) const {
  impl_->fft.inverse(impl_->state, impl_->phys);
  std::transform(impl_->phys.begin(), impl_->phys.end(), out.begin(),
                 [](cplx u) { return std::abs(u); });
}

ComplexField step_if_rk4(const ComplexField& field, const SimGrid& grid, SolverOptions options) {
  grid.validate();
  IfRk4Stepper stepper(grid, options);
  stepper.load(field);
  stepper.step();
  return stepper.field();
}

Conserved conserved_quantities(const ComplexField& field, const SimGrid& grid) {
  check_matches(field, grid);
  const std::size_t n = grid.nx;
  const double dx = grid.dx();
  detail::Fft fft(n);
  std::vector<cplx> spec(n), ux(n);
  fft.forward(field.values, spec);
  const auto k = grid.wavenumbers();
  for (std::size_t m = 0; m < n; ++m) spec[m] *= kI * k[m];
  fft.inverse(spec, ux);
  Conserved c;
  for (std::size_t j = 0; j < n; ++j) {
    const double rho = std::norm(field.values[j]);
    c.mass += rho * dx;
    c.energy += (0.5 * std::norm(ux[j]) - 0.5 * rho * rho) * dx;
  }
  return c;
}

double RunDiagnostics::mass_drift() const {
  if (initial.mass == 0.0) return std::abs(final.mass);
  return std::abs(final.mass - initial.mass) / std::abs(initial.mass);
}

double RunDiagnostics::energy_drift() const {
  if (initial.energy == 0.0) return std::abs(final.energy);
  return std::abs(final.energy - initial.energy) / std::abs(initial.energy);
}

std::size_t record_every_for(const SimGrid& grid, double dt_record) {
  if (!(dt_record > 0.0)) throw ValidationError("record cadence must be > 0");
  const double ratio = dt_record / grid.dt;
  const auto every = static_cast<std::size_t>(std::llround(ratio));
  if (every == 0 || std::abs(ratio - static_cast<double>(every)) > 1e-9 * ratio) {
    std::ostringstream os;
    os << "record cadence " << dt_record << " is not a multiple of dt = " << grid.dt;
    throw ValidationError(os.str());
  }
  return every;
}

bool cone_reaches_boundary(const SimGrid& grid, const GaussParams& p) {
  return 2.0 * grid.t_max + 3.0 * p.mu > 0.5 * grid.length;
}

namespace {

// Number of recorded rows between t0 and grid.t_max.
std::size_t recorded_rows(const SimGrid& grid, double t0, const RecordOptions& options) {
  if (options.record_every == 0) throw ValidationError("record_every must be positive");
  const double span = grid.t_max - t0;
  const double cadence = static_cast<double>(options.record_every) * grid.dt;
  const double intervals = span / cadence;
  if (!(span > 0.0) || std::abs(intervals - std::round(intervals)) > 1e-9 * std::max(1.0, intervals)) {
    std::ostringstream os;
    os << "recording cadence " << cadence << " does not divide the time span " << span;
    throw ValidationError(os.str());
  }
  return static_cast<std::size_t>(std::llround(intervals)) + 1;
}

}  // namespace

RecordedRun peregrine_record(const SimGrid& grid, double t0, const RecordOptions& options) {
  grid.validate();
  const auto nt = recorded_rows(grid, t0, options);
  const double cadence = static_cast<double>(options.record_every) * grid.dt;
  RecordedRun run;
  auto& m = run.amplitude;
  m.nt = nt;
  m.nx = grid.nx;
  m.a.resize(nt * grid.nx);
  m.t0 = t0;
  m.dt_record = cadence;
  m.x0 = grid.x0();
  m.dx = grid.dx();
  for (std::size_t i = 0; i < nt; ++i) {
    const auto f = peregrine_field(grid, t0 + static_cast<double>(i) * cadence);
    for (std::size_t j = 0; j < grid.nx; ++j) m.a[i * grid.nx + j] = std::abs(f.values[j]);
    if (options.keep_complex) run.complex_rows.insert(run.complex_rows.end(), f.values.begin(), f.values.end());
    if (i == 0) run.diagnostics.initial = conserved_quantities(f, grid);
    if (i + 1 == nt) run.diagnostics.final = conserved_quantities(f, grid);
  }
  return run;
}

RecordedRun evolve_record(const SimGrid& grid, const ComplexField& initial,
                          const RecordOptions& options,
                          const std::optional<GaussParams>& params) {
  grid.validate();
  if (params) params->validate();
  const auto nt = recorded_rows(grid, initial.t, options);
  const double cadence = static_cast<double>(options.record_every) * grid.dt;

  RecordedRun run;
  auto& m = run.amplitude;
  m.nt = nt;
  m.nx = grid.nx;
  m.a.resize(nt * grid.nx);
  m.t0 = initial.t;
  m.dt_record = cadence;
  m.x0 = grid.x0();
  m.dx = grid.dx();
  m.params = params;
  if (params && cone_reaches_boundary(grid, *params)) {
    std::ostringstream os;
    os << "modulational-instability cone may reach the periodic boundary before t = "
       << grid.t_max << " (2 t_max + 3 mu > L/2)";
    run.diagnostics.warnings.push_back(os.str());
  }

  IfRk4Stepper stepper(grid, options.solver);
  stepper.load(initial);
  run.diagnostics.initial = conserved_quantities(initial, grid);

  auto record = [&](std::size_t row) {
    std::span<double> dst(m.a.data() + row * grid.nx, grid.nx);
    stepper.amplitude_into(dst);
    if (options.keep_complex) {
      const auto f = stepper.field();
      run.complex_rows.insert(run.complex_rows.end(), f.values.begin(), f.values.end());
    }
  };
  record(0);
  for (std::size_t row = 1; row < nt; ++row) {
    for (std::size_t s = 0; s < options.record_every; ++s) stepper.step();
    record(row);
  }
  run.diagnostics.steps = (nt - 1) * options.record_every;
  run.diagnostics.final = conserved_quantities(stepper.field(), grid);
  return run;
}

SimGrid auto_grid(const GaussParams& p, const GridRequest& req) {
  p.validate();
  SimGrid g;
  g.t_max = req.t_max;
  g.dt = req.dt;
  g.length = req.length.value_or(std::max(80.0, 4.0 * req.t_max + 8.0 * p.mu));
  if (req.nx) {
    g.nx = *req.nx;
  } else {
    constexpr double kMaxDx = 80.0 / 1024.0;
    std::size_t n = 1024;
    while (g.length / static_cast<double>(n) > kMaxDx * (1.0 + 1e-12)) n *= 2;
    g.nx = n;
  }
  return g;
}

}  // namespace rogue::nlse
