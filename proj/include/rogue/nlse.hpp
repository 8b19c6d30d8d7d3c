#pragma once

// Spectral simulation of the focusing NLSE  i u_t + u_xx / 2 + |u|^2 u = 0
// on a periodic domain [-L/2, L/2).

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rogue::nlse {

using cplx = std::complex<double>;

struct SimGrid {
  double length = 80.0;
  std::size_t nx = 1024;
  double dt = 1e-3;
  double t_max = 15.0;
  // dt must not exceed stability_factor * dx^2.
  double stability_factor = 1.0;

  double dx() const { return length / static_cast<double>(nx); }
  double x0() const { return -0.5 * length; }
  double x(std::size_t j) const { return x0() + static_cast<double>(j) * dx(); }
  std::size_t steps() const;
  // Angular wavenumbers in FFT storage order (0, 1, ..., nx/2-1, -nx/2, ..., -1) * 2pi/L.
  std::vector<double> wavenumbers() const;
  void validate() const;
};

struct ComplexField {
  std::vector<cplx> values;
  double t = 0.0;
};

struct GaussParams {
  double eps = 20.0;
  double mu = 2.0;
  void validate() const;
};

// Row-major nt x nx matrix of |u(x_j, t_i)| with axis metadata.
struct AmplitudeMatrix {
  std::size_t nt = 0;
  std::size_t nx = 0;
  std::vector<double> a;
  double t0 = 0.0;
  double dt_record = 0.0;
  double x0 = 0.0;
  double dx = 0.0;
  std::optional<GaussParams> params;

  double at(std::size_t i, std::size_t j) const { return a[i * nx + j]; }
  double& at(std::size_t i, std::size_t j) { return a[i * nx + j]; }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt_record; }
  double x(std::size_t j) const { return x0 + static_cast<double>(j) * dx; }
  double t_end() const { return nt == 0 ? t0 : time(nt - 1); }
  std::span<const double> row(std::size_t i) const { return {a.data() + i * nx, nx}; }
  void validate() const;
};

// Fundamental rogue wave (Peregrine breather).
cplx peregrine(double x, double t);
ComplexField peregrine_field(const SimGrid& grid, double t);

// u(x, 0) = 1 + (2/eps) exp(-x^2 / mu^2).
ComplexField gaussian_initial(const SimGrid& grid, const GaussParams& p);
ComplexField plane_wave(const SimGrid& grid);

struct SolverOptions {
  // Zero the nonlinear term above 2/3 of the Nyquist wavenumber.
  bool dealias = false;
};

// Integrating-factor RK4: dispersion is propagated exactly in Fourier space,
// the cubic term is advanced with classical RK4 on v_m = exp(i k_m^2 tau / 2) u_m.
// The reference time is reset every step so tau stays within [0, dt].
class IfRk4Stepper {
 public:
  IfRk4Stepper(const SimGrid& grid, SolverOptions options = {});
  ~IfRk4Stepper();
  IfRk4Stepper(IfRk4Stepper&&) noexcept;
  IfRk4Stepper& operator=(IfRk4Stepper&&) noexcept;

  void load(const ComplexField& field);
  // Throws BlowUpError when the new state is not finite.
  void step();
  double time() const { return time_; }
  ComplexField field() const;
  void amplitude_into(std::span<double> out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double time_ = 0.0;
};

ComplexField step_if_rk4(const ComplexField& field, const SimGrid& grid,
                         SolverOptions options = {});

struct Conserved {
  double mass = 0.0;
  double energy = 0.0;
};

// mass = sum |u|^2 dx, energy = sum (|u_x|^2 / 2 - |u|^4 / 2) dx, u_x spectral.
Conserved conserved_quantities(const ComplexField& field, const SimGrid& grid);

struct RunDiagnostics {
  Conserved initial;
  Conserved final;
  std::size_t steps = 0;
  std::vector<std::string> warnings;

  double mass_drift() const;
  double energy_drift() const;
};

struct RecordedRun {
  AmplitudeMatrix amplitude;
  // Complex rows (row-major nt x nx), filled only when requested.
  std::vector<cplx> complex_rows;
  RunDiagnostics diagnostics;
};

struct RecordOptions {
  std::size_t record_every = 25;
  bool keep_complex = false;
  SolverOptions solver;
};

// Steps from initial.t to grid.t_max, recording |u| every record_every steps.
// params only feeds metadata and the boundary-reach warning.
RecordedRun evolve_record(const SimGrid& grid, const ComplexField& initial,
                          const RecordOptions& options,
                          const std::optional<GaussParams>& params = std::nullopt);

// The exact Peregrine solution sampled at the times evolve_record would record
// when started from t0.  Diagnostics hold the conserved quantities of the
// first and last rows; steps stays 0.
RecordedRun peregrine_record(const SimGrid& grid, double t0, const RecordOptions& options);

// Grid sizing for a Gaussian run.  Unset length/nx are derived from t_max and mu:
// L = max(80, 4 t_max + 8 mu), nx = smallest power of two keeping dx <= 80/1024.
struct GridRequest {
  double t_max = 15.0;
  std::optional<double> length;
  std::optional<std::size_t> nx;
  double dt = 1e-3;
  double dt_record = 0.025;
};

SimGrid auto_grid(const GaussParams& p, const GridRequest& req);
std::size_t record_every_for(const SimGrid& grid, double dt_record);

// True when 2 t_max + 3 mu exceeds L/2.
bool cone_reaches_boundary(const SimGrid& grid, const GaussParams& p);

}  // namespace rogue::nlse
