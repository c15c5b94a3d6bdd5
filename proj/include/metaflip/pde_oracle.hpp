#pragma once

// Split-step (Strang) spectral solver for the dimensionless two-particle
// equation
//
//   i dpsi/dt = 1/2 (-d2/dx2 - d2/dy2 - x^2 - y^2 + (lambda/2)(x-y)^2) psi
//
// on the periodic square [-L, L)^2, plus the separated 1-D problems in
// u = (x+y)/sqrt2 and v = (x-y)/sqrt2. Used as an independent check of the
// closed-form densities.

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "metaflip/errors.hpp"

namespace metaflip {

using Complex = std::complex<double>;

/// Boundary mass exceeded the monitor threshold; the domain must grow.
class LeakageError : public NumericalDomainError {
 public:
  LeakageError(const std::string& what, double time, double mass)
      : NumericalDomainError(what), time_(time), mass_(mass) {}
  double time() const noexcept { return time_; }
  double boundary_mass() const noexcept { return mass_; }

 private:
  double time_;
  double mass_;
};

struct GridSpec {
  int n = 256;              // points per axis, power of two, >= 64
  double half_width = 12.0; // L
  double dt = 0.005;

  /// Throws ContractViolation.
  void validate() const;
  double spacing() const { return 2.0 * half_width / n; }
  /// x_i = -L + i dx, so x_{n/2} = 0 exactly.
  double coordinate(int i) const { return -half_width + i * spacing(); }
};

struct GridState {
  GridSpec spec;
  std::vector<Complex> psi;  // row-major: psi[i * n + j] = psi(x_i, y_j)
  double t = 0.0;
  double peak_boundary_mass = 0.0;  // largest monitor reading seen so far

  Complex at(int i, int j) const { return psi[static_cast<std::size_t>(i) * spec.n + j]; }
};

/// Sampled product Gaussian exp(-((x-c)^2 + (y-c)^2)/(2b^2)), renormalized
/// to unit discrete norm. Throws ContractViolation unless 6b + |c| < L.
GridState init_packet(const GridSpec& spec, double b, double c);

enum class LeakagePolicy {
  Abort,   // throw LeakageError
  Record,  // keep going; the peak reading is kept in GridState
};

struct EvolveOptions {
  double leakage_threshold = 1e-10;  // |psi|^2 mass within 2 cells of the boundary
  LeakagePolicy policy = LeakagePolicy::Abort;
};

/// Reusable propagator for one (grid, lambda); owns FFT plans and phase tables.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const GridSpec& spec, double lambda);
  ~SplitStepPropagator();
  SplitStepPropagator(const SplitStepPropagator&) = delete;
  SplitStepPropagator& operator=(const SplitStepPropagator&) = delete;

  /// Advances to t_target (rounded to a whole number of steps).
  void advance(GridState& state, double t_target, const EvolveOptions& options = {}) const;

  const GridSpec& spec() const noexcept { return spec_; }

 private:
  struct Impl;
  GridSpec spec_;
  std::unique_ptr<Impl> impl_;
};

GridState evolve(GridState state, double lambda, double t_target, const EvolveOptions& options = {});

/// Mass in the cells with x*y < 0; cells on an axis count half.
double disagreement_from_grid(const GridState& state);

/// sum |psi|^2 dx^2
double discrete_norm(const GridState& state);
/// |discrete_norm - 1|
double norm_check(const GridState& state);

/// Mass within `cells` grid cells of the boundary.
double boundary_mass(const GridState& state, int cells = 2);

struct MarginalMoments {
  double mean_u = 0.0, var_u = 0.0;
  double mean_v = 0.0, var_v = 0.0;
};

/// Moments of u = (x+y)/sqrt2 and v = (x-y)/sqrt2 under |psi|^2.
MarginalMoments marginal_moments(const GridState& state);

/// Discrete L2 distance sqrt(sum |a-b|^2 dx^2). Grids must match.
double l2_distance(const GridState& a, const GridState& b);

/// Binary dump: int64 n, float64 L, float64 t (little-endian), then n*n
/// row-major (re, im) float64 pairs.
void write_snapshot(std::ostream& out, const GridState& state);
void write_snapshot(const std::filesystem::path& path, const GridState& state);
/// Reads a dump; dt is not stored and is taken from `dt`.
GridState read_snapshot(std::istream& in, double dt = 0.005);

/// CSV "x,marginal_x,marginal_y" of the two single-particle densities.
void write_marginal_csv(std::ostream& out, const GridState& state);

// --- separated 1-D problems -------------------------------------------------

struct LineSpec {
  int n = 1024;
  double half_width = 24.0;
  double dt = 0.005;

  void validate() const;
  double spacing() const { return 2.0 * half_width / n; }
  double coordinate(int i) const { return -half_width + i * spacing(); }
};

struct LineState {
  LineSpec spec;
  std::vector<Complex> psi;
  double t = 0.0;
};

/// Normalized Gaussian exp(-(s - centre)^2/(2b^2)) on the line.
LineState init_line_packet(const LineSpec& spec, double b, double centre);

/// i dphi/dt = 1/2 (-d2/ds2 + curvature s^2) phi; curvature is -1 for u and
/// lambda - 1 for v.
LineState evolve_line(LineState state, double curvature, double t_target);

double line_variance(const LineState& state);

/// Line grid whose lattice contains every u and v value of `spec`'s nodes:
/// spacing dx/sqrt2, 4n points.
LineSpec line_spec_for(const GridSpec& spec);

/// psi(x_i, y_j) = phi(u) chi(v) sampled from two states on line_spec_for(spec).
GridState tensor_uv_to_xy(const LineState& phi, const LineState& chi, const GridSpec& spec);

}  // namespace metaflip
