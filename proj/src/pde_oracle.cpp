#include "metaflip/pde_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fftw3.h>

namespace metaflip {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// angular wavenumber for FFT bin m of an n-point grid with spacing h
double wavenumber(int m, int n, double h) {
  const int signed_m = m < n / 2 ? m : m - n;
  return 2.0 * std::numbers::pi * signed_m / (n * h);
}

long long step_count(double from, double to, double dt) {
  if (to < from - 1e-12) throw ContractViolation("evolve: target time is before the current time");
  return std::llround((to - from) / dt);
}

fftw_complex* as_fftw(std::vector<Complex>& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ParseError("snapshot: truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void GridSpec::validate() const {
  if (!is_power_of_two(n) || n < 64) throw ContractViolation("GridSpec: n must be a power of two >= 64");
  if (!(half_width > 0) || !std::isfinite(half_width)) throw ContractViolation("GridSpec: L must be positive");
  if (!(dt > 0) || dt > 0.01) throw ContractViolation("GridSpec: dt must be in (0, 0.01]");
}

GridState init_packet(const GridSpec& spec, double b, double c) {
  spec.validate();
  if (!(b > 0)) throw ContractViolation("init_packet: width must be positive");
  if (!(6.0 * b + std::abs(c) < spec.half_width))
    throw ContractViolation("init_packet: packet too wide for the domain (need 6b + |c| < L)");
  GridState state{spec, std::vector<Complex>(static_cast<std::size_t>(spec.n) * spec.n), 0.0, 0.0};
  double norm = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    const double dxc = spec.coordinate(i) - c;
    for (int j = 0; j < spec.n; ++j) {
      const double dyc = spec.coordinate(j) - c;
      const double v = std::exp(-(dxc * dxc + dyc * dyc) / (2.0 * b * b));
      state.psi[static_cast<std::size_t>(i) * spec.n + j] = v;
      norm += v * v;
    }
  }
  const double scale = 1.0 / std::sqrt(norm * spec.spacing() * spec.spacing());
  for (auto& z : state.psi) z *= scale;
  return state;
}

struct SplitStepPropagator::Impl {
  std::vector<Complex> half_potential;  // exp(-i V dt/2)
  std::vector<Complex> full_potential;  // exp(-i V dt)
  std::vector<Complex> kinetic;         // exp(-i k^2 dt/2) / n^2
  std::vector<Complex> buffer;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

SplitStepPropagator::SplitStepPropagator(const GridSpec& spec, double lambda)
    : spec_(spec), impl_(std::make_unique<Impl>()) {
  spec_.validate();
  const int n = spec_.n;
  const double h = spec_.spacing();
  const double dt = spec_.dt;
  const auto total = static_cast<std::size_t>(n) * n;
  impl_->half_potential.resize(total);
  impl_->full_potential.resize(total);
  impl_->kinetic.resize(total);
  impl_->buffer.resize(total);
  const double norm = 1.0 / static_cast<double>(total);
  for (int i = 0; i < n; ++i) {
    const double x = spec_.coordinate(i);
    const double kx = wavenumber(i, n, h);
    for (int j = 0; j < n; ++j) {
      const double y = spec_.coordinate(j);
      const double ky = wavenumber(j, n, h);
      const double potential = 0.5 * (-x * x - y * y + 0.5 * lambda * (x - y) * (x - y));
      const auto idx = static_cast<std::size_t>(i) * n + j;
      impl_->half_potential[idx] = std::polar(1.0, -0.5 * potential * dt);
      impl_->full_potential[idx] = std::polar(1.0, -potential * dt);
      impl_->kinetic[idx] = std::polar(norm, -0.5 * (kx * kx + ky * ky) * dt);
    }
  }
  auto* buf = as_fftw(impl_->buffer);
  impl_->forward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->backward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

SplitStepPropagator::~SplitStepPropagator() {
  if (impl_) {
    fftw_destroy_plan(impl_->forward);
    fftw_destroy_plan(impl_->backward);
  }
}

void SplitStepPropagator::advance(GridState& state, double t_target, const EvolveOptions& options) const {
  if (state.spec.n != spec_.n || state.spec.half_width != spec_.half_width || state.spec.dt != spec_.dt)
    throw ContractViolation("SplitStepPropagator: state grid does not match the propagator");
  const long long steps = step_count(state.t, t_target, spec_.dt);
  if (steps == 0) return;

  auto& buf = impl_->buffer;
  const auto total = buf.size();
  auto multiply = [&](const std::vector<Complex>& factor) {
    for (std::size_t k = 0; k < total; ++k) buf[k] *= factor[k];
  };

  std::copy(state.psi.begin(), state.psi.end(), buf.begin());
  // V/2 K V K V ... K V/2: adjacent half potential steps merged
  multiply(impl_->half_potential);
  for (long long s = 0; s < steps; ++s) {
    fftw_execute(impl_->forward);
    multiply(impl_->kinetic);
    fftw_execute(impl_->backward);
    const bool last = s + 1 == steps;
    multiply(last ? impl_->half_potential : impl_->full_potential);

    const double t_now = state.t + static_cast<double>(s + 1) * spec_.dt;
    // the monitor only needs |psi|, which the pending half potential step does not change
    GridState view{spec_, {}, t_now, 0.0};
    view.psi.swap(buf);
    const double mass = boundary_mass(view);
    view.psi.swap(buf);
    state.peak_boundary_mass = std::max(state.peak_boundary_mass, mass);
    if (mass > options.leakage_threshold && options.policy == LeakagePolicy::Abort) {
      std::ostringstream msg;
      msg << "boundary leakage " << mass << " exceeds " << options.leakage_threshold << " at t = " << t_now
          << "; enlarge the domain half-width L";
      throw LeakageError(msg.str(), t_now, mass);
    }
  }
  std::copy(buf.begin(), buf.end(), state.psi.begin());
  state.t += static_cast<double>(steps) * spec_.dt;
}

GridState evolve(GridState state, double lambda, double t_target, const EvolveOptions& options) {
  if (step_count(state.t, t_target, state.spec.dt) == 0) return state;
  SplitStepPropagator(state.spec, lambda).advance(state, t_target, options);
  return state;
}

double disagreement_from_grid(const GridState& state) {
  const int n = state.spec.n;
  const double area = state.spec.spacing() * state.spec.spacing();
  const int zero = n / 2;  // x_{n/2} = 0
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double weight;
      if (i == zero || j == zero) weight = 0.5;
      else if ((i < zero) != (j < zero)) weight = 1.0;
      else continue;
      sum += weight * std::norm(state.at(i, j));
    }
  return sum * area;
}

double discrete_norm(const GridState& state) {
  double sum = 0.0;
  for (const auto& z : state.psi) sum += std::norm(z);
  return sum * state.spec.spacing() * state.spec.spacing();
}

double norm_check(const GridState& state) { return std::abs(discrete_norm(state) - 1.0); }

double boundary_mass(const GridState& state, int cells) {
  const int n = state.spec.n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const bool edge_row = i < cells || i >= n - cells;
    for (int j = 0; j < n; ++j)
      if (edge_row || j < cells || j >= n - cells) sum += std::norm(state.at(i, j));
  }
  return sum * state.spec.spacing() * state.spec.spacing();
}

MarginalMoments marginal_moments(const GridState& state) {
  const int n = state.spec.n;
  const double area = state.spec.spacing() * state.spec.spacing();
  double su = 0, suu = 0, sv = 0, svv = 0;
  for (int i = 0; i < n; ++i) {
    const double x = state.spec.coordinate(i);
    for (int j = 0; j < n; ++j) {
      const double y = state.spec.coordinate(j);
      const double w = std::norm(state.at(i, j)) * area;
      const double u = (x + y) / std::numbers::sqrt2;
      const double v = (x - y) / std::numbers::sqrt2;
      su += w * u;
      suu += w * u * u;
      sv += w * v;
      svv += w * v * v;
    }
  }
  return {su, suu - su * su, sv, svv - sv * sv};
}

double l2_distance(const GridState& a, const GridState& b) {
  if (a.spec.n != b.spec.n || a.spec.half_width != b.spec.half_width)
    throw ContractViolation("l2_distance: grids differ");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.psi.size(); ++k) sum += std::norm(a.psi[k] - b.psi[k]);
  return std::sqrt(sum * a.spec.spacing() * a.spec.spacing());
}

void write_snapshot(std::ostream& out, const GridState& state) {
  put_le<std::int64_t>(out, state.spec.n);
  put_le<double>(out, state.spec.half_width);
  put_le<double>(out, state.t);
  for (const auto& z : state.psi) {
    put_le<double>(out, z.real());
    put_le<double>(out, z.imag());
  }
}

void write_snapshot(const std::filesystem::path& path, const GridState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_snapshot(out, state);
}

GridState read_snapshot(std::istream& in, double dt) {
  GridState state;
  const auto n = get_le<std::int64_t>(in);
  if (n < 1 || n > (1 << 16)) throw ParseError("snapshot: implausible grid size");
  state.spec.n = static_cast<int>(n);
  state.spec.half_width = get_le<double>(in);
  state.spec.dt = dt;
  state.t = get_le<double>(in);
  state.psi.resize(static_cast<std::size_t>(n) * n);
  for (auto& z : state.psi) {
    const double re = get_le<double>(in);
    const double im = get_le<double>(in);
    z = {re, im};
  }
  return state;
}

void write_marginal_csv(std::ostream& out, const GridState& state) {
  const int n = state.spec.n;
  const double h = state.spec.spacing();
  std::vector<double> mx(n, 0.0), my(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double w = std::norm(state.at(i, j)) * h;
      mx[i] += w;
      my[j] += w;
    }
  out << "x,marginal_x,marginal_y\n";
  out.precision(17);
  for (int i = 0; i < n; ++i) out << state.spec.coordinate(i) << ',' << mx[i] << ',' << my[i] << '\n';
}

// --- 1-D ----------------------------------------------------------------------

void LineSpec::validate() const {
  if (!is_power_of_two(n) || n < 64) throw ContractViolation("LineSpec: n must be a power of two >= 64");
  if (!(half_width > 0)) throw ContractViolation("LineSpec: half width must be positive");
  if (!(dt > 0) || dt > 0.01) throw ContractViolation("LineSpec: dt must be in (0, 0.01]");
}

LineState init_line_packet(const LineSpec& spec, double b, double centre) {
  spec.validate();
  if (!(b > 0)) throw ContractViolation("init_line_packet: width must be positive");
  LineState state{spec, std::vector<Complex>(spec.n), 0.0};
  double norm = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    const double d = spec.coordinate(i) - centre;
    const double v = std::exp(-d * d / (2.0 * b * b));
    state.psi[i] = v;
    norm += v * v;
  }
  const double scale = 1.0 / std::sqrt(norm * spec.spacing());
  for (auto& z : state.psi) z *= scale;
  return state;
}

LineState evolve_line(LineState state, double curvature, double t_target) {
  const auto& spec = state.spec;
  spec.validate();
  const long long steps = step_count(state.t, t_target, spec.dt);
  if (steps == 0) return state;
  const int n = spec.n;
  const double h = spec.spacing();
  std::vector<Complex> half(n), full(n), kinetic(n);
  for (int i = 0; i < n; ++i) {
    const double s = spec.coordinate(i);
    const double potential = 0.5 * curvature * s * s;
    half[i] = std::polar(1.0, -0.5 * potential * spec.dt);
    full[i] = std::polar(1.0, -potential * spec.dt);
    const double k = wavenumber(i, n, h);
    kinetic[i] = std::polar(1.0 / n, -0.5 * k * k * spec.dt);
  }
  auto& buf = state.psi;
  fftw_plan forward = fftw_plan_dft_1d(n, as_fftw(buf), as_fftw(buf), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan backward = fftw_plan_dft_1d(n, as_fftw(buf), as_fftw(buf), FFTW_BACKWARD, FFTW_ESTIMATE);
  auto multiply = [&](const std::vector<Complex>& f) {
    for (int i = 0; i < n; ++i) buf[i] *= f[i];
  };
  multiply(half);
  for (long long s = 0; s < steps; ++s) {
    fftw_execute(forward);
    multiply(kinetic);
    fftw_execute(backward);
    multiply(s + 1 == steps ? half : full);
  }
  fftw_destroy_plan(forward);
  fftw_destroy_plan(backward);
  state.t += static_cast<double>(steps) * spec.dt;
  return state;
}

double line_variance(const LineState& state) {
  double m0 = 0, m1 = 0, m2 = 0;
  for (int i = 0; i < state.spec.n; ++i) {
    const double s = state.spec.coordinate(i);
    const double w = std::norm(state.psi[i]);
    m0 += w;
    m1 += w * s;
    m2 += w * s * s;
  }
  const double mean = m1 / m0;
  return m2 / m0 - mean * mean;
}

LineSpec line_spec_for(const GridSpec& spec) {
  LineSpec line;
  line.n = 4 * spec.n;
  line.half_width = 0.5 * line.n * spec.spacing() / std::numbers::sqrt2;
  line.dt = spec.dt;
  return line;
}

GridState tensor_uv_to_xy(const LineState& phi, const LineState& chi, const GridSpec& spec) {
  const LineSpec expect = line_spec_for(spec);
  for (const auto* line : {&phi, &chi})
    if (line->spec.n != expect.n || std::abs(line->spec.half_width - expect.half_width) > 1e-12 * expect.half_width)
      throw ContractViolation("tensor_uv_to_xy: line grids must come from line_spec_for(spec)");
  const int n = spec.n;
  const int centre = expect.n / 2;  // line index of s = 0
  GridState out{spec, std::vector<Complex>(static_cast<std::size_t>(n) * n), phi.t, 0.0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // x_i = (i - n/2) dx, so u = (i + j - n) dx/sqrt2, v = (i - j) dx/sqrt2
      const int iu = centre + (i + j - n);
      const int iv = centre + (i - j);
      out.psi[static_cast<std::size_t>(i) * n + j] = phi.psi[iu] * chi.psi[iv];
    }
  return out;
}

}  // namespace metaflip
