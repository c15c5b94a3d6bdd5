#include "metaflip/flipflop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "metaflip/errors.hpp"

namespace metaflip {

namespace {

constexpr double kSeriesBand = 1e-9;  // |lambda - 1| below which s_lambda uses its series

// cosh(a)/cosh(b) without overflow for large arguments
double cosh_ratio(double a, double b) {
  a = std::abs(a);
  b = std::abs(b);
  return std::exp(a - b) * (1.0 + std::exp(-2.0 * a)) / (1.0 + std::exp(-2.0 * b));
}

struct Widths {
  double b1sq, b2sq, centre_u;
};

Widths widths_at(double t, const FlipflopParams& dimless) {
  const double hfac = dimless.hfac();
  return {b1_squared(dimless.width, t, hfac), b2_squared(dimless.width, dimless.lambda, t, hfac),
          std::numbers::sqrt2 * dimless.bias * std::cosh(t)};
}

double density_dimless(double x, double y, const Widths& w) {
  const double u = (x + y) / std::numbers::sqrt2 - w.centre_u;
  const double v = (x - y) / std::numbers::sqrt2;
  return std::exp(-u * u / w.b1sq - v * v / w.b2sq) / (std::numbers::pi * std::sqrt(w.b1sq * w.b2sq));
}

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

}  // namespace

std::string to_string(Units u) { return u == Units::Physical ? "physical" : "dimensionless"; }

Units units_from_string(const std::string& s) {
  if (s == "physical") return Units::Physical;
  if (s == "dimensionless") return Units::Dimensionless;
  throw ContractViolation("unknown units '" + s + "' (expected physical|dimensionless)");
}

double FlipflopParams::omega() const { return std::sqrt(spring / mass); }

double FlipflopParams::length_scale() const {
  return units == Units::Physical ? std::sqrt(hbar / (mass * omega())) : 1.0;
}

double FlipflopParams::hfac() const {
  const double b = width / length_scale();
  return 1.0 / (b * b * b * b);
}

void FlipflopParams::validate() const {
  for (double v : {mass, spring, hbar, lambda, width, bias})
    if (!std::isfinite(v)) throw ContractViolation("FlipflopParams: non-finite parameter");
  if (mass <= 0 || spring <= 0 || hbar <= 0)
    throw ContractViolation("FlipflopParams: mass, spring constant and hbar must be positive");
  if (width <= 0) throw ContractViolation("FlipflopParams: packet width must be positive");
}

FlipflopParams to_dimensionless(const FlipflopParams& p) {
  p.validate();
  if (p.units == Units::Dimensionless) return p;
  FlipflopParams out = p;
  const double ell = p.length_scale();
  out.width = p.width / ell;
  out.bias = p.bias / ell;
  out.units = Units::Dimensionless;
  return out;
}

FlipflopParams to_physical(const FlipflopParams& p) {
  p.validate();
  if (p.units == Units::Physical) return p;
  FlipflopParams out = p;
  out.units = Units::Physical;
  const double ell = out.length_scale();
  out.width = p.width * ell;
  out.bias = p.bias * ell;
  return out;
}

double time_factor(const FlipflopParams& p) { return p.units == Units::Physical ? p.omega() : 1.0; }

double s_lambda(double lambda, double t) {
  const double d = lambda - 1.0;
  if (std::abs(d) < kSeriesBand) {
    // sin^2(x)/d with x^2 = d t^2: t^2 (1 - x^2/3 + 2 x^4/45)
    const double x2 = d * t * t;
    return t * t * (1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 45.0);
  }
  if (d > 0) {
    const double s = std::sin(std::sqrt(d) * t);
    return s * s / d;
  }
  const double s = std::sinh(std::sqrt(-d) * t);
  return s * s / -d;
}

double b1_squared(double b, double t, double hfac) {
  const double s = std::sinh(t);
  return b * b * (1.0 + (hfac + 1.0) * s * s);
}

double b2_squared(double b, double lambda, double t, double hfac) {
  return b * b * (1.0 + (hfac - (lambda - 1.0)) * s_lambda(lambda, t));
}

double joint_density(double x, double y, double t, const FlipflopParams& p) {
  const auto d = to_dimensionless(p);
  const double ell = p.length_scale();
  const Widths w = widths_at(t * time_factor(p), d);
  return density_dimless(x / ell, y / ell, w) / (ell * ell);
}

double disagreement_probability(double t, const FlipflopParams& p) {
  if (p.bias != 0.0)
    throw ContractViolation(
        "disagreement_probability: closed form needs an on-edge start (bias 0); "
        "use quadrant_disagreement_numeric for biased packets");
  const auto d = to_dimensionless(p);
  const double tau = t * time_factor(p);
  const double hfac = d.hfac();
  const double ratio = b2_squared(1.0, d.lambda, tau, hfac) / b1_squared(1.0, tau, hfac);
  return 2.0 / std::numbers::pi * std::atan(std::sqrt(ratio));
}

QuadratureResult quadrant_mass_detail(double t, const FlipflopParams& p, ReadingPair region,
                                      double tolerance) {
  const auto d = to_dimensionless(p);
  const Widths w = widths_at(t * time_factor(p), d);
  // x on the half-line sign_x, y on sign_y
  const double sign_x = (region == ReadingPair::Reads10 || region == ReadingPair::Both1) ? 1.0 : -1.0;
  const double sign_y = (region == ReadingPair::Reads01 || region == ReadingPair::Both1) ? 1.0 : -1.0;

  // the density is a Gaussian in (u, v), so along any line it is Gaussian too
  const double inv1 = 1.0 / w.b1sq, inv2 = 1.0 / w.b2sq;
  const double sigma_line = 1.0 / std::sqrt(inv1 + inv2);
  const double mean_y = w.centre_u / std::numbers::sqrt2;
  const double sd_y = 0.5 * std::sqrt(w.b1sq + w.b2sq);
  constexpr double kSpan = 12.0;
  const double reach = std::abs(mean_y) + kSpan * sd_y;

  double inner_error = 0.0;
  // s = |y| along the y half-line; integrate x over its half-line
  auto inner = [&](double s) {
    const double y = sign_y * s;
    const double centre = ((std::numbers::sqrt2 * w.centre_u - y) * inv1 + y * inv2) / (inv1 + inv2);
    double lo = centre - kSpan * sigma_line;
    double hi = centre + kSpan * sigma_line;
    if (sign_x < 0) hi = std::min(hi, 0.0);
    else lo = std::max(lo, 0.0);
    if (hi <= lo) return 0.0;
    double err = 0.0;
    const double v = GK::integrate([&](double x) { return density_dimless(x, y, w); }, lo, hi, 8, 1e-11, &err);
    inner_error = std::max(inner_error, err);
    return v;
  };

  // panels in s: geometric out from the axis plus a comb across the packet centre
  std::vector<double> cuts{0.0, reach};
  const double fine = std::max(1e-6, 0.25 * std::sqrt(std::min(w.b1sq, w.b2sq)));
  for (double s = fine; s < reach; s *= 2.0) cuts.push_back(s);
  for (int j = -static_cast<int>(kSpan); j <= static_cast<int>(kSpan); ++j) {
    const double s = sign_y * mean_y + j * sd_y;
    if (s > 0.0 && s < reach) cuts.push_back(s);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  QuadratureResult out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    out.value += GK::integrate(inner, cuts[i], cuts[i + 1], 8, 1e-10, &err);
    out.error_estimate += err;
  }
  out.error_estimate += inner_error * reach;
  if (!(out.error_estimate <= tolerance))
    throw NumericalDomainError("quadrant quadrature did not converge: estimated error " +
                               std::to_string(out.error_estimate));
  return out;
}

double quadrant_mass(double t, const FlipflopParams& p, ReadingPair region, double tolerance) {
  return quadrant_mass_detail(t, p, region, tolerance).value;
}

QuadratureResult quadrant_disagreement_numeric_detail(double t, const FlipflopParams& p, double tolerance) {
  const auto q01 = quadrant_mass_detail(t, p, ReadingPair::Reads01, tolerance / 2);
  const auto q10 = quadrant_mass_detail(t, p, ReadingPair::Reads10, tolerance / 2);
  QuadratureResult out{q01.value + q10.value, q01.error_estimate + q10.error_estimate};
  if (!(out.error_estimate <= tolerance))
    throw NumericalDomainError("quadrant quadrature did not converge: estimated error " +
                               std::to_string(out.error_estimate));
  return out;
}

double quadrant_disagreement_numeric(double t, const FlipflopParams& p, double tolerance) {
  return quadrant_disagreement_numeric_detail(t, p, tolerance).value;
}

double classical_disagreement(double t, double lambda, double omega) {
  const double tau = omega * t;
  const double d = lambda - 1.0;
  double ratio;
  if (d >= 0) {
    ratio = std::abs(std::cos(std::sqrt(d) * tau)) / std::cosh(tau);
  } else {
    ratio = cosh_ratio(std::sqrt(-d) * tau, tau);
  }
  return 2.0 / std::numbers::pi * std::atan(ratio);
}

DisagreementCurve disagreement_curve(const FlipflopParams& p, double t_min, double t_max, double dt,
                                     CurveModel model) {
  if (!(dt > 0) || !(t_max >= t_min) || t_min < 0)
    throw ContractViolation("disagreement_curve: need 0 <= t_min <= t_max and dt > 0");
  p.validate();
  const auto steps = static_cast<std::size_t>(std::llround((t_max - t_min) / dt));
  DisagreementCurve curve;
  curve.units = p.units;
  curve.times.reserve(steps + 1);
  curve.probabilities.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = t_min + static_cast<double>(i) * dt;
    double prob = 0.0;
    switch (model) {
      case CurveModel::Quantum: prob = disagreement_probability(t, p); break;
      case CurveModel::Classical: prob = classical_disagreement(t, p.lambda, time_factor(p)); break;
      case CurveModel::QuantumNumeric: prob = quadrant_disagreement_numeric(t, p); break;
    }
    curve.times.push_back(t);
    curve.probabilities.push_back(std::clamp(prob, 0.0, 1.0));
  }
  return curve;
}

std::vector<std::size_t> interior_local_maxima(const std::vector<double>& values) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < values.size(); ++i)
    if (values[i] > values[i - 1] && values[i] > values[i + 1]) out.push_back(i);
  return out;
}

std::string to_string(ReadingPair r) {
  switch (r) {
    case ReadingPair::Both0: return "00";
    case ReadingPair::Reads01: return "01";
    case ReadingPair::Reads10: return "10";
    case ReadingPair::Both1: return "11";
  }
  return "??";
}

ReadingPair classify_reading(double x, double y) {
  const bool one_x = x > 0, one_y = y > 0;
  if (one_x && one_y) return ReadingPair::Both1;
  if (!one_x && !one_y) return ReadingPair::Both0;
  return one_x ? ReadingPair::Reads10 : ReadingPair::Reads01;
}

}  // namespace metaflip
