#pragma once

// Closed-form model of a metastable 1-bit recorder read twice: two
// particles on an inverted parabolic hump, coupled by (lambda/4)(x-y)^2.
// A reading of 0 is x<0 (resp. y<0), 1 is x>0; the readings disagree when
// x*y < 0.
//
// Everything is computed in dimensionless units (time in 1/omega, length in
// sqrt(hbar/(m omega)), omega = sqrt(k/m)); physical parameters convert at
// the boundary.

#include <string>
#include <vector>

namespace metaflip {

enum class Units { Dimensionless, Physical };

std::string to_string(Units u);
Units units_from_string(const std::string& s);

struct FlipflopParams {
  double mass = 1.0;
  double spring = 1.0;  // k
  double hbar = 1.0;
  double lambda = 1.81;
  double width = 0.556;  // initial packet width b, in `units` length
  double bias = 0.0;     // packet centre c, in `units` length
  Units units = Units::Dimensionless;

  double omega() const;         // sqrt(k/m)
  double length_scale() const;  // sqrt(hbar/(m omega)); 1 when dimensionless

  /// hbar^2/(omega^2 m^2 b^4) with b physical, i.e. 1/b^4 dimensionless.
  double hfac() const;

  /// Throws ContractViolation on non-positive scales or width, non-finite values.
  void validate() const;
};

/// Widths and bias divided by the natural length; mass, spring, hbar are
/// kept so the conversion can be undone.
FlipflopParams to_dimensionless(const FlipflopParams& p);
FlipflopParams to_physical(const FlipflopParams& p);

/// Time factor mapping `units` time to dimensionless time (omega, or 1).
double time_factor(const FlipflopParams& p);

/// sin^2(sqrt(lambda-1) t)/(lambda-1), continued through lambda = 1 (t^2)
/// and into lambda < 1 (sinh^2(sqrt(1-lambda) t)/(1-lambda)).
double s_lambda(double lambda, double t);

/// B_1^2(t) = b^2 [1 + (hfac + 1) sinh^2 t]   (unstable (x+y) direction)
double b1_squared(double b, double t, double hfac);
/// B_2^2(t) = b^2 [1 + (hfac - (lambda - 1)) s_lambda(lambda, t)]
double b2_squared(double b, double lambda, double t, double hfac);

/// |psi(x,y,t)|^2 at (x, y, t) in the units of `p` (density per area).
double joint_density(double x, double y, double t, const FlipflopParams& p);

/// Probability that the two readings disagree at time t, on-edge start
/// (bias 0) only: (2/pi) atan(B_2/B_1). Throws ContractViolation for bias != 0;
/// use quadrant_disagreement_numeric then.
double disagreement_probability(double t, const FlipflopParams& p);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive Gauss-Kronrod integral of joint_density over the quadrants
/// x*y < 0, for any bias. Throws NumericalDomainError when the error
/// estimate exceeds `tolerance`.
QuadratureResult quadrant_disagreement_numeric_detail(double t, const FlipflopParams& p,
                                                      double tolerance = 1e-8);
double quadrant_disagreement_numeric(double t, const FlipflopParams& p, double tolerance = 1e-8);

/// hbar -> 0 limit: (2/pi) atan(|cos(sqrt(lambda-1) omega t)| / cosh(omega t)),
/// with cosh(sqrt(1-lambda) omega t) in place of the cosine when lambda < 1.
double classical_disagreement(double t, double lambda, double omega = 1.0);

struct DisagreementCurve {
  std::vector<double> times;
  std::vector<double> probabilities;
  Units units = Units::Dimensionless;

  std::size_t size() const noexcept { return times.size(); }
};

enum class CurveModel { Quantum, Classical, QuantumNumeric };

/// Curve on t = t_min, t_min + dt, ..., t_max (inclusive, step count rounded).
DisagreementCurve disagreement_curve(const FlipflopParams& p, double t_min, double t_max, double dt,
                                     CurveModel model = CurveModel::Quantum);

/// Indices of interior strict local maxima (three-point test).
std::vector<std::size_t> interior_local_maxima(const std::vector<double>& values);

/// Readings of the two recorders for the 2^n = 4 outcome bins.
enum class ReadingPair { Both0, Reads01, Reads10, Both1 };
std::string to_string(ReadingPair r);
ReadingPair classify_reading(double x, double y);

/// Probability mass of one reading-pair quadrant by adaptive quadrature.
QuadratureResult quadrant_mass_detail(double t, const FlipflopParams& p, ReadingPair region,
                                      double tolerance = 1e-8);
double quadrant_mass(double t, const FlipflopParams& p, ReadingPair region, double tolerance = 1e-8);

}  // namespace metaflip
