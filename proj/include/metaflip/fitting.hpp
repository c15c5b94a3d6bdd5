#pragma once

// Least-squares fit of (omega, lambda, b) to a disagreement-vs-time record:
// coarse grid over the bounds, then Nelder-Mead refinement of the best seeds.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaflip/flipflop.hpp"

namespace metaflip {

struct Bounds {
  double min = 0.0;
  double max = 1.0;

  double width() const { return max - min; }
  bool contains(double v) const { return v >= min && v <= max; }
  double clamp(double v) const;
};

struct FitParams {
  double omega = 1.0;
  double lambda = 1.81;
  double b = 0.556;

  auto operator<=>(const FitParams&) const = default;
};

struct FitConfig {
  Bounds omega{0.5, 2.0};
  Bounds lambda{0.5, 3.0};
  Bounds b{0.2, 1.5};
  int grid_seeds = 8;      // per axis
  int refine_seeds = 6;    // best grid points handed to the simplex
  double tolerance = 1e-7; // simplex size at which refinement stops
  int max_iters = 4000;
  std::optional<double> fixed_omega;  // pins omega; the fit becomes 2-D

  /// Throws ContractViolation.
  void validate() const;
};

struct FitResult {
  double omega = 0.0;
  double lambda = 0.0;
  double b = 0.0;
  double objective = 0.0;
  std::vector<double> residuals;
  bool converged = false;
  bool degenerate = false;  // the data cannot identify every parameter
  int iterations = 0;
  std::string message;

  FitParams params() const { return {omega, lambda, b}; }
};

/// Pr(omega t; lambda, b) with b dimensionless (hfac = 1/b^4).
double model_probability(const FitParams& params, double t);

std::vector<double> residuals(const FitParams& params, const DisagreementCurve& data);

/// Sum of squared residuals.
double objective(const FitParams& params, const DisagreementCurve& data);

/// Needs at least 4 points (ContractViolation otherwise). Deterministic:
/// ties between candidates go to the lexicographically smaller parameters.
FitResult fit(const DisagreementCurve& data, const FitConfig& config = {});

/// Fitted curve evaluated on the data times.
DisagreementCurve fitted_curve(const FitResult& result, const DisagreementCurve& data);

nlohmann::json to_json(const FitResult& result);

}  // namespace metaflip
