#include "metaflip/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "metaflip/errors.hpp"

namespace metaflip {

namespace {

constexpr double kPenaltyWeight = 1e3;

struct Problem {
  const DisagreementCurve* data;
  const FitConfig* config;

  bool omega_free() const { return !config->fixed_omega.has_value(); }
  std::size_t dim() const { return omega_free() ? 3 : 2; }

  // raw simplex coordinates; unclamped
  FitParams unpack(const gsl_vector* x) const {
    FitParams p;
    std::size_t k = 0;
    p.omega = omega_free() ? gsl_vector_get(x, k++) : *config->fixed_omega;
    p.lambda = gsl_vector_get(x, k++);
    p.b = gsl_vector_get(x, k);
    return p;
  }

  void pack(const FitParams& p, gsl_vector* x) const {
    std::size_t k = 0;
    if (omega_free()) gsl_vector_set(x, k++, p.omega);
    gsl_vector_set(x, k++, p.lambda);
    gsl_vector_set(x, k, p.b);
  }

  FitParams project(FitParams p) const {
    if (omega_free()) p.omega = config->omega.clamp(p.omega);
    p.lambda = config->lambda.clamp(p.lambda);
    p.b = config->b.clamp(p.b);
    return p;
  }

  double penalized(const FitParams& raw) const {
    const FitParams p = project(raw);
    auto excess = [](double a, double b, double width) { return (a - b) / width; };
    const double eo = excess(raw.omega, p.omega, config->omega.width());
    const double el = excess(raw.lambda, p.lambda, config->lambda.width());
    const double eb = excess(raw.b, p.b, config->b.width());
    return objective(p, *data) + kPenaltyWeight * (eo * eo + el * el + eb * eb);
  }
};

double gsl_objective(const gsl_vector* x, void* params) {
  const auto* problem = static_cast<const Problem*>(params);
  return problem->penalized(problem->unpack(x));
}

struct Candidate {
  FitParams params;
  double value;
  int iterations = 0;
  bool converged = false;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value < b.value;
  return a.params < b.params;
}

std::vector<double> axis_points(const Bounds& bounds, int count) {
  std::vector<double> points(count);
  for (int k = 0; k < count; ++k) points[k] = bounds.min + (k + 0.5) / count * bounds.width();
  return points;
}

Candidate refine(const Problem& problem, const Candidate& seed) {
  const std::size_t dim = problem.dim();
  const FitConfig& config = *problem.config;
  gsl_vector* x = gsl_vector_alloc(dim);
  gsl_vector* step = gsl_vector_alloc(dim);
  problem.pack(seed.params, x);
  // initial simplex: half a grid cell per axis
  const FitParams steps{config.omega.width() / (2.0 * config.grid_seeds),
                        config.lambda.width() / (2.0 * config.grid_seeds),
                        config.b.width() / (2.0 * config.grid_seeds)};
  problem.pack(steps, step);

  gsl_multimin_function fn{&gsl_objective, dim, const_cast<Problem*>(&problem)};
  gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
  gsl_multimin_fminimizer_set(solver, &fn, x, step);

  Candidate out = seed;
  int iter = 0;
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && iter < config.max_iters) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), config.tolerance);
  }
  out.params = problem.project(problem.unpack(gsl_multimin_fminimizer_x(solver)));
  out.value = objective(out.params, *problem.data);
  out.iterations = iter;
  out.converged = status == GSL_SUCCESS && std::isfinite(out.value);

  gsl_multimin_fminimizer_free(solver);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return out;
}

// A free parameter is unidentifiable when moving it by 1% of its range leaves
// the objective unchanged.
bool flat_direction(const Problem& problem, const FitParams& best, double value) {
  const FitConfig& config = *problem.config;
  const double floor = 1e-12 * std::max<std::size_t>(1, problem.data->size());
  auto probe = [&](auto member, const Bounds& bounds) {
    double rise = 0.0;
    for (double sign : {-1.0, 1.0}) {
      FitParams p = best;
      p.*member = bounds.clamp(p.*member + sign * 0.01 * bounds.width());
      if (p.*member == best.*member) continue;
      rise = std::max(rise, std::abs(objective(p, *problem.data) - value));
    }
    return rise <= floor;
  };
  if (problem.omega_free() && probe(&FitParams::omega, config.omega)) return true;
  return probe(&FitParams::lambda, config.lambda) || probe(&FitParams::b, config.b);
}

}  // namespace

double Bounds::clamp(double v) const { return std::clamp(v, min, max); }

void FitConfig::validate() const {
  for (const Bounds* bounds : {&omega, &lambda, &b})
    if (!std::isfinite(bounds->min) || !std::isfinite(bounds->max) || !(bounds->min < bounds->max))
      throw ContractViolation("FitConfig: bounds must be finite with min < max");
  if (!(omega.min > 0)) throw ContractViolation("FitConfig: omega bounds must be positive");
  if (!(b.min > 0)) throw ContractViolation("FitConfig: b bounds must be positive");
  if (grid_seeds < 1) throw ContractViolation("FitConfig: grid_seeds must be >= 1");
  if (refine_seeds < 1) throw ContractViolation("FitConfig: refine_seeds must be >= 1");
  if (!(tolerance > 0)) throw ContractViolation("FitConfig: tolerance must be positive");
  if (max_iters < 1) throw ContractViolation("FitConfig: max_iters must be >= 1");
  if (fixed_omega && !(*fixed_omega > 0 && std::isfinite(*fixed_omega)))
    throw ContractViolation("FitConfig: fixed omega must be positive");
}

double model_probability(const FitParams& params, double t) {
  const double tau = params.omega * t;
  const double hfac = 1.0 / std::pow(params.b, 4);
  const double b1 = b1_squared(params.b, tau, hfac);
  const double b2 = b2_squared(params.b, params.lambda, tau, hfac);
  return 2.0 / std::numbers::pi * std::atan(std::sqrt(std::max(b2, 0.0) / b1));
}

std::vector<double> residuals(const FitParams& params, const DisagreementCurve& data) {
  std::vector<double> r(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    r[i] = model_probability(params, data.times[i]) - data.probabilities[i];
  return r;
}

double objective(const FitParams& params, const DisagreementCurve& data) {
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = model_probability(params, data.times[i]) - data.probabilities[i];
    sum += r * r;
  }
  return sum;
}

FitResult fit(const DisagreementCurve& data, const FitConfig& config) {
  config.validate();
  if (data.size() < 4) throw ContractViolation("fit: need at least 4 data points");
  if (config.fixed_omega && !config.omega.contains(*config.fixed_omega))
    throw ContractViolation("fit: fixed omega lies outside the omega bounds");
  const Problem problem{&data, &config};

  // coarse grid
  const auto omegas = problem.omega_free() ? axis_points(config.omega, config.grid_seeds)
                                           : std::vector<double>{*config.fixed_omega};
  const auto lambdas = axis_points(config.lambda, config.grid_seeds);
  const auto bs = axis_points(config.b, config.grid_seeds);
  std::vector<Candidate> seeds;
  seeds.reserve(omegas.size() * lambdas.size() * bs.size());
  for (double w : omegas)
    for (double l : lambdas)
      for (double b : bs) {
        const FitParams p{w, l, b};
        seeds.push_back({p, objective(p, data)});
      }
  const auto keep = std::min<std::size_t>(config.refine_seeds, seeds.size());
  std::partial_sort(seeds.begin(), seeds.begin() + keep, seeds.end(), better);

  gsl_error_handler_t* previous = gsl_set_error_handler_off();
  std::vector<Candidate> refined;
  for (std::size_t k = 0; k < keep; ++k) refined.push_back(refine(problem, seeds[k]));
  gsl_set_error_handler(previous);

  const auto valid_end = std::partition(refined.begin(), refined.end(),
                                        [](const Candidate& c) { return std::isfinite(c.value); });
  FitResult result;
  Candidate best;
  if (valid_end == refined.begin()) {
    best = seeds.front();
    result.message = "all refinements diverged; returning the best grid point";
  } else {
    best = *std::min_element(refined.begin(), valid_end, better);
  }
  result.omega = best.params.omega;
  result.lambda = best.params.lambda;
  result.b = best.params.b;
  result.objective = objective(best.params, data);
  result.residuals = residuals(best.params, data);
  result.iterations = best.iterations;
  result.converged = best.converged;

  const auto [lo, hi] = std::minmax_element(data.probabilities.begin(), data.probabilities.end());
  if (*hi - *lo == 0.0 || flat_direction(problem, best.params, result.objective)) {
    result.degenerate = true;
    result.converged = false;
    result.message = "degenerate data: objective is flat in at least one parameter";
  } else if (!result.converged && result.message.empty()) {
    result.message = "simplex did not reach the size tolerance within max_iters";
  }
  return result;
}

DisagreementCurve fitted_curve(const FitResult& result, const DisagreementCurve& data) {
  DisagreementCurve out;
  out.units = data.units;
  out.times = data.times;
  out.probabilities.reserve(data.size());
  for (double t : data.times) out.probabilities.push_back(model_probability(result.params(), t));
  return out;
}

nlohmann::json to_json(const FitResult& result) {
  return {{"omega", result.omega},
          {"lambda", result.lambda},
          {"b", result.b},
          {"objective", result.objective},
          {"residuals", result.residuals},
          {"converged", result.converged},
          {"degenerate", result.degenerate},
          {"iterations", result.iterations},
          {"message", result.message}};
}

}  // namespace metaflip
