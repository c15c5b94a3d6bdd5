#include <doctest.h>

#include <random>

#include "metaflip/errors.hpp"
#include "metaflip/fitting.hpp"

using namespace metaflip;

namespace {

const FitParams kTruth{1.0, 1.81, 0.556};

DisagreementCurve synthetic(const FitParams& p, int points, double t_max, double noise = 0.0,
                            std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, noise);
  DisagreementCurve c;
  for (int i = 0; i < points; ++i) {
    const double t = t_max * i / (points - 1);
    c.times.push_back(t);
    c.probabilities.push_back(model_probability(p, t) + (noise > 0 ? g(rng) : 0.0));
  }
  return c;
}

}  // namespace

TEST_SUITE("fitting") {

TEST_CASE("model probability matches the closed form") {
  FlipflopParams p;
  p.lambda = 1.81;
  p.width = 0.556;
  for (double t : {0.0, 0.7, 2.0, 5.5}) {
    CHECK(model_probability(kTruth, t) == doctest::Approx(disagreement_probability(t, p)).epsilon(1e-14));
    CHECK(model_probability({2.0, 1.81, 0.556}, t) == doctest::Approx(disagreement_probability(2.0 * t, p)));
  }
}

TEST_CASE("objective") {
  const auto data = synthetic(kTruth, 30, 6.0);
  CHECK(objective(kTruth, data) < 1e-20);

  DisagreementCurve origin;
  origin.times = {0.0};
  origin.probabilities = {0.5};
  CHECK(objective({0.7, 0.2, 2.0}, origin) < 1e-30);
  CHECK(objective({1.9, 2.9, 0.3}, origin) < 1e-30);

  CHECK(objective({1.0, 1.91, 0.556}, data) > 0.0);
  const auto r = residuals({1.0, 1.91, 0.556}, data);
  double sum = 0.0;
  for (double x : r) sum += x * x;
  CHECK(sum == doctest::Approx(objective({1.0, 1.91, 0.556}, data)));
}

TEST_CASE("objective is finite across the whole default box") {
  const auto data = synthetic(kTruth, 30, 6.0);
  const FitConfig config;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j)
      for (int k = 0; k <= 10; ++k) {
        const FitParams p{config.omega.min + 0.1 * i * config.omega.width(),
                          config.lambda.min + 0.1 * j * config.lambda.width(),
                          config.b.min + 0.1 * k * config.b.width()};
        CHECK(std::isfinite(objective(p, data)));
      }
}

TEST_CASE("config validation") {
  FitConfig c;
  CHECK_NOTHROW(c.validate());
  c.lambda = {2.0, 1.0};
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c = FitConfig{};
  c.b.max = INFINITY;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c = FitConfig{};
  c.grid_seeds = 0;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c = FitConfig{};
  c.lambda = {0.2, 1.6};  // straddling 1 is fine
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("noiseless recovery") {
  const auto data = synthetic(kTruth, 60, 6.0);
  const auto r = fit(data);
  CHECK(r.converged);
  CHECK_FALSE(r.degenerate);
  CHECK(std::abs(r.lambda - 1.81) < 0.01);
  CHECK(std::abs(r.b - 0.556) < 0.01);
  CHECK(std::abs(r.omega - 1.0) < 0.01);
  CHECK(r.objective < 1e-10);
  CHECK(r.residuals.size() == 60);
}

TEST_CASE("noisy fits reach at least the generating point's objective") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto data = synthetic(kTruth, 60, 6.0, 0.01, seed);
    const auto r = fit(data);
    CHECK(r.converged);
    CHECK(r.objective <= objective(kTruth, data) + 1e-12);
    CHECK(std::abs(r.lambda - 1.81) < 0.25);
    CHECK(std::abs(r.b - 0.556) < 0.15);
  }
}

TEST_CASE("recovery with a lambda below one and a pinned omega") {
  const FitParams truth{1.3, 0.7, 0.9};
  FitConfig config;
  config.fixed_omega = 1.3;
  const auto r = fit(synthetic(truth, 40, 4.0), config);
  CHECK(r.omega == 1.3);
  CHECK(std::abs(r.lambda - 0.7) < 0.01);
  CHECK(std::abs(r.b - 0.9) < 0.01);
}

TEST_CASE("time rescaling invariance") {
  const auto data = synthetic(kTruth, 60, 6.0);
  const double s = 2.5;
  DisagreementCurve scaled = data;
  for (auto& t : scaled.times) t *= s;
  FitConfig config, scaled_config;
  scaled_config.omega = {config.omega.min / s, config.omega.max / s};
  const auto a = fit(data, config);
  const auto b = fit(scaled, scaled_config);
  CHECK(std::abs(a.lambda - b.lambda) < 1e-4);
  CHECK(std::abs(a.b - b.b) < 1e-4);
  CHECK(std::abs(a.omega - s * b.omega) < 1e-4);
}

TEST_CASE("fit is deterministic") {
  const auto data = synthetic(kTruth, 30, 6.0, 0.01, 9);
  const auto a = fit(data), b = fit(data);
  CHECK(a.omega == b.omega);
  CHECK(a.lambda == b.lambda);
  CHECK(a.b == b.b);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("results stay within bounds") {
  FitConfig config;
  config.lambda = {2.2, 3.0};  // excludes the truth
  const auto r = fit(synthetic(kTruth, 30, 6.0), config);
  CHECK(config.lambda.contains(r.lambda));
  CHECK(config.b.contains(r.b));
  CHECK(config.omega.contains(r.omega));
  CHECK(r.objective >= 0.0);
}

TEST_CASE("constant data is flagged as degenerate") {
  DisagreementCurve flat;
  for (int i = 0; i < 10; ++i) {
    flat.times.push_back(0.5 * i);
    flat.probabilities.push_back(0.5);
  }
  const auto r = fit(flat);
  CHECK(r.degenerate);
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("too few points is a contract error") {
  CHECK_THROWS_AS(fit(synthetic(kTruth, 3, 6.0)), ContractViolation);
}

TEST_CASE("fitted curve and JSON export") {
  const auto data = synthetic(kTruth, 20, 6.0);
  const auto r = fit(data);
  const auto curve = fitted_curve(r, data);
  CHECK(curve.times == data.times);
  for (std::size_t i = 0; i < data.size(); ++i)
    CHECK(curve.probabilities[i] == doctest::Approx(data.probabilities[i]).epsilon(1e-4));
  const auto j = to_json(r);
  for (const char* key : {"omega", "lambda", "b", "objective", "residuals", "converged"}) CHECK(j.contains(key));
  CHECK(j.at("residuals").size() == 20);
}

}
