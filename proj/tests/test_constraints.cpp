#include <doctest.h>

#include <cmath>
#include <random>

#include "metaflip/constraints.hpp"
#include "metaflip/errors.hpp"
#include "metaflip/synthesis.hpp"
#include "support.hpp"

using namespace metaflip;

namespace {

// min over b and nonempty proper subsets, written out independently
double brute_overlap_bound(const RelFreqTable& nu, std::size_t a1, std::size_t a2) {
  const auto nc = nu.space().outcome_count();
  double best = INFINITY;
  for (std::size_t b = 0; b < nu.space().b_count(); ++b) {
    if (!nu.is_defined(a1, b) || !nu.is_defined(a2, b)) continue;
    for (unsigned mask = 1; mask + 1 < (1u << nc); ++mask) {
      double p1 = 0.0, p2 = 0.0;
      for (std::size_t c = 0; c < nc; ++c)
        if (mask & (1u << c)) {
          p1 += nu.value(a1, b, c);
          p2 += nu.value(a2, b, c);
        }
      best = std::min(best, std::sqrt(std::max(p2, 0.0)) + std::sqrt(std::max(1.0 - p1, 0.0)));
    }
  }
  return best;
}

ComplexVector ket(double x, double y) {
  ComplexVector v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_SUITE("constraints") {

TEST_CASE("overlap bound: near-perfect discrimination") {
  RelFreqTable nu(KnobSpace({"a1", "a2"}, {"b"}, {"c", "d"}));
  nu.set_row("a1", "b", {0.96, 0.04});  // 1 - delta
  nu.set_row("a2", "b", {0.01, 0.99});  // epsilon
  const double bound = overlap_upper_bound(nu, "a1", "a2");
  CHECK(bound <= 0.3 + 1e-12);
  CHECK(bound == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("overlap bound: perfect discrimination gives 0") {
  RelFreqTable nu(KnobSpace({"a1", "a2"}, {"b"}, {"c", "d"}));
  nu.set_row(0, 0, {1.0, 0.0});
  nu.set_row(1, 0, {0.0, 1.0});
  CHECK(overlap_upper_bound(nu, 0, 1) == doctest::Approx(0.0));
}

TEST_CASE("overlap bound: identical uniform rows are vacuous") {
  RelFreqTable nu(KnobSpace({"a1", "a2"}, {"b"}, {"c", "d"}));
  nu.set_row(0, 0, {0.5, 0.5});
  nu.set_row(1, 0, {0.5, 0.5});
  const double bound = overlap_upper_bound(nu, 0, 1);
  CHECK(bound == doctest::Approx(1.41421356).epsilon(1e-8));
  CHECK(bound == doctest::Approx(brute_overlap_bound(nu, 0, 1)));
}

TEST_CASE("overlap bound equals the brute-force scan on random tables") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto nu = testsupport::random_table(rng, 3, 3, 4);
    for (std::size_t a1 = 0; a1 < 3; ++a1)
      for (std::size_t a2 = 0; a2 < 3; ++a2)
        CHECK(std::abs(overlap_upper_bound(nu, a1, a2) - brute_overlap_bound(nu, a1, a2)) < 1e-14);
  }
}

TEST_CASE("overlap bound needs a common b and degrades above the subset limit") {
  RelFreqTable nu(KnobSpace({"a1", "a2"}, {"b1", "b2"}, {"c", "d"}));
  nu.set_row(0, 0, {0.5, 0.5});
  nu.set_row(1, 1, {0.5, 0.5});
  CHECK_THROWS_AS(overlap_upper_bound(nu, 0, 1), ContractViolation);

  std::mt19937_64 rng(42);
  const auto wide = testsupport::random_table(rng, 2, 1, kExhaustiveSubsetLimit + 1);
  CHECK(overlap_upper_bound_detail(wide, 0, 1).partial_scan);
  const auto narrow = testsupport::random_table(rng, 2, 1, kExhaustiveSubsetLimit);
  CHECK_FALSE(overlap_upper_bound_detail(narrow, 0, 1).partial_scan);
}

TEST_CASE("overlap bound is monotone under dropping b settings") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const auto full = testsupport::random_table(rng, 2, 3, 3);
    RelFreqTable fewer(full.space());
    for (std::size_t a = 0; a < 2; ++a) {
      auto row = full.row(a, 1);
      fewer.set_row(a, 1, std::vector<double>(row.begin(), row.end()));
    }
    CHECK(overlap_upper_bound(fewer, 0, 1) >= overlap_upper_bound(full, 0, 1));
  }
}

TEST_CASE("check_overlap_constraint on a synthesized model") {
  std::mt19937_64 rng(44);
  const auto nu = testsupport::random_table(rng, 3, 2, 3);
  const auto report = check_overlap_constraint(synthesize_model(nu).model, nu);
  CHECK(report.direction == BoundDirection::Upper);
  CHECK(report.rows.size() == 6);
  CHECK(report.all_satisfied());
  for (const auto& row : report.rows) CHECK(row.attained < 1e-14);
}

TEST_CASE("check_overlap_constraint on a superposition model") {
  const auto p0 = HermitianOperator::projector(ket(1.0, 0.0));
  const auto plus = HermitianOperator::projector(ket(1.0, 1.0) / std::sqrt(2.0));
  const KnobModel m(KnobSpace({"zero", "plus"}, {"z"}, {"0", "1"}), {p0, plus},
                    {{HermitianOperator::diagonal({1, 0}), HermitianOperator::diagonal({0, 1})}});
  const auto nu = induced_table(m);
  const auto report = check_overlap_constraint(m, nu);
  CHECK(report.all_satisfied());
  REQUIRE(report.rows.size() == 2);
  for (const auto& row : report.rows) {
    CHECK(row.attained == doctest::Approx(0.5));
    CHECK(row.bound >= 0.5);
  }
}

TEST_CASE("corrupted table is reported as a factorization failure") {
  std::mt19937_64 rng(45);
  const auto nu = testsupport::random_table(rng, 2, 1, 3);
  RelFreqTable swapped(nu.space());
  const auto r0 = nu.row(0, 0), r1 = nu.row(1, 0);
  swapped.set_row(0, 0, std::vector<double>(r1.begin(), r1.end()));
  swapped.set_row(1, 0, std::vector<double>(r0.begin(), r0.end()));
  const auto model = synthesize_model(nu).model;
  CHECK_THROWS_AS(check_overlap_constraint(model, swapped), FactorizationFailure);
  CHECK_THROWS_AS(check_separation_constraint(model, swapped), FactorizationFailure);
  try {
    check_overlap_constraint(model, swapped);
  } catch (const FactorizationFailure& e) {
    CHECK(e.check().max_error > 1e-9);
  }
}

TEST_CASE("separation lower bound") {
  RelFreqTable nu(KnobSpace({"a"}, {"b1", "b2"}, {"c", "d"}));
  nu.set_row(0, 0, {1.0, 0.0});
  nu.set_row(0, 1, {0.0, 1.0});
  CHECK(resolution_separation_lower_bound(nu, 0, 0, 0) == 0.0);
  CHECK(resolution_separation_lower_bound(nu, "b1", "b2", "c") == doctest::Approx(1.0));
}

TEST_CASE("separation lower bound equals the brute-force max over a") {
  std::mt19937_64 rng(46);
  const auto nu = testsupport::random_table(rng, 3, 3, 3);
  for (std::size_t b1 = 0; b1 < 3; ++b1)
    for (std::size_t b2 = 0; b2 < 3; ++b2)
      for (std::size_t c = 0; c < 3; ++c) {
        double oracle = 0.0;
        for (std::size_t a = 0; a < 3; ++a)
          oracle = std::max(oracle, std::abs(nu.value(a, b1, c) - nu.value(a, b2, c)));
        CHECK(resolution_separation_lower_bound(nu, b1, b2, c) == oracle);
      }
}

TEST_CASE("check_separation_constraint") {
  // b-independent detection and table
  const std::vector<HermitianOperator> z{HermitianOperator::diagonal({1, 0}), HermitianOperator::diagonal({0, 1})};
  const KnobModel same(KnobSpace({"a"}, {"b1", "b2"}, {"0", "1"}), {HermitianOperator::identity(2) * 0.5}, {z, z});
  const auto flat = check_separation_constraint(same, induced_table(same));
  CHECK(flat.direction == BoundDirection::Lower);
  CHECK(flat.all_satisfied());
  for (const auto& row : flat.rows) {
    CHECK(row.bound == doctest::Approx(0.0));
    CHECK(row.attained == doctest::Approx(0.0));
  }

  RelFreqTable nu(KnobSpace({"a"}, {"b1", "b2"}, {"c", "d"}));
  nu.set_row(0, 0, {0.7, 0.3});
  nu.set_row(0, 1, {0.3, 0.7});
  const auto report = check_separation_constraint(synthesize_model(nu).model, nu);
  CHECK(report.all_satisfied());
  for (const auto& row : report.rows) CHECK(row.attained >= 0.4 - 1e-12);
}

TEST_CASE("both theorems hold for random factoring models") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<std::size_t> size(1, 4);
    const std::size_t na = size(rng) + 1, nb = size(rng), nc = size(rng) + 1;
    const auto m = testsupport::random_model(rng, na, nb, nc, static_cast<Eigen::Index>(nc + size(rng)));
    const auto nu = induced_table(m);
    CHECK(check_overlap_constraint(m, nu).violations() == 0);
    CHECK(check_separation_constraint(m, nu).violations() == 0);
  }
}

TEST_CASE("report JSON carries direction and rows") {
  RelFreqTable nu(KnobSpace({"a1", "a2"}, {"b"}, {"c", "d"}));
  nu.set_row(0, 0, {0.5, 0.5});
  nu.set_row(1, 0, {0.5, 0.5});
  const auto j = to_json(check_overlap_constraint(synthesize_model(nu).model, nu));
  CHECK(j.at("direction") == "upper");
  CHECK(j.at("rows").size() == 2);
  CHECK(j.at("all_satisfied") == true);
}

}
