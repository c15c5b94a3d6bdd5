#pragma once

// Knob-parameterized quantum models, relative-frequency tables, and the
// distances/overlaps that connect them.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metaflip/quantum_core.hpp"

namespace metaflip {

/// Ordered label sets for preparation knobs (A), detection knobs (B) and
/// outcome bins (C). A setting that combines several sub-knobs is just a
/// composite label; fixing a sub-knob is a filter on the label set.
class KnobSpace {
 public:
  KnobSpace(std::vector<std::string> a_settings, std::vector<std::string> b_settings,
            std::vector<std::string> outcomes);

  const std::vector<std::string>& a_settings() const noexcept { return a_; }
  const std::vector<std::string>& b_settings() const noexcept { return b_; }
  const std::vector<std::string>& outcomes() const noexcept { return c_; }

  std::size_t a_count() const noexcept { return a_.size(); }
  std::size_t b_count() const noexcept { return b_.size(); }
  std::size_t outcome_count() const noexcept { return c_.size(); }

  /// Index lookups; throw UnknownLabel.
  std::size_t a_index(std::string_view label) const;
  std::size_t b_index(std::string_view label) const;
  std::size_t outcome_index(std::string_view label) const;

  std::optional<std::size_t> find_a(std::string_view label) const;
  std::optional<std::size_t> find_b(std::string_view label) const;

  friend bool operator==(const KnobSpace&, const KnobSpace&) = default;

 private:
  std::vector<std::string> a_, b_, c_;
};

/// Empirical outcome frequencies nu(a,b)(c), defined on a subset of A x B.
class RelFreqTable {
 public:
  static constexpr double kRowSumTolerance = 1e-12;

  explicit RelFreqTable(KnobSpace space) : space_(std::move(space)) {}

  /// Sets the row for (a,b). Throws ContractViolation if the row has the
  /// wrong length, a value outside [0,1], or does not sum to 1.
  void set_row(std::size_t a, std::size_t b, std::vector<double> row);
  void set_row(std::string_view a, std::string_view b, std::vector<double> row);

  const KnobSpace& space() const noexcept { return space_; }
  bool is_defined(std::size_t a, std::size_t b) const;
  /// Throws ContractViolation when (a,b) is undefined.
  std::span<const double> row(std::size_t a, std::size_t b) const;
  double value(std::size_t a, std::size_t b, std::size_t c) const { return row(a, b)[c]; }

  /// Defined (a,b) index pairs in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> defined_pairs() const;

 private:
  KnobSpace space_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> rows_;
};

struct Trial {
  std::string a, b, c;
};

using TrialRecord = std::vector<Trial>;

/// Relative frequencies from counted trials. Throws ContractViolation on an
/// empty record and UnknownLabel on labels outside `space`.
RelFreqTable relfreq_from_trials(const TrialRecord& record, const KnobSpace& space);

/// A pair of maps a -> density operator, b -> projective resolution.
class KnobModel {
 public:
  /// rho[a] and resolution[b][c], indexed like `space`. Validates every
  /// density and resolution and throws ContractViolation on failure.
  KnobModel(KnobSpace space, std::vector<HermitianOperator> rho,
            std::vector<std::vector<HermitianOperator>> resolution,
            const Tolerances& tol = kDefaultTolerances);

  const KnobSpace& space() const noexcept { return space_; }
  Eigen::Index dim() const noexcept { return dim_; }
  const HermitianOperator& rho(std::size_t a) const { return rho_.at(a); }
  const HermitianOperator& effect(std::size_t b, std::size_t c) const { return resolution_.at(b).at(c); }
  const std::vector<HermitianOperator>& resolution(std::size_t b) const { return resolution_.at(b); }

  /// Tr[rho(a) E(b)(c)], clamped to [0,1].
  double probability(std::size_t a, std::size_t b, std::size_t c) const;
  double probability(std::string_view a, std::string_view b, std::string_view c) const;
  /// Outcome distribution for (a,b) in outcome order.
  std::vector<double> distribution(std::size_t a, std::size_t b) const;

 private:
  KnobSpace space_;
  Eigen::Index dim_;
  std::vector<HermitianOperator> rho_;
  std::vector<std::vector<HermitianOperator>> resolution_;
};

/// Tr[r1^{1/2} r2^{1/2}]; both inputs must be valid densities.
double overlap(const HermitianOperator& r1, const HermitianOperator& r2,
               const Tolerances& tol = kDefaultTolerances);

using DistributionMetric = std::function<double(std::span<const double>, std::span<const double>)>;

/// Total variation distance 1/2 sum |p_c - q_c|.
double statistical_distance(std::span<const double> p, std::span<const double> q);

/// max over (a,b) of `metric` between the induced outcome distributions.
double model_distance(const KnobModel& m1, const KnobModel& m2,
                      const DistributionMetric& metric = statistical_distance);

/// m_small's label sets are subsets of m_big's and rho/E agree on the
/// common labels within `tol`.
bool is_restriction(const KnobModel& m_small, const KnobModel& m_big, double tol = 1e-12);

/// Model restricted to the listed settings (order preserved from `model`).
KnobModel restrict_model(const KnobModel& model, std::span<const std::string> keep_a,
                         std::span<const std::string> keep_b);

struct FactorizationCheck {
  double max_error = 0.0;
  std::size_t a = 0, b = 0, c = 0;  // worst entry
  bool factors(double tol) const noexcept { return max_error <= tol; }
};

/// Largest |Tr[rho(a)E(b)(c)] - nu(a,b)(c)| over the defined pairs of `nu`.
/// Throws ContractViolation when the spaces differ.
FactorizationCheck factorization_error(const KnobModel& model, const RelFreqTable& nu);

/// Table induced by the model on every (a,b).
RelFreqTable induced_table(const KnobModel& model);

}  // namespace metaflip
