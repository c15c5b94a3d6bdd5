#pragma once

// Necessary conditions on any model that factors a relative-frequency
// table: an upper bound on the overlap of preparations, and a lower bound
// on how far the detection projectors for two B settings must differ.

#include <string>
#include <vector>

#include <json.hpp>

#include "metaflip/model_framework.hpp"

namespace metaflip {

/// Thrown by the check_* functions when the model does not reproduce the
/// table; carries the worst (a,b,c) entry.
class FactorizationFailure : public Error {
 public:
  FactorizationFailure(const std::string& what, FactorizationCheck check)
      : Error(what), check_(check) {}
  const FactorizationCheck& check() const noexcept { return check_; }

 private:
  FactorizationCheck check_;
};

enum class BoundDirection {
  Upper,  // attained <= bound
  Lower,  // attained >= bound
};

struct BoundRow {
  std::string label;  // "a1,a2" or "b1,b2,c"
  double bound = 0.0;
  double attained = 0.0;
  bool satisfied = true;
};

struct BoundReport {
  static constexpr double kTolerance = 1e-8;

  BoundDirection direction = BoundDirection::Upper;
  std::vector<BoundRow> rows;
  /// min over rows of (bound - attained) for Upper, (attained - bound) for Lower
  double worst_margin = 0.0;
  /// the outcome-subset scan fell back to singletons and complements
  bool partial_scan = false;

  bool all_satisfied() const noexcept;
  std::size_t violations() const noexcept;
};

nlohmann::json to_json(const BoundReport& report);

/// Outcome counts above this use singletons and complements instead of
/// every subset in the overlap bound.
inline constexpr std::size_t kExhaustiveSubsetLimit = 12;

struct OverlapBound {
  double value = 0.0;
  bool partial_scan = false;
};

/// min over common defined b and outcome subsets w of
///   sqrt(nu(a2,b)(w)) + sqrt(1 - nu(a1,b)(w)).
/// Subsets are the nonempty proper unions of bins (the empty set and the
/// full set give exactly 1). Throws ContractViolation when no b is defined
/// for both a1 and a2.
OverlapBound overlap_upper_bound_detail(const RelFreqTable& nu, std::size_t a1, std::size_t a2);
double overlap_upper_bound(const RelFreqTable& nu, std::size_t a1, std::size_t a2);
double overlap_upper_bound(const RelFreqTable& nu, std::string_view a1, std::string_view a2);

/// Every ordered pair a1 != a2: overlap(rho(a1), rho(a2)) against the bound.
/// Throws FactorizationFailure if the model misses nu by more than 1e-9.
BoundReport check_overlap_constraint(const KnobModel& model, const RelFreqTable& nu);

/// max over a defined for both b1 and b2 of |nu(a,b1)(c) - nu(a,b2)(c)|.
double resolution_separation_lower_bound(const RelFreqTable& nu, std::size_t b1, std::size_t b2,
                                         std::size_t c);
double resolution_separation_lower_bound(const RelFreqTable& nu, std::string_view b1,
                                         std::string_view b2, std::string_view c);

/// Every b1 < b2 and outcome c with a common defined a:
/// ||E(b1)(c) - E(b2)(c)|| against the lower bound.
BoundReport check_separation_constraint(const KnobModel& model, const RelFreqTable& nu);

/// Tolerance used by the check_* functions to decide that a model factors nu.
inline constexpr double kFactorizationTolerance = 1e-9;

}  // namespace metaflip
