#include "metaflip/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace metaflip {

namespace {

void require_factorization(const KnobModel& model, const RelFreqTable& nu) {
  auto check = factorization_error(model, nu);
  if (!check.factors(kFactorizationTolerance)) {
    const auto& s = nu.space();
    throw FactorizationFailure("model does not factor the table: worst entry (" + s.a_settings()[check.a] +
                                   ", " + s.b_settings()[check.b] + ", " + s.outcomes()[check.c] +
                                   ") off by " + std::to_string(check.max_error),
                               check);
  }
}

void finish(BoundReport& report) {
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (auto& row : report.rows) {
    const double margin =
        report.direction == BoundDirection::Upper ? row.bound - row.attained : row.attained - row.bound;
    row.satisfied = margin >= -BoundReport::kTolerance;
    report.worst_margin = std::min(report.worst_margin, margin);
  }
  if (report.rows.empty()) report.worst_margin = 0.0;
}

// Outcome subsets as bitmasks over C.
std::vector<std::uint64_t> outcome_subsets(std::size_t n, bool& partial) {
  std::vector<std::uint64_t> masks;
  if (n == 1) {
    masks.push_back(1);
    partial = false;
    return masks;
  }
  if (n <= kExhaustiveSubsetLimit) {
    partial = false;
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t m = 1; m < full; ++m) masks.push_back(m);
    return masks;
  }
  if (n > 64) throw ContractViolation("overlap_upper_bound: more than 64 outcome bins");
  partial = true;
  for (std::size_t c = 0; c < n; ++c) {
    masks.push_back(std::uint64_t{1} << c);
    masks.push_back(~(std::uint64_t{1} << c));  // complement; extra high bits are ignored
  }
  return masks;
}

double subset_mass(std::span<const double> row, std::uint64_t mask) {
  double sum = 0.0;
  for (std::size_t c = 0; c < row.size() && c < 64; ++c)
    if (mask >> c & 1U) sum += row[c];
  return sum;
}

}  // namespace

bool BoundReport::all_satisfied() const noexcept { return violations() == 0; }

std::size_t BoundReport::violations() const noexcept {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.satisfied; }));
}

nlohmann::json to_json(const BoundReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"label", r.label}, {"bound", r.bound}, {"attained", r.attained}, {"satisfied", r.satisfied}});
  return {{"direction", report.direction == BoundDirection::Upper ? "upper" : "lower"},
          {"rows", std::move(rows)},
          {"worst_margin", report.worst_margin},
          {"partial_scan", report.partial_scan},
          {"violations", report.violations()},
          {"all_satisfied", report.all_satisfied()}};
}

OverlapBound overlap_upper_bound_detail(const RelFreqTable& nu, std::size_t a1, std::size_t a2) {
  OverlapBound out{std::numeric_limits<double>::infinity(), false};
  const auto masks = outcome_subsets(nu.space().outcome_count(), out.partial_scan);
  bool any = false;
  for (std::size_t b = 0; b < nu.space().b_count(); ++b) {
    if (!nu.is_defined(a1, b) || !nu.is_defined(a2, b)) continue;
    any = true;
    const auto row1 = nu.row(a1, b);
    const auto row2 = nu.row(a2, b);
    for (auto mask : masks) {
      const double p2 = std::clamp(subset_mass(row2, mask), 0.0, 1.0);
      const double p1 = std::clamp(subset_mass(row1, mask), 0.0, 1.0);
      out.value = std::min(out.value, std::sqrt(p2) + std::sqrt(1.0 - p1));
    }
  }
  if (!any)
    throw ContractViolation("overlap_upper_bound: no B setting defined for both '" +
                            nu.space().a_settings()[a1] + "' and '" + nu.space().a_settings()[a2] + "'");
  return out;
}

double overlap_upper_bound(const RelFreqTable& nu, std::size_t a1, std::size_t a2) {
  return overlap_upper_bound_detail(nu, a1, a2).value;
}

double overlap_upper_bound(const RelFreqTable& nu, std::string_view a1, std::string_view a2) {
  return overlap_upper_bound(nu, nu.space().a_index(a1), nu.space().a_index(a2));
}

BoundReport check_overlap_constraint(const KnobModel& model, const RelFreqTable& nu) {
  require_factorization(model, nu);
  BoundReport report;
  report.direction = BoundDirection::Upper;
  const auto& space = nu.space();
  for (std::size_t a1 = 0; a1 < space.a_count(); ++a1)
    for (std::size_t a2 = 0; a2 < space.a_count(); ++a2) {
      if (a1 == a2) continue;
      OverlapBound bound;
      try {
        bound = overlap_upper_bound_detail(nu, a1, a2);
      } catch (const ContractViolation&) {
        continue;  // no common b: the table says nothing about this pair
      }
      report.partial_scan = report.partial_scan || bound.partial_scan;
      report.rows.push_back({space.a_settings()[a1] + "," + space.a_settings()[a2], bound.value,
                             overlap(model.rho(a1), model.rho(a2)), true});
    }
  finish(report);
  return report;
}

double resolution_separation_lower_bound(const RelFreqTable& nu, std::size_t b1, std::size_t b2,
                                         std::size_t c) {
  double best = 0.0;
  bool any = false;
  for (std::size_t a = 0; a < nu.space().a_count(); ++a) {
    if (!nu.is_defined(a, b1) || !nu.is_defined(a, b2)) continue;
    any = true;
    best = std::max(best, std::abs(nu.value(a, b1, c) - nu.value(a, b2, c)));
  }
  if (!any)
    throw ContractViolation("resolution_separation_lower_bound: no A setting defined for both '" +
                            nu.space().b_settings()[b1] + "' and '" + nu.space().b_settings()[b2] + "'");
  return best;
}

double resolution_separation_lower_bound(const RelFreqTable& nu, std::string_view b1, std::string_view b2,
                                         std::string_view c) {
  const auto& s = nu.space();
  return resolution_separation_lower_bound(nu, s.b_index(b1), s.b_index(b2), s.outcome_index(c));
}

BoundReport check_separation_constraint(const KnobModel& model, const RelFreqTable& nu) {
  require_factorization(model, nu);
  BoundReport report;
  report.direction = BoundDirection::Lower;
  const auto& space = nu.space();
  for (std::size_t b1 = 0; b1 < space.b_count(); ++b1)
    for (std::size_t b2 = b1 + 1; b2 < space.b_count(); ++b2)
      for (std::size_t c = 0; c < space.outcome_count(); ++c) {
        double bound;
        try {
          bound = resolution_separation_lower_bound(nu, b1, b2, c);
        } catch (const ContractViolation&) {
          continue;
        }
        const double attained = operator_norm(model.effect(b1, c) - model.effect(b2, c));
        report.rows.push_back(
            {space.b_settings()[b1] + "," + space.b_settings()[b2] + "," + space.outcomes()[c], bound, attained, true});
      }
  finish(report);
  return report;
}

}  // namespace metaflip
