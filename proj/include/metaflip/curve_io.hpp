#pragma once

// Disagreement-vs-time records as CSV:
//
//   # units=dimensionless
//   t,probability
//   0,0.5
//   ...
//
// Numbers are written in shortest round-trip form, so write-then-read is
// bit-exact. The units comment is optional on input (dimensionless when
// absent); other '#' lines and blank lines are ignored.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "metaflip/flipflop.hpp"

namespace metaflip {

std::string format_double(double v);

void write_curve_csv(std::ostream& out, const DisagreementCurve& curve);
void write_curve_csv(const std::filesystem::path& path, const DisagreementCurve& curve);

/// Parses the CSV contract. Throws ParseError (with the 1-based line) on
/// malformed lines, non-increasing times or probabilities outside [0,1].
DisagreementCurve read_curve_csv(std::istream& in);
DisagreementCurve load_record_csv(const std::filesystem::path& path);

}  // namespace metaflip
