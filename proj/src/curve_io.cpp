#include "metaflip/curve_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "metaflip/errors.hpp"

namespace metaflip {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw ParseError("expected a number, got '" + std::string(field) + "'", line);
  return v;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_curve_csv(std::ostream& out, const DisagreementCurve& curve) {
  out << "# units=" << to_string(curve.units) << '\n' << "t,probability\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << format_double(curve.times[i]) << ',' << format_double(curve.probabilities[i]) << '\n';
}

void write_curve_csv(const std::filesystem::path& path, const DisagreementCurve& curve) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_curve_csv(out, curve);
}

DisagreementCurve read_curve_csv(std::istream& in) {
  DisagreementCurve curve;
  bool header_seen = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view tag = "units=";
      const auto body = trim(line.substr(1));
      if (body.starts_with(tag)) {
        try {
          curve.units = units_from_string(std::string(trim(body.substr(tag.size()))));
        } catch (const ContractViolation& e) {
          throw ParseError(e.what(), line_no);
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != "t,probability") throw ParseError("expected header 't,probability'", line_no);
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw ParseError("expected two comma-separated fields", line_no);
    const double t = parse_number(line.substr(0, comma), line_no);
    const double p = parse_number(line.substr(comma + 1), line_no);
    if (!std::isfinite(t)) throw ParseError("non-finite time", line_no);
    if (!(p >= 0.0 && p <= 1.0)) throw ParseError("probability " + format_double(p) + " outside [0,1]", line_no);
    if (!curve.times.empty() && !(t > curve.times.back()))
      throw ParseError("times must be strictly increasing", line_no);
    curve.times.push_back(t);
    curve.probabilities.push_back(p);
  }
  if (!header_seen) throw ParseError("missing header 't,probability'", line_no);
  return curve;
}

DisagreementCurve load_record_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_curve_csv(in);
}

}  // namespace metaflip
