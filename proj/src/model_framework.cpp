#include "metaflip/model_framework.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace metaflip {

namespace {

void check_labels(const std::vector<std::string>& labels, const char* which) {
  if (labels.empty()) throw ContractViolation(std::string("KnobSpace: empty ") + which + " set");
  std::set<std::string_view> seen;
  for (const auto& l : labels)
    if (!seen.insert(l).second)
      throw ContractViolation(std::string("KnobSpace: duplicate ") + which + " label '" + l + "'");
}

std::optional<std::size_t> find_label(const std::vector<std::string>& labels, std::string_view label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

std::size_t index_or_throw(const std::vector<std::string>& labels, std::string_view label,
                           const char* which) {
  if (auto i = find_label(labels, label)) return *i;
  throw UnknownLabel(std::string("unknown ") + which + " label '" + std::string(label) + "'");
}

}  // namespace

KnobSpace::KnobSpace(std::vector<std::string> a_settings, std::vector<std::string> b_settings,
                     std::vector<std::string> outcomes)
    : a_(std::move(a_settings)), b_(std::move(b_settings)), c_(std::move(outcomes)) {
  check_labels(a_, "A");
  check_labels(b_, "B");
  check_labels(c_, "outcome");
}

std::size_t KnobSpace::a_index(std::string_view label) const { return index_or_throw(a_, label, "A"); }
std::size_t KnobSpace::b_index(std::string_view label) const { return index_or_throw(b_, label, "B"); }
std::size_t KnobSpace::outcome_index(std::string_view label) const {
  return index_or_throw(c_, label, "outcome");
}
std::optional<std::size_t> KnobSpace::find_a(std::string_view label) const { return find_label(a_, label); }
std::optional<std::size_t> KnobSpace::find_b(std::string_view label) const { return find_label(b_, label); }

void RelFreqTable::set_row(std::size_t a, std::size_t b, std::vector<double> row) {
  if (a >= space_.a_count() || b >= space_.b_count())
    throw ContractViolation("RelFreqTable: (a,b) index out of range");
  const std::string id = space_.a_settings()[a] + "|" + space_.b_settings()[b];
  if (row.size() != space_.outcome_count())
    throw ContractViolation("RelFreqTable: row " + id + " has " + std::to_string(row.size()) +
                            " entries, expected " + std::to_string(space_.outcome_count()));
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0 && v <= 1.0))
      throw ContractViolation("RelFreqTable: row " + id + " has value outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance)
    throw ContractViolation("RelFreqTable: row " + id + " sums to " + std::to_string(sum));
  rows_[{a, b}] = std::move(row);
}

void RelFreqTable::set_row(std::string_view a, std::string_view b, std::vector<double> row) {
  set_row(space_.a_index(a), space_.b_index(b), std::move(row));
}

bool RelFreqTable::is_defined(std::size_t a, std::size_t b) const { return rows_.contains({a, b}); }

std::span<const double> RelFreqTable::row(std::size_t a, std::size_t b) const {
  auto it = rows_.find({a, b});
  if (it == rows_.end()) throw ContractViolation("RelFreqTable: row undefined");
  return it->second;
}

std::vector<std::pair<std::size_t, std::size_t>> RelFreqTable::defined_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(rows_.size());
  for (const auto& [key, _] : rows_) out.push_back(key);
  return out;
}

RelFreqTable relfreq_from_trials(const TrialRecord& record, const KnobSpace& space) {
  if (record.empty()) throw ContractViolation("relfreq_from_trials: empty trial record");
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> counts;
  for (const auto& trial : record) {
    auto& row = counts[{space.a_index(trial.a), space.b_index(trial.b)}];
    row.resize(space.outcome_count(), 0);
    ++row[space.outcome_index(trial.c)];
  }
  RelFreqTable table(space);
  for (const auto& [key, row] : counts) {
    const auto total = std::accumulate(row.begin(), row.end(), std::size_t{0});
    std::vector<double> freq(row.size());
    for (std::size_t c = 0; c < row.size(); ++c)
      freq[c] = static_cast<double>(row[c]) / static_cast<double>(total);
    table.set_row(key.first, key.second, std::move(freq));
  }
  return table;
}

KnobModel::KnobModel(KnobSpace space, std::vector<HermitianOperator> rho,
                     std::vector<std::vector<HermitianOperator>> resolution, const Tolerances& tol)
    : space_(std::move(space)), dim_(0), rho_(std::move(rho)), resolution_(std::move(resolution)) {
  if (rho_.size() != space_.a_count())
    throw ContractViolation("KnobModel: expected one density per A setting");
  if (resolution_.size() != space_.b_count())
    throw ContractViolation("KnobModel: expected one resolution per B setting");
  dim_ = rho_.front().dim();
  for (std::size_t a = 0; a < rho_.size(); ++a) {
    if (rho_[a].dim() != dim_) throw DimensionMismatch("KnobModel: density dimension mismatch");
    auto report = validate_density(rho_[a].matrix(), tol);
    if (!report.ok())
      throw ContractViolation("KnobModel: rho(" + space_.a_settings()[a] + ") invalid: " + report.summary());
  }
  for (std::size_t b = 0; b < resolution_.size(); ++b) {
    if (resolution_[b].size() != space_.outcome_count())
      throw ContractViolation("KnobModel: resolution(" + space_.b_settings()[b] +
                              ") needs one block per outcome");
    for (const auto& e : resolution_[b])
      if (e.dim() != dim_) throw DimensionMismatch("KnobModel: resolution dimension mismatch");
    auto report = validate_resolution(std::span<const HermitianOperator>(resolution_[b]), tol);
    if (!report.ok())
      throw ContractViolation("KnobModel: resolution(" + space_.b_settings()[b] +
                              ") invalid: " + report.summary());
  }
}

double KnobModel::probability(std::size_t a, std::size_t b, std::size_t c) const {
  const double p = trace_product(rho_.at(a), resolution_.at(b).at(c));
  return std::clamp(p, 0.0, 1.0);
}

double KnobModel::probability(std::string_view a, std::string_view b, std::string_view c) const {
  return probability(space_.a_index(a), space_.b_index(b), space_.outcome_index(c));
}

std::vector<double> KnobModel::distribution(std::size_t a, std::size_t b) const {
  std::vector<double> p(space_.outcome_count());
  for (std::size_t c = 0; c < p.size(); ++c) p[c] = probability(a, b, c);
  return p;
}

double overlap(const HermitianOperator& r1, const HermitianOperator& r2, const Tolerances& tol) {
  for (const auto* r : {&r1, &r2}) {
    auto report = validate_density(r->matrix(), tol);
    if (!report.ok()) throw ContractViolation("overlap: invalid density: " + report.summary());
  }
  const double value = trace_product(hermitian_sqrt(r1, tol), hermitian_sqrt(r2, tol), tol);
  return std::max(value, 0.0);
}

double statistical_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw ContractViolation("statistical_distance: supports of size " + std::to_string(p.size()) +
                            " and " + std::to_string(q.size()));
  double sp = 0.0, sq = 0.0, total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sp += p[i];
    sq += q[i];
    total += std::abs(p[i] - q[i]);
  }
  if (std::abs(sp - 1.0) > 1e-10 || std::abs(sq - 1.0) > 1e-10)
    throw ContractViolation("statistical_distance: inputs must sum to 1");
  return std::min(0.5 * total, 1.0);
}

double model_distance(const KnobModel& m1, const KnobModel& m2, const DistributionMetric& metric) {
  if (!(m1.space() == m2.space())) throw ContractViolation("model_distance: knob spaces differ");
  double worst = 0.0;
  for (std::size_t a = 0; a < m1.space().a_count(); ++a)
    for (std::size_t b = 0; b < m1.space().b_count(); ++b)
      worst = std::max(worst, metric(m1.distribution(a, b), m2.distribution(a, b)));
  return worst;
}

bool is_restriction(const KnobModel& m_small, const KnobModel& m_big, double tol) {
  const auto& s = m_small.space();
  const auto& g = m_big.space();
  if (s.outcomes() != g.outcomes() || m_small.dim() != m_big.dim()) return false;
  for (std::size_t a = 0; a < s.a_count(); ++a) {
    auto ga = g.find_a(s.a_settings()[a]);
    if (!ga) return false;
    if ((m_small.rho(a).matrix() - m_big.rho(*ga).matrix()).cwiseAbs().maxCoeff() > tol) return false;
  }
  for (std::size_t b = 0; b < s.b_count(); ++b) {
    auto gb = g.find_b(s.b_settings()[b]);
    if (!gb) return false;
    for (std::size_t c = 0; c < s.outcome_count(); ++c)
      if ((m_small.effect(b, c).matrix() - m_big.effect(*gb, c).matrix()).cwiseAbs().maxCoeff() > tol)
        return false;
  }
  return true;
}

KnobModel restrict_model(const KnobModel& model, std::span<const std::string> keep_a,
                         std::span<const std::string> keep_b) {
  const auto& space = model.space();
  std::vector<std::string> a_labels, b_labels;
  std::vector<HermitianOperator> rho;
  std::vector<std::vector<HermitianOperator>> resolution;
  for (std::size_t a = 0; a < space.a_count(); ++a)
    if (std::find(keep_a.begin(), keep_a.end(), space.a_settings()[a]) != keep_a.end()) {
      a_labels.push_back(space.a_settings()[a]);
      rho.push_back(model.rho(a));
    }
  for (std::size_t b = 0; b < space.b_count(); ++b)
    if (std::find(keep_b.begin(), keep_b.end(), space.b_settings()[b]) != keep_b.end()) {
      b_labels.push_back(space.b_settings()[b]);
      resolution.push_back(model.resolution(b));
    }
  return KnobModel(KnobSpace(std::move(a_labels), std::move(b_labels), space.outcomes()),
                   std::move(rho), std::move(resolution));
}

FactorizationCheck factorization_error(const KnobModel& model, const RelFreqTable& nu) {
  if (!(model.space() == nu.space())) throw ContractViolation("factorization_error: knob spaces differ");
  FactorizationCheck check;
  for (auto [a, b] : nu.defined_pairs()) {
    auto row = nu.row(a, b);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double err = std::abs(trace_product(model.rho(a), model.effect(b, c)) - row[c]);
      if (err > check.max_error) check = {err, a, b, c};
    }
  }
  return check;
}

RelFreqTable induced_table(const KnobModel& model) {
  RelFreqTable table(model.space());
  for (std::size_t a = 0; a < model.space().a_count(); ++a)
    for (std::size_t b = 0; b < model.space().b_count(); ++b) {
      auto p = model.distribution(a, b);
      // renormalize away roundoff so the row passes the 1e-12 sum check
      const double sum = std::accumulate(p.begin(), p.end(), 0.0);
      for (auto& v : p) v = std::min(v / sum, 1.0);
      table.set_row(a, b, std::move(p));
    }
  return table;
}

}  // namespace metaflip
