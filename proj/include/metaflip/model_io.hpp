#pragma once

// JSON forms of KnobModel and RelFreqTable.
//
// KnobModel:
//   {"a_settings": [...], "b_settings": [...], "outcomes": [...], "dim": d,
//    "rho": {"<a>": M, ...}, "resolution": {"<b>": {"<c>": M, ...}, ...}}
// where M is a row-major array of rows, each entry a [re, im] pair.
//
// RelFreqTable:
//   {"a_settings": [...], "b_settings": [...], "outcomes": [...],
//    "rows": {"<a>|<b>": [nu_c in outcome order], ...}}
// Only defined pairs appear in "rows". Labels must not contain '|'.

#include <filesystem>

#include <json.hpp>

#include "metaflip/model_framework.hpp"

namespace metaflip {

nlohmann::json to_json(const ComplexMatrix& m);
ComplexMatrix complex_matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const KnobModel& model);
KnobModel knob_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RelFreqTable& table);
RelFreqTable relfreq_table_from_json(const nlohmann::json& j);

/// File helpers; parse failures throw ParseError, contract failures
/// ContractViolation.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace metaflip
