#include "metaflip/model_io.hpp"

#include <fstream>

namespace metaflip {

using nlohmann::json;

namespace {

KnobSpace space_from_json(const json& j) {
  auto labels = [&](const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("missing '") + key + "'");
    auto out = j.at(key).get<std::vector<std::string>>();
    for (const auto& l : out)
      if (l.find('|') != std::string::npos)
        throw ParseError("label '" + l + "' contains reserved character '|'");
    return out;
  };
  return KnobSpace(labels("a_settings"), labels("b_settings"), labels("outcomes"));
}

void put_space(json& j, const KnobSpace& space) {
  j["a_settings"] = space.a_settings();
  j["b_settings"] = space.b_settings();
  j["outcomes"] = space.outcomes();
}

}  // namespace

json to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix complex_matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ParseError("matrix row " + std::to_string(i) + " has wrong length");
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& e = row[k];
      if (e.is_number()) {
        m(i, k) = e.get<double>();
      } else if (e.is_array() && e.size() == 2) {
        m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ParseError("matrix entry must be a number or [re, im]");
      }
    }
  }
  return m;
}

json to_json(const KnobModel& model) {
  json j;
  const auto& space = model.space();
  put_space(j, space);
  j["dim"] = model.dim();
  json rho = json::object();
  for (std::size_t a = 0; a < space.a_count(); ++a) rho[space.a_settings()[a]] = to_json(model.rho(a).matrix());
  j["rho"] = std::move(rho);
  json res = json::object();
  for (std::size_t b = 0; b < space.b_count(); ++b) {
    json blocks = json::object();
    for (std::size_t c = 0; c < space.outcome_count(); ++c)
      blocks[space.outcomes()[c]] = to_json(model.effect(b, c).matrix());
    res[space.b_settings()[b]] = std::move(blocks);
  }
  j["resolution"] = std::move(res);
  return j;
}

KnobModel knob_model_from_json(const json& j) {
  try {
    KnobSpace space = space_from_json(j);
    const auto dim = j.at("dim").get<Eigen::Index>();
    std::vector<HermitianOperator> rho;
    for (const auto& a : space.a_settings()) {
      auto m = complex_matrix_from_json(j.at("rho").at(a));
      if (m.rows() != dim) throw ParseError("rho(" + a + ") has dimension " + std::to_string(m.rows()));
      rho.emplace_back(std::move(m));
    }
    std::vector<std::vector<HermitianOperator>> resolution;
    for (const auto& b : space.b_settings()) {
      std::vector<HermitianOperator> blocks;
      for (const auto& c : space.outcomes()) {
        auto m = complex_matrix_from_json(j.at("resolution").at(b).at(c));
        if (m.rows() != dim) throw ParseError("E(" + b + ")(" + c + ") has wrong dimension");
        blocks.emplace_back(std::move(m));
      }
      resolution.push_back(std::move(blocks));
    }
    return KnobModel(std::move(space), std::move(rho), std::move(resolution));
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

json to_json(const RelFreqTable& table) {
  json j;
  const auto& space = table.space();
  put_space(j, space);
  json rows = json::object();
  for (auto [a, b] : table.defined_pairs()) {
    auto row = table.row(a, b);
    rows[space.a_settings()[a] + "|" + space.b_settings()[b]] = std::vector<double>(row.begin(), row.end());
  }
  j["rows"] = std::move(rows);
  return j;
}

RelFreqTable relfreq_table_from_json(const json& j) {
  try {
    RelFreqTable table(space_from_json(j));
    for (const auto& [key, value] : j.at("rows").items()) {
      const auto bar = key.find('|');
      if (bar == std::string::npos) throw ParseError("row key '" + key + "' is not of the form a|b");
      table.set_row(key.substr(0, bar), key.substr(bar + 1), value.get<std::vector<double>>());
    }
    return table;
  } catch (const json::exception& e) {
    throw ParseError(std::string("table JSON: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace metaflip
