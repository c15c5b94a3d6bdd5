#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "metaflip/cli.hpp"
#include "metaflip/curve_io.hpp"
#include "metaflip/fitting.hpp"
#include "metaflip/model_io.hpp"
#include "metaflip/synthesis.hpp"

using namespace metaflip;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "metaflip");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("metaflip_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

DisagreementCurve parse_curve(const std::string& text) {
  std::istringstream in(text);
  return read_curve_csv(in);
}

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const char* kTable = R"({"a_settings":["a"],"b_settings":["b"],"outcomes":["c0","c1"],"rows":{"a|b":[0.25,0.75]}})";
const char* kTwoB =
    R"({"a_settings":["a0","a1"],"b_settings":["b0","b1"],"outcomes":["c0","c1"],
        "rows":{"a0|b0":[0.3,0.7],"a0|b1":[0.6,0.4],"a1|b0":[0.9,0.1],"a1|b1":[0.5,0.5]}})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate with the reference parameters") {
  const auto r = run({"simulate", "--lambda", "1.81", "--b", "0.556", "--t-max", "6", "--dt", "0.01"});
  REQUIRE(r.code == 0);
  const auto c = parse_curve(r.out);
  CHECK(c.size() == 601);
  CHECK(c.probabilities.front() == 0.5);
  CHECK(r.out.rfind("# units=dimensionless\n", 0) == 0);
}

TEST_CASE("simulate classical curve touches zero at the cosine zero") {
  const auto r = run({"simulate", "--classical", "--lambda", "2", "--t-max", "3"});
  REQUIRE(r.code == 0);
  const auto c = parse_curve(r.out);
  double lowest = 1.0, at = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.probabilities[i] < lowest) lowest = c.probabilities[i], at = c.times[i];
  CHECK(lowest < 1e-3);
  CHECK(at == doctest::Approx(1.57).epsilon(0.01));
}

TEST_CASE("simulate with lambda below one decays monotonically") {
  const auto r = run({"simulate", "--lambda", "0.5", "--t-max", "6", "--dt", "0.01"});
  REQUIRE(r.code == 0);
  CHECK(interior_local_maxima(parse_curve(r.out).probabilities).empty());
}

TEST_CASE("simulate options and input errors") {
  CHECK(run({"simulate", "--b", "-1"}).code == 2);
  const auto biased = run({"simulate", "--c", "0.3"});
  CHECK(biased.code == 2);
  CHECK(biased.err.find("--numeric") != std::string::npos);
  CHECK(run({"simulate", "--c", "0.3", "--numeric", "--t-max", "1", "--dt", "0.5"}).code == 0);
  CHECK(run({"simulate", "--set", "bogus=1"}).code == 2);
  CHECK(run({"simulate", "--set", "lambda"}).code == 2);
  CHECK(run({"simulate", "--format", "xml"}).code == 2);

  const auto j = run({"simulate", "--set", "lambda=2", "--t-max", "1", "--dt", "0.5", "--format", "json"});
  REQUIRE(j.code == 0);
  const auto doc = json::parse(j.out);
  CHECK(doc.at("t").size() == 3);
  CHECK(doc.at("units") == "dimensionless");

  const auto phys = run({"simulate", "--units", "physical", "--mass", "2", "--spring", "8", "--b", "0.5", "--t-max",
                         "1", "--dt", "0.5"});
  REQUIRE(phys.code == 0);
  CHECK(parse_curve(phys.out).units == Units::Physical);
}

TEST_CASE("simulate writes to a file") {
  TempDir dir;
  const auto path = dir.file("curve.csv");
  REQUIRE(run({"simulate", "--t-max", "1", "--out", path}).code == 0);
  CHECK(load_record_csv(path).size() == 101);
}

TEST_CASE("oracle exit codes") {
  const auto zero = run({"oracle", "--t-max", "0"});
  CHECK(zero.code == 0);
  CHECK(json::parse(zero.out).at("max_error").get<double>() < 1e-12);

  const auto small = run({"oracle", "--L", "4", "--b", "0.556", "--t-max", "3"});
  CHECK(small.code == 3);
  CHECK(small.err.find("--L") != std::string::npos);

  CHECK(run({"oracle", "--t-max", "1.5", "--strict-leakage"}).code == 3);
  CHECK(run({"oracle", "--t-max", "1", "--strict-leakage"}).code == 0);
  CHECK(run({"oracle", "--n", "100"}).code == 2);
  CHECK(run({"oracle", "--t-max", "1", "--tol", "1e-9"}).code == 4);
}

TEST_CASE("oracle with defaults passes") {
  const auto r = run({"oracle"});
  CHECK(r.code == 0);
  const auto report = json::parse(r.out);
  CHECK(report.at("samples").size() == 7);
  CHECK(report.at("max_error").get<double>() <= 5e-3);
}

TEST_CASE("synthesize") {
  TempDir dir;
  write_text(dir.file("nu.json"), kTable);
  const auto r = run({"synthesize", dir.file("nu.json"), "--out", dir.file("model.json")});
  REQUIRE(r.code == 0);
  const auto summary = json::parse(r.out);
  CHECK(summary.at("dim") == 2);
  CHECK(summary.at("max_factorization_error").get<double>() < 1e-12);
  CHECK(summary.at("max_pairwise_overlap").get<double>() < 1e-12);
  const auto model = knob_model_from_json(read_json_file(dir.file("model.json")));
  CHECK(model.probability(0, 0, 0) == doctest::Approx(0.25));

  write_text(dir.file("bad.json"),
             R"({"a_settings":["a"],"b_settings":["b"],"outcomes":["c0","c1"],"rows":{"a|b":[0.5,0.6]}})");
  const auto bad = run({"synthesize", dir.file("bad.json")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("a|b") != std::string::npos);
  CHECK(run({"synthesize", dir.file("missing.json")}).code == 2);
}

TEST_CASE("synthesize an inequivalent model") {
  TempDir dir;
  write_text(dir.file("nu.json"), kTwoB);
  const auto r = run({"synthesize", dir.file("nu.json"), "--out", dir.file("model.json"), "--inequivalent", "--seed", "7"});
  REQUIRE(r.code == 0);
  const auto alt = json::parse(r.out).at("inequivalent");
  CHECK(alt.at("model_distance").get<double>() < 1e-12);
  CHECK(alt.at("norm_gap").get<double>() == doctest::Approx(1.0));
  CHECK(fs::exists(dir.file("model_inequivalent.json")));
  CHECK(run({"synthesize", dir.file("nu.json"), "--inequivalent"}).code == 2);
}

TEST_CASE("check") {
  TempDir dir;
  write_text(dir.file("nu.json"), kTwoB);
  REQUIRE(run({"synthesize", dir.file("nu.json"), "--out", dir.file("model.json")}).code == 0);
  const auto ok = run({"check", dir.file("model.json"), dir.file("nu.json")});
  CHECK(ok.code == 0);
  const auto report = json::parse(ok.out);
  CHECK(report.at("overlap").at("all_satisfied") == true);
  CHECK(report.at("separation").at("all_satisfied") == true);

  // perturbed preparation
  auto doc = read_json_file(dir.file("model.json"));
  auto model = knob_model_from_json(doc);
  ComplexMatrix rho = model.rho(0).matrix();
  const Eigen::Index n = rho.rows();
  rho = 0.9 * rho + 0.1 * ComplexMatrix::Identity(n, n) / static_cast<double>(n);
  doc["rho"]["a0"] = to_json(rho);
  write_json_file(dir.file("perturbed.json"), doc);
  const auto fail = run({"check", dir.file("perturbed.json"), dir.file("nu.json")});
  CHECK(fail.code == 4);
  CHECK(fail.err.find("a=a0") != std::string::npos);
}

TEST_CASE("check a superposition model against its own table") {
  TempDir dir;
  ComplexVector zero(2), plus(2);
  zero << 1.0, 0.0;
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const KnobModel m(KnobSpace({"zero", "plus"}, {"z"}, {"0", "1"}),
                    {HermitianOperator::projector(zero), HermitianOperator::projector(plus)},
                    {{HermitianOperator::diagonal({1, 0}), HermitianOperator::diagonal({0, 1})}});
  write_json_file(dir.file("model.json"), to_json(m));
  write_json_file(dir.file("nu.json"), to_json(induced_table(m)));
  const auto r = run({"check", dir.file("model.json"), dir.file("nu.json")});
  CHECK(r.code == 0);
  const auto rows = json::parse(r.out).at("overlap").at("rows");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].at("attained").get<double>() == doctest::Approx(0.5));
}

TEST_CASE("fit") {
  TempDir dir;
  DisagreementCurve data;
  for (int i = 0; i < 60; ++i) {
    const double t = 6.0 * i / 59;
    data.times.push_back(t);
    data.probabilities.push_back(model_probability({1.0, 1.81, 0.556}, t));
  }
  write_curve_csv(dir.file("record.csv"), data);
  const auto r = run({"fit", dir.file("record.csv"), "--curve-out", dir.file("fitted.csv")});
  REQUIRE(r.code == 0);
  const auto result = json::parse(r.out);
  CHECK(result.at("lambda").get<double>() == doctest::Approx(1.81).epsilon(0.005));
  CHECK(result.at("b").get<double>() == doctest::Approx(0.556).epsilon(0.01));
  CHECK(fs::exists(dir.file("fitted.csv")));

  const auto pinned = run({"fit", dir.file("record.csv"), "--fix-omega", "1"});
  REQUIRE(pinned.code == 0);
  CHECK(json::parse(pinned.out).at("omega") == 1.0);

  write_text(dir.file("short.csv"), "t,probability\n0,0.5\n1,0.4\n2,0.3\n");
  CHECK(run({"fit", dir.file("short.csv")}).code == 2);

  write_text(dir.file("bad.csv"), "t,probability\n0,0.5\n1,1.2\n2,0.3\n3,0.2\n");
  const auto bad = run({"fit", dir.file("bad.csv")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 3") != std::string::npos);

  write_text(dir.file("flat.csv"), "t,probability\n0,0.5\n1,0.5\n2,0.5\n3,0.5\n4,0.5\n");
  const auto flat = run({"fit", dir.file("flat.csv")});
  CHECK(flat.code == 0);
  CHECK(json::parse(flat.out).at("converged") == false);
  CHECK(flat.err.find("degenerate") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"simulate", "--no-such-flag"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

}
