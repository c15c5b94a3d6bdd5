#include "metaflip/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "metaflip/constraints.hpp"
#include "metaflip/curve_io.hpp"
#include "metaflip/errors.hpp"
#include "metaflip/fitting.hpp"
#include "metaflip/flipflop.hpp"
#include "metaflip/model_io.hpp"
#include "metaflip/pde_oracle.hpp"
#include "metaflip/synthesis.hpp"

namespace metaflip {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ContractViolation("--set " + key + ": not a number: '" + text + "'");
  return v;
}

void apply_override(FlipflopParams& p, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ContractViolation("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  if (key == "units") {
    p.units = units_from_string(value);
    return;
  }
  static const std::map<std::string, double FlipflopParams::*> fields{
      {"lambda", &FlipflopParams::lambda}, {"b", &FlipflopParams::width}, {"width", &FlipflopParams::width},
      {"c", &FlipflopParams::bias},        {"bias", &FlipflopParams::bias}, {"mass", &FlipflopParams::mass},
      {"m", &FlipflopParams::mass},        {"spring", &FlipflopParams::spring}, {"k", &FlipflopParams::spring},
      {"hbar", &FlipflopParams::hbar}};
  const auto it = fields.find(key);
  if (it == fields.end()) throw ContractViolation("--set: unknown key '" + key + "'");
  p.*(it->second) = parse_double(key, value);
}

json curve_to_json(const DisagreementCurve& curve) {
  return {{"units", to_string(curve.units)}, {"t", curve.times}, {"probability", curve.probabilities}};
}

// Writes to `path`, or to `out` when the path is empty or "-".
template <typename Write>
void emit(const std::string& path, std::ostream& out, Write&& write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ContractViolation("cannot write " + path);
  write(file);
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw ContractViolation("input file not found: " + path);
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  FlipflopParams params;
  std::string units = "dimensionless";
  std::vector<std::string> overrides;
  double t_min = 0.0;
  double t_max = 6.0;
  double dt = 0.01;
  bool classical = false;
  bool numeric = false;
  std::string out;
  std::string format = "csv";
};

int cmd_simulate(SimulateArgs& args, std::ostream& out) {
  FlipflopParams p = args.params;
  p.units = units_from_string(args.units);
  for (const auto& o : args.overrides) apply_override(p, o);
  p.validate();
  if (p.bias != 0.0 && !args.numeric && !args.classical)
    throw ContractViolation("off-edge start (c != 0) needs --numeric quadrature");
  if (args.classical && args.numeric) throw ContractViolation("--classical and --numeric are exclusive");
  const CurveModel model = args.classical ? CurveModel::Classical
                           : args.numeric ? CurveModel::QuantumNumeric
                                          : CurveModel::Quantum;
  const auto curve = disagreement_curve(p, args.t_min, args.t_max, args.dt, model);
  emit(args.out, out, [&](std::ostream& s) {
    if (args.format == "json")
      s << curve_to_json(curve).dump(2) << '\n';
    else
      write_curve_csv(s, curve);
  });
  return kExitOk;
}

// --- oracle -----------------------------------------------------------------

struct OracleArgs {
  double lambda = 1.81;
  double b = 0.556;
  GridSpec grid;
  double t_max = 3.0;
  double t_step = 0.5;
  double tol = 5e-3;
  double leak_threshold = 1e-10;
  bool strict_leakage = false;
  std::string out;
};

int cmd_oracle(const OracleArgs& args, std::ostream& out, std::ostream& err) {
  if (!(args.t_max >= 0)) throw ContractViolation("--t-max must be >= 0");
  if (!(args.t_step > 0)) throw ContractViolation("--t-step must be positive");
  if (!(args.tol > 0)) throw ContractViolation("--tol must be positive");
  FlipflopParams p;
  p.lambda = args.lambda;
  p.width = args.b;
  p.validate();

  GridState state = init_packet(args.grid, args.b, 0.0);
  const SplitStepPropagator propagator(args.grid, args.lambda);
  EvolveOptions options;
  options.leakage_threshold = args.leak_threshold;
  options.policy = args.strict_leakage ? LeakagePolicy::Abort : LeakagePolicy::Record;

  json rows = json::array();
  double max_error = 0.0;
  const auto samples = static_cast<long long>(std::floor(args.t_max / args.t_step + 1e-9));
  for (long long k = 0; k <= samples; ++k) {
    const double t = static_cast<double>(k) * args.t_step;
    try {
      propagator.advance(state, t, options);
    } catch (const LeakageError& e) {
      err << "error: " << e.what() << '\n';
      return kExitNumerical;
    }
    const double analytic = disagreement_probability(t, p);
    const double numeric = disagreement_from_grid(state);
    const double error = std::abs(analytic - numeric);
    max_error = std::max(max_error, error);
    rows.push_back({{"t", t},
                    {"analytic", analytic},
                    {"numeric", numeric},
                    {"error", error},
                    {"norm_drift", norm_check(state)},
                    {"boundary_mass", boundary_mass(state)}});
  }
  const bool leaked = state.peak_boundary_mass > args.leak_threshold;
  const bool pass = max_error <= args.tol;
  const json report{{"lambda", args.lambda},
                    {"b", args.b},
                    {"n", args.grid.n},
                    {"L", args.grid.half_width},
                    {"dt", args.grid.dt},
                    {"tol", args.tol},
                    {"max_error", max_error},
                    {"peak_boundary_mass", state.peak_boundary_mass},
                    {"leakage", leaked},
                    {"pass", pass},
                    {"samples", rows}};
  emit(args.out, out, [&](std::ostream& s) { s << report.dump(2) << '\n'; });

  if (leaked)
    err << "warning: boundary mass reached " << state.peak_boundary_mass << " (threshold "
        << args.leak_threshold << "); enlarge the domain half-width --L\n";
  if (!pass) {
    err << "max |analytic - numeric| = " << max_error << " exceeds --tol " << args.tol << '\n';
    return leaked ? kExitNumerical : kExitConstraint;
  }
  return kExitOk;
}

// --- synthesize -------------------------------------------------------------

struct SynthesizeArgs {
  std::string table;
  std::string out;
  bool inequivalent = false;
  std::optional<std::uint64_t> seed;
  std::string inequivalent_out;
};

double max_pairwise_overlap(const KnobModel& model) {
  double worst = 0.0;
  const auto n = model.space().a_settings().size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) worst = std::max(worst, overlap(model.rho(i), model.rho(j)));
  return worst;
}

fs::path sibling_path(const std::string& out, const std::string& suffix) {
  fs::path base = out.empty() || out == "-" ? fs::path("model.json") : fs::path(out);
  return base.parent_path() / (base.stem().string() + suffix + base.extension().string());
}

int cmd_synthesize(const SynthesizeArgs& args, std::ostream& out) {
  require_file(args.table);
  const RelFreqTable nu = relfreq_table_from_json(read_json_file(args.table));
  if (args.inequivalent && !args.seed) throw ContractViolation("--inequivalent requires --seed");

  const SynthesizedModel synth = synthesize_model(nu);
  const auto check = factorization_error(synth.model, nu);
  json summary{{"dim", synth.model.dim()},
               {"max_factorization_error", check.max_error},
               {"max_pairwise_overlap", max_pairwise_overlap(synth.model)}};

  if (args.inequivalent) {
    const InequivalentModel alt = generate_inequivalent_model(nu, *args.seed);
    const fs::path alt_path =
        args.inequivalent_out.empty() ? sibling_path(args.out, "_inequivalent") : fs::path(args.inequivalent_out);
    write_json_file(alt_path, to_json(alt.model));
    const auto& b = nu.space().b_settings();
    summary["inequivalent"] = {{"path", alt_path.string()},
                               {"seed", *args.seed},
                               {"dim", alt.model.dim()},
                               {"max_factorization_error", factorization_error(alt.model, nu).max_error},
                               {"model_distance", model_distance(synth.model, alt.model)},
                               {"b1", b[alt.b1]},
                               {"b2", b[alt.b2]},
                               {"outcome", nu.space().outcomes()[alt.outcome]},
                               {"norm_gap", alt.norm_gap}};
  }

  if (args.out.empty() || args.out == "-") {
    out << json{{"model", to_json(synth.model)}, {"summary", summary}}.dump(2) << '\n';
  } else {
    write_json_file(args.out, to_json(synth.model));
    out << summary.dump(2) << '\n';
  }
  return kExitOk;
}

// --- check ------------------------------------------------------------------

struct CheckArgs {
  std::string model;
  std::string table;
  std::string out;
};

int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err) {
  require_file(args.model);
  require_file(args.table);
  const KnobModel model = knob_model_from_json(read_json_file(args.model));
  const RelFreqTable nu = relfreq_table_from_json(read_json_file(args.table));
  try {
    const BoundReport overlap_report = check_overlap_constraint(model, nu);
    const BoundReport separation_report = check_separation_constraint(model, nu);
    const auto fac = factorization_error(model, nu);
    const json report{{"factorization_error", fac.max_error},
                      {"overlap", to_json(overlap_report)},
                      {"separation", to_json(separation_report)}};
    emit(args.out, out, [&](std::ostream& s) { s << report.dump(2) << '\n'; });
    if (!overlap_report.all_satisfied() || !separation_report.all_satisfied()) {
      err << "bound violations: overlap " << overlap_report.violations() << ", separation "
          << separation_report.violations() << '\n';
      return kExitConstraint;
    }
  } catch (const FactorizationFailure& e) {
    const auto& c = e.check();
    const auto& space = nu.space();
    err << "error: " << e.what() << "; worst entry (a=" << space.a_settings()[c.a] << ", b=" << space.b_settings()[c.b]
        << ", c=" << space.outcomes()[c.c] << ") error " << c.max_error << '\n';
    return kExitConstraint;
  }
  return kExitOk;
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
  std::string record;
  std::string out;
  std::string curve_out;
  FitConfig config;
  std::optional<double> fix_omega;
};

int cmd_fit(FitArgs& args, std::ostream& out, std::ostream& err) {
  require_file(args.record);
  const DisagreementCurve data = load_record_csv(args.record);
  FitConfig config = args.config;
  config.fixed_omega = args.fix_omega;
  const FitResult result = fit(data, config);
  emit(args.out, out, [&](std::ostream& s) { s << to_json(result).dump(2) << '\n'; });
  if (!args.curve_out.empty()) {
    const auto curve = fitted_curve(result, data);
    std::ofstream file(args.curve_out);
    if (!file) throw ContractViolation("cannot write " + args.curve_out);
    file << "# units=" << to_string(data.units) << '\n' << "t,probability,fitted\n";
    for (std::size_t i = 0; i < data.size(); ++i)
      file << format_double(data.times[i]) << ',' << format_double(data.probabilities[i]) << ','
           << format_double(curve.probabilities[i]) << '\n';
  }
  if (result.degenerate) err << "warning: " << result.message << '\n';
  else if (!result.converged) err << "warning: " << result.message << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metastable flip-flop model toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Disagreement probability vs time as CSV or JSON");
  simulate->add_option("--lambda", sim.params.lambda, "Coupling lambda")->capture_default_str();
  simulate->add_option("--b", sim.params.width, "Initial packet width")->capture_default_str();
  simulate->add_option("--c", sim.params.bias, "Initial packet centre (needs --numeric when nonzero)")
      ->capture_default_str();
  simulate->add_option("--mass", sim.params.mass, "Mass (physical units)")->capture_default_str();
  simulate->add_option("--spring", sim.params.spring, "Spring constant k (physical units)")->capture_default_str();
  simulate->add_option("--hbar", sim.params.hbar, "Planck constant (physical units)")->capture_default_str();
  simulate->add_option("--units", sim.units, "dimensionless or physical")
      ->check(CLI::IsMember({"dimensionless", "physical"}))
      ->capture_default_str();
  simulate->add_option("--set", sim.overrides, "Parameter override key=value (repeatable)");
  simulate->add_option("--t-min", sim.t_min, "First time")->capture_default_str();
  simulate->add_option("--t-max", sim.t_max, "Last time")->capture_default_str();
  simulate->add_option("--dt", sim.dt, "Time step")->capture_default_str();
  simulate->add_flag("--classical", sim.classical, "Classical (hbar -> 0) curve");
  simulate->add_flag("--numeric", sim.numeric, "Quadrature of the joint density (any c)");
  simulate->add_option("--out,-o", sim.out, "Output path (stdout when omitted)");
  simulate->add_option("--format", sim.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "Compare the closed form with a split-step PDE run");
  oracle->add_option("--lambda", orc.lambda)->capture_default_str();
  oracle->add_option("--b", orc.b)->capture_default_str();
  oracle->add_option("--n", orc.grid.n, "Grid points per axis (power of two)")->capture_default_str();
  oracle->add_option("--L", orc.grid.half_width, "Domain half-width")->capture_default_str();
  oracle->add_option("--dt", orc.grid.dt, "Time step")->capture_default_str();
  oracle->add_option("--t-max", orc.t_max)->capture_default_str();
  oracle->add_option("--t-step", orc.t_step, "Spacing of the compared times")->capture_default_str();
  oracle->add_option("--tol", orc.tol, "Pass threshold on max |analytic - numeric|")->capture_default_str();
  oracle->add_option("--leak-threshold", orc.leak_threshold, "Boundary mass alarm")->capture_default_str();
  oracle->add_flag("--strict-leakage", orc.strict_leakage, "Abort (exit 3) as soon as leakage is seen");
  oracle->add_option("--out,-o", orc.out, "Report path (stdout when omitted)");

  SynthesizeArgs syn;
  auto* synthesize = app.add_subcommand("synthesize", "Build a model that factors a table exactly");
  synthesize->add_option("table", syn.table, "Relative-frequency table JSON")->required();
  synthesize->add_option("--out,-o", syn.out, "Model path (stdout when omitted)");
  synthesize->add_flag("--inequivalent", syn.inequivalent, "Also write an inequivalent fitting model");
  synthesize->add_option("--seed", syn.seed, "Seed for --inequivalent");
  synthesize->add_option("--inequivalent-out", syn.inequivalent_out, "Path of the inequivalent model");

  CheckArgs chk;
  auto* check = app.add_subcommand("check", "Factorization plus overlap and separation bounds");
  check->add_option("model", chk.model, "Model JSON")->required();
  check->add_option("table", chk.table, "Relative-frequency table JSON")->required();
  check->add_option("--out,-o", chk.out, "Report path (stdout when omitted)");

  FitArgs fa;
  auto* fitcmd = app.add_subcommand("fit", "Fit (omega, lambda, b) to a disagreement record");
  fitcmd->add_option("record", fa.record, "CSV record (t,probability)")->required();
  fitcmd->add_option("--out,-o", fa.out, "Result path (stdout when omitted)");
  fitcmd->add_option("--curve-out", fa.curve_out, "CSV of data and fitted curve");
  fitcmd->add_option("--omega-min", fa.config.omega.min)->capture_default_str();
  fitcmd->add_option("--omega-max", fa.config.omega.max)->capture_default_str();
  fitcmd->add_option("--lambda-min", fa.config.lambda.min)->capture_default_str();
  fitcmd->add_option("--lambda-max", fa.config.lambda.max)->capture_default_str();
  fitcmd->add_option("--b-min", fa.config.b.min)->capture_default_str();
  fitcmd->add_option("--b-max", fa.config.b.max)->capture_default_str();
  fitcmd->add_option("--fix-omega", fa.fix_omega, "Pin omega (2-parameter fit)");
  fitcmd->add_option("--grid-seeds", fa.config.grid_seeds, "Grid points per axis")->capture_default_str();
  fitcmd->add_option("--tolerance", fa.config.tolerance, "Simplex size tolerance")->capture_default_str();
  fitcmd->add_option("--max-iters", fa.config.max_iters)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*oracle) return cmd_oracle(orc, out, err);
    if (*synthesize) return cmd_synthesize(syn, out);
    if (*check) return cmd_check(chk, out, err);
    if (*fitcmd) return cmd_fit(fa, out, err);
  } catch (const FactorizationFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitConstraint;
  } catch (const NumericalDomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace metaflip
