// jbound: compute, refine and numerically certify Jensen-type inequality
// bounds for uniformly convex, strongly convex, Phi-convex and
// superquadratic functions.
//
// Subcommands: check, fuzz, sweep, certify. Exit codes: 0 = pass,
// 1 = usage / parse / hypothesis error, 2 = inequality violation.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "jbound/bounds.hpp"
#include "jbound/json_io.hpp"
#include "jbound/oracle.hpp"
#include "jbound/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

struct CommonOpts {
  double tol_abs = 1e-9;
  double tol_rel = 1e-9;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
};

jbound::Tolerances tolerances(const CommonOpts& opts) {
  return {opts.tol_abs, opts.tol_rel};
}

nlohmann::json manifest(const std::string& command, const std::string& input,
                        const CommonOpts& opts) {
  nlohmann::json m;
  m["command"] = command;
  m["input"] = input;
  m["format"] = opts.format;
  m["tol_abs"] = opts.tol_abs;
  m["tol_rel"] = opts.tol_rel;
  m["seed"] = opts.seed;
  m["version"] = jbound::kVersion;
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw jbound::ParseError("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Arguments may be a path or inline JSON (detected by a leading brace).
nlohmann::json load_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '['))
    return jbound::parse_json_text(arg);
  return jbound::parse_json_text(read_file(arg));
}

void emit(const std::string& text, const CommonOpts& opts) {
  if (opts.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out, std::ios::binary);
  if (!out)
    throw jbound::Error("cannot write output file '" + opts.out + "'");
  out << text;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_format = true) {
  cmd->add_option("--tol-abs", opts.tol_abs, "Absolute slack tolerance");
  cmd->add_option("--tol-rel", opts.tol_rel, "Relative slack tolerance");
  cmd->add_option("--seed", opts.seed, "Seed override (fuzz)");
  if (with_format)
    cmd->add_option("--format", opts.format, "Output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", opts.out, "Write output to this path");
}

int run_check(const std::string& input, const std::string& theorem_arg,
              const CommonOpts& opts) {
  jbound::ParsedInstance parsed =
      jbound::instance_from_json(load_json_arg(input));
  std::optional<jbound::TheoremId> id = parsed.theorem;
  if (!theorem_arg.empty()) id = jbound::theorem_from_string(theorem_arg);
  if (!id)
    throw jbound::ParseError(
        "no theorem id: pass --theorem or a 'theorem' field in the instance");

  const jbound::BoundReport rep =
      jbound::evaluate_theorem(parsed.instance, *id, tolerances(opts));
  const nlohmann::json mani = manifest("check", input, opts);
  if (opts.format == "csv") {
    emit(jbound::report_to_csv(rep, mani), opts);
  } else {
    nlohmann::json out;
    out["manifest"] = mani;
    out["report"] = jbound::to_json(rep);
    emit(out.dump(2) + "\n", opts);
  }
  return rep.pass ? kExitOk : kExitViolation;
}

int run_fuzz(const std::string& input, const CommonOpts& opts, bool seed_set,
             bool tol_abs_set, bool tol_rel_set) {
  jbound::oracle::FuzzConfig config =
      jbound::fuzz_config_from_json(load_json_arg(input));
  if (seed_set) config.seed = opts.seed;
  if (tol_abs_set) config.tol.abs = opts.tol_abs;
  if (tol_rel_set) config.tol.rel = opts.tol_rel;

  const jbound::oracle::FuzzSummary summary =
      jbound::oracle::run_campaign(config);

  CommonOpts mopts = opts;
  mopts.seed = config.seed;
  mopts.tol_abs = config.tol.abs;
  mopts.tol_rel = config.tol.rel;
  nlohmann::json out;
  out["manifest"] = manifest("fuzz", input, mopts);
  out["summary"] = jbound::to_json(summary);
  emit(out.dump(2) + "\n", opts);
  return summary.total_confirmed == 0 ? kExitOk : kExitViolation;
}

int run_sweep(const std::string& input, const std::string& theorem_arg,
              int density, const CommonOpts& opts) {
  jbound::ParsedInstance parsed =
      jbound::instance_from_json(load_json_arg(input));
  std::optional<jbound::TheoremId> id = parsed.theorem;
  if (!theorem_arg.empty()) id = jbound::theorem_from_string(theorem_arg);
  if (!id)
    throw jbound::ParseError(
        "no theorem id: pass --theorem or a 'theorem' field in the instance");

  const auto rows = jbound::oracle::sweep_lambda(parsed.instance, *id, density,
                                                 tolerances(opts));
  std::ostringstream os;
  const nlohmann::json mani = manifest("sweep", input, opts);
  for (const auto& [key, v] : mani.items())
    os << "# manifest." << key << ","
       << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  os << "t,lhs,mid,rhs,slack\n";
  bool all_pass = true;
  for (const auto& [t, rep] : rows) {
    os << jbound::format_double(t) << "," << jbound::format_double(rep.lhs)
       << ",";
    if (rep.mid) os << jbound::format_double(*rep.mid);
    os << "," << jbound::format_double(rep.rhs) << ","
       << jbound::format_double(rep.slack) << "\n";
    all_pass = all_pass && rep.pass;
  }
  emit(os.str(), opts);
  return all_pass ? kExitOk : kExitViolation;
}

int run_certify(const std::string& function_arg, const std::string& class_arg,
                bool h_superadditive, int density, const CommonOpts& opts) {
  const jbound::FunctionSpec spec =
      jbound::spec_from_json(load_json_arg(function_arg));

  jbound::CertReport cert;
  if (h_superadditive) {
    cert = jbound::certify_h_superadditive(
        [&spec](double v) { return spec.derivative(v); },
        [&spec](double v) { return spec.modulus_derivative(v); },
        spec.domain(), density, opts.tol_abs);
  } else if (!class_arg.empty()) {
    cert = jbound::certify_class(
        spec, jbound::function_class_from_string(class_arg), density,
        opts.tol_abs);
  } else {
    throw jbound::ParseError("pass --class TAG or --h-superadditive");
  }

  nlohmann::json out;
  out["manifest"] = manifest("certify", function_arg, opts);
  out["certification"] = jbound::to_json(cert);
  emit(out.dump(2) + "\n", opts);
  return cert.passed ? kExitOk : kExitViolation;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jensen-type inequality bounds: compute, refine, certify"};
  app.set_version_flag("--version", jbound::kVersion);
  app.require_subcommand(1);

  CommonOpts check_opts, fuzz_opts, sweep_opts, certify_opts;
  std::string check_input, check_theorem;
  std::string fuzz_input;
  std::string sweep_input, sweep_theorem;
  int sweep_density = 11;
  std::string certify_function, certify_class_arg;
  bool certify_h = false;
  int certify_density = 50;

  CLI::App* check = app.add_subcommand(
      "check", "Evaluate one theorem chain on an instance file");
  check->add_option("instance", check_input, "Instance JSON (path or inline)")
      ->required();
  check->add_option("--theorem", check_theorem, "Theorem id (e.g. thm6_mean)");
  add_common(check, check_opts);

  CLI::App* fuzz = app.add_subcommand(
      "fuzz", "Run a randomized campaign from a config file");
  fuzz->add_option("config", fuzz_input, "Fuzz config JSON (path or inline)")
      ->required();
  add_common(fuzz, fuzz_opts, false);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Sweep the lambda parameter of a lambda theorem");
  sweep->add_option("instance", sweep_input, "Instance JSON (path or inline)")
      ->required();
  sweep->add_option("--theorem", sweep_theorem, "Lambda theorem id");
  sweep->add_option("--density", sweep_density, "Grid points in [0,1]")
      ->check(CLI::Range(2, 100000));
  add_common(sweep, sweep_opts, false);

  CLI::App* certify = app.add_subcommand(
      "certify", "Certify a function spec against a class or H-superadditivity");
  certify->add_option("--function", certify_function,
                      "Function spec JSON (path or inline)")
      ->required();
  certify->add_option("--class", certify_class_arg, "Class tag to certify");
  certify->add_flag("--h-superadditive", certify_h,
                    "Check f' against Phi' superadditivity");
  certify->add_option("--density", certify_density, "Grid density")
      ->check(CLI::Range(2, 100000));
  add_common(certify, certify_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return run_check(check_input, check_theorem, check_opts);
    if (fuzz->parsed())
      return run_fuzz(fuzz_input, fuzz_opts,
                      fuzz->count("--seed") > 0, fuzz->count("--tol-abs") > 0,
                      fuzz->count("--tol-rel") > 0);
    if (sweep->parsed())
      return run_sweep(sweep_input, sweep_theorem, sweep_density, sweep_opts);
    if (certify->parsed())
      return run_certify(certify_function, certify_class_arg, certify_h,
                         certify_density, certify_opts);
  } catch (const jbound::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
