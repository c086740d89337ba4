#include "jbound/json_io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace jbound {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t upto = std::min(e.byte, text.size());
    for (std::size_t i = 0; i < upto; ++i)
      if (text[i] == '\n') ++line;
    std::ostringstream os;
    os << "line " << line << ": " << e.what();
    throw ParseError(os.str());
  }
}

namespace {

void check_fields(const json& j, std::initializer_list<const char*> allowed,
                  const char* ctx) {
  if (!j.is_object())
    throw ParseError(std::string(ctx) + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end())
      throw ParseError("field '" + key + "': unknown field in " + ctx);
  }
}

double get_number(const json& j, const char* field) {
  if (!j.contains(field))
    throw ParseError("field '" + std::string(field) + "': missing");
  if (!j.at(field).is_number())
    throw ParseError("field '" + std::string(field) + "': expected a number");
  return j.at(field).get<double>();
}

std::vector<double> get_array(const json& j, const char* field) {
  const auto& v = j.at(field);
  if (!v.is_array())
    throw ParseError("field '" + std::string(field) +
                     "': expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number())
      throw ParseError("field '" + std::string(field) +
                       "': expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Interval interval_from(const json& j, const char* field) {
  std::vector<double> d = get_array(j, field);
  if (d.size() != 2)
    throw ParseError("field '" + std::string(field) +
                     "': expected [lo, hi]");
  return Interval{d[0], d[1]};
}

} // namespace

json to_json(const FunctionSpec& spec) {
  json j;
  switch (spec.kind()) {
    case FunctionSpec::Kind::Power:
      j["kind"] = "power";
      j["n"] = spec.power_exponent();
      j["domain"] = {spec.domain().lo, spec.domain().hi};
      break;
    case FunctionSpec::Kind::StrongQuadratic:
      j["kind"] = "strong_quadratic";
      j["c"] = spec.strong_coefficient();
      j["domain"] = {spec.domain().lo, spec.domain().hi};
      break;
    case FunctionSpec::Kind::Combination: {
      j["kind"] = "combo";
      json terms = json::array();
      for (const auto& t : spec.terms())
        terms.push_back({{"coeff", t.coeff}, {"atom", to_json(*t.atom)}});
      j["terms"] = std::move(terms);
      break;
    }
  }
  return j;
}

FunctionSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ParseError("field 'kind': missing or not a string");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "power") {
      check_fields(j, {"kind", "n", "domain"}, "power spec");
      const double n = get_number(j, "n");
      if (n != static_cast<int>(n))
        throw ParseError("field 'n': expected an integer");
      return FunctionSpec::power(static_cast<int>(n),
                                 interval_from(j, "domain"));
    }
    if (kind == "strong_quadratic") {
      check_fields(j, {"kind", "c", "domain"}, "strong_quadratic spec");
      return FunctionSpec::strong_quadratic(get_number(j, "c"),
                                            interval_from(j, "domain"));
    }
    if (kind == "combo") {
      check_fields(j, {"kind", "terms"}, "combo spec");
      if (!j.contains("terms") || !j.at("terms").is_array())
        throw ParseError("field 'terms': expected an array");
      std::vector<std::pair<double, FunctionSpec>> terms;
      for (const auto& t : j.at("terms")) {
        check_fields(t, {"coeff", "atom"}, "combo term");
        if (!t.contains("atom"))
          throw ParseError("field 'atom': missing in combo term");
        terms.emplace_back(get_number(t, "coeff"),
                           spec_from_json(t.at("atom")));
      }
      return FunctionSpec::combination(std::move(terms));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("function spec: ") + e.what());
  }
  throw ParseError("field 'kind': unknown kind '" + kind + "'");
}

json to_json(const Instance& inst) {
  json j;
  j["function"] = to_json(inst.spec);
  j["class"] = std::string(to_string(inst.cls));
  j["x"] = inst.x;
  if (!inst.a.empty()) {
    j["a"] = inst.a;
    j["mode"] = std::string(to_string(inst.a_mode));
  }
  if (!inst.p.empty()) j["p"] = inst.p;
  if (!inst.q.empty()) j["q"] = inst.q;
  if (!inst.lambda.empty()) j["lambda"] = inst.lambda;
  if (inst.c) j["c"] = *inst.c;
  if (!inst.phi.is_derivative()) {
    json pts = json::array();
    for (const auto& [u, v] : inst.phi.points()) pts.push_back({u, v});
    j["subgradient"] = {{"rule", "table"}, {"points", std::move(pts)}};
  }
  return j;
}

ParsedInstance instance_from_json(const json& j) {
  check_fields(j,
               {"function", "class", "x", "a", "mode", "p", "q", "lambda", "c",
                "subgradient", "theorem"},
               "instance");
  if (!j.contains("function"))
    throw ParseError("field 'function': missing");
  if (!j.contains("x")) throw ParseError("field 'x': missing");

  ParsedInstance out;
  out.instance.spec = spec_from_json(j.at("function"));
  out.instance.x = get_array(j, "x");

  if (j.contains("theorem")) {
    if (!j.at("theorem").is_string())
      throw ParseError("field 'theorem': expected a string");
    out.theorem = theorem_from_string(j.at("theorem").get<std::string>());
  }

  if (j.contains("class")) {
    if (!j.at("class").is_string())
      throw ParseError("field 'class': expected a string");
    out.instance.cls =
        function_class_from_string(j.at("class").get<std::string>());
  } else if (out.theorem && theorem_info(*out.theorem).required_class) {
    out.instance.cls = *theorem_info(*out.theorem).required_class;
  } else {
    out.instance.cls = FunctionClass::UniformlyConvex;
  }

  if (j.contains("a")) {
    out.instance.a = get_array(j, "a");
    if (j.contains("mode")) {
      if (!j.at("mode").is_string())
        throw ParseError("field 'mode': expected a string");
      out.instance.a_mode =
          weight_mode_from_string(j.at("mode").get<std::string>());
    }
  } else if (j.contains("mode")) {
    throw ParseError("field 'mode': given without 'a'");
  }
  if (j.contains("p")) out.instance.p = get_array(j, "p");
  if (j.contains("q")) out.instance.q = get_array(j, "q");
  if (j.contains("lambda")) out.instance.lambda = get_array(j, "lambda");
  if (j.contains("c")) out.instance.c = get_number(j, "c");

  if (j.contains("subgradient")) {
    const auto& sg = j.at("subgradient");
    check_fields(sg, {"rule", "points"}, "subgradient");
    if (!sg.contains("rule") || !sg.at("rule").is_string())
      throw ParseError("field 'rule': missing or not a string");
    const std::string rule = sg.at("rule").get<std::string>();
    if (rule == "derivative") {
      out.instance.phi = Subgradient::derivative();
    } else if (rule == "table") {
      if (!sg.contains("points") || !sg.at("points").is_array())
        throw ParseError("field 'points': expected an array of [u, value]");
      std::vector<std::pair<double, double>> pts;
      for (const auto& e : sg.at("points")) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
            !e[1].is_number())
          throw ParseError("field 'points': expected an array of [u, value]");
        pts.emplace_back(e[0].get<double>(), e[1].get<double>());
      }
      out.instance.phi = Subgradient::table(std::move(pts));
    } else {
      throw ParseError("field 'rule': unknown subgradient rule '" + rule + "'");
    }
  }
  return out;
}

json to_json(const BoundReport& rep) {
  json j;
  j["theorem"] = std::string(to_string(rep.theorem));
  j["lhs"] = rep.lhs;
  if (rep.mid) j["mid"] = *rep.mid;
  j["rhs"] = rep.rhs;
  j["slack"] = rep.slack;
  j["pass"] = rep.pass;
  json terms = json::object();
  for (const auto& [name, v] : rep.terms) terms[name] = v;
  j["terms"] = std::move(terms);
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

std::string report_to_csv(const BoundReport& rep, const json& manifest) {
  std::ostringstream os;
  os << "name,value\n";
  if (manifest.is_object()) {
    for (const auto& [key, v] : manifest.items()) {
      os << "manifest." << key << ",";
      if (v.is_number_float())
        os << format_double(v.get<double>());
      else if (v.is_string())
        os << v.get<std::string>();
      else
        os << v.dump();
      os << "\n";
    }
  }
  os << "theorem," << to_string(rep.theorem) << "\n";
  os << "lhs," << format_double(rep.lhs) << "\n";
  if (rep.mid) os << "mid," << format_double(*rep.mid) << "\n";
  os << "rhs," << format_double(rep.rhs) << "\n";
  os << "slack," << format_double(rep.slack) << "\n";
  os << "pass," << (rep.pass ? "true" : "false") << "\n";
  for (const auto& [name, v] : rep.terms)
    os << "term." << name << "," << format_double(v) << "\n";
  if (!rep.note.empty()) os << "note," << rep.note << "\n";
  return os.str();
}

json to_json(const CertReport& rep) {
  json j;
  j["check"] = rep.check;
  j["passed"] = rep.passed;
  j["min_slack"] = rep.min_slack;
  j["worst"] = {{"x", rep.worst_x}, {"y", rep.worst_y}, {"t", rep.worst_t}};
  j["samples"] = rep.samples;
  j["tol_abs"] = rep.tol_abs;
  return j;
}

oracle::FuzzConfig fuzz_config_from_json(const json& j) {
  check_fields(j,
               {"seed", "trials", "n_range", "theorems", "classes", "tol_abs",
                "tol_rel"},
               "fuzz config");
  oracle::FuzzConfig c;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number())
      throw ParseError("field 'seed': expected a number");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("trials")) {
    const double t = get_number(j, "trials");
    if (t < 1 || t != static_cast<int>(t))
      throw ParseError("field 'trials': expected an integer >= 1");
    c.trials = static_cast<int>(t);
  }
  if (j.contains("n_range")) {
    std::vector<double> r = get_array(j, "n_range");
    if (r.size() != 2 || r[0] < 2 || r[1] < r[0])
      throw ParseError("field 'n_range': expected [lo, hi] with 2 <= lo <= hi");
    c.n_min = static_cast<int>(r[0]);
    c.n_max = static_cast<int>(r[1]);
  }
  if (j.contains("theorems") && !(j.at("theorems").is_string() &&
                                  j.at("theorems").get<std::string>() == "all")) {
    if (!j.at("theorems").is_array())
      throw ParseError("field 'theorems': expected \"all\" or an array of ids");
    for (const auto& e : j.at("theorems")) {
      if (!e.is_string())
        throw ParseError("field 'theorems': expected theorem id strings");
      c.theorems.push_back(theorem_from_string(e.get<std::string>()));
    }
  }
  if (j.contains("classes")) {
    if (!j.at("classes").is_array())
      throw ParseError("field 'classes': expected an array of class tags");
    for (const auto& e : j.at("classes")) {
      if (!e.is_string())
        throw ParseError("field 'classes': expected class tag strings");
      c.classes.push_back(function_class_from_string(e.get<std::string>()));
    }
  }
  if (j.contains("tol_abs")) c.tol.abs = get_number(j, "tol_abs");
  if (j.contains("tol_rel")) c.tol.rel = get_number(j, "tol_rel");
  return c;
}

json to_json(const oracle::FuzzConfig& config) {
  json j;
  j["seed"] = config.seed;
  j["trials"] = config.trials;
  j["n_range"] = {config.n_min, config.n_max};
  if (config.theorems.empty()) {
    j["theorems"] = "all";
  } else {
    json ids = json::array();
    for (TheoremId id : config.theorems)
      ids.push_back(std::string(to_string(id)));
    j["theorems"] = std::move(ids);
  }
  if (!config.classes.empty()) {
    json cls = json::array();
    for (FunctionClass c : config.classes)
      cls.push_back(std::string(to_string(c)));
    j["classes"] = std::move(cls);
  }
  j["tol_abs"] = config.tol.abs;
  j["tol_rel"] = config.tol.rel;
  return j;
}

json to_json(const oracle::Counterexample& cex) {
  json j;
  j["instance"] = to_json(cex.instance);
  j["theorem"] = std::string(to_string(cex.theorem));
  j["violation"] = cex.violation;
  j["shrink_steps"] = cex.shrink_steps;
  return j;
}

json to_json(const oracle::FuzzSummary& summary) {
  json j;
  j["config"] = to_json(summary.config);
  json campaigns = json::array();
  for (const auto& camp : summary.campaigns) {
    json cj;
    cj["theorem"] = std::string(to_string(camp.theorem));
    cj["trials"] = camp.trials;
    cj["confirmed"] = camp.confirmed;
    cj["min_slack"] = camp.min_slack;
    cj["max_path_delta"] = camp.max_path_delta;
    json cexes = json::array();
    for (const auto& cex : camp.counterexamples) cexes.push_back(to_json(cex));
    cj["counterexamples"] = std::move(cexes);
    if (!camp.note.empty()) cj["note"] = camp.note;
    campaigns.push_back(std::move(cj));
  }
  j["campaigns"] = std::move(campaigns);
  j["total_confirmed"] = summary.total_confirmed;
  return j;
}

} // namespace jbound
