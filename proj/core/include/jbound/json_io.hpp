#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "jbound/bounds.hpp"
#include "jbound/convexity.hpp"
#include "jbound/oracle.hpp"

namespace jbound {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// json::parse with syntax errors rewrapped as ParseError naming the line.
nlohmann::json parse_json_text(const std::string& text);

// Function specs. Field names are fixed; unknown fields are rejected.
//   {"kind":"power","n":3,"domain":[0,4]}
//   {"kind":"strong_quadratic","c":1.0,"domain":[-2,2]}
//   {"kind":"combo","terms":[{"coeff":0.5,"atom":{...}},...]}
nlohmann::json to_json(const FunctionSpec& spec);
FunctionSpec spec_from_json(const nlohmann::json& j);

struct ParsedInstance {
  Instance instance;
  std::optional<TheoremId> theorem;
};

nlohmann::json to_json(const Instance& inst);
ParsedInstance instance_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BoundReport& rep);
// One name,value row per entry; manifest rows lead when given.
std::string report_to_csv(const BoundReport& rep,
                          const nlohmann::json& manifest = {});

nlohmann::json to_json(const CertReport& rep);

oracle::FuzzConfig fuzz_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const oracle::FuzzConfig& config);
nlohmann::json to_json(const oracle::Counterexample& cex);
nlohmann::json to_json(const oracle::FuzzSummary& summary);

} // namespace jbound
