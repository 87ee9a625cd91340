#pragma once
// Verification report: the shared result container for verify and
// inequalities checks, serialized as versioned JSON and flat CSV.
//
// Serialization is deterministic: ordered JSON object keys, entries in
// insertion order, shortest round-trip float formatting. Two runs with the
// same configuration and seed produce byte-identical files.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctlab/core.hpp"

namespace ctlab {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "contraction-lab.report.v1";

enum class CheckStatus { passed, failed, not_applicable, precondition_failed, inconclusive };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::passed: return "passed";
    case CheckStatus::failed: return "failed";
    case CheckStatus::not_applicable: return "not_applicable";
    case CheckStatus::precondition_failed: return "precondition_failed";
    case CheckStatus::inconclusive: return "inconclusive";
  }
  return "unknown";
}

// direction semantics for pass evaluation:
//   upper:        computed <= bound * (1 + tolerance)   (bound > 0)
//   lower:        computed >= bound * (1 - tolerance)   (bound > 0)
//   upper-abs:    computed <= bound + tolerance
//   lower-abs:    computed >= bound - tolerance
//   equality-abs: |computed - bound| <= tolerance
struct CheckEntry {
  std::string name;
  std::string theorem;  // traceability label, mapped to theorem statements in the docs
  double computed_value = 0.0;
  double bound_value = 0.0;
  std::string direction = "upper";
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::failed;
  std::string inputs_digest;
  std::uint64_t seed = 0;
  std::string note;

  bool passed() const { return status == CheckStatus::passed; }
  bool failed() const { return status == CheckStatus::failed; }
};

inline bool direction_holds(const std::string& direction, double computed, double bound,
                            double tol) {
  if (direction == "upper") return computed <= bound * (1.0 + tol);
  if (direction == "lower") return computed >= bound * (1.0 - tol);
  if (direction == "upper-abs") return computed <= bound + tol;
  if (direction == "lower-abs") return computed >= bound - tol;
  if (direction == "equality-abs") return std::fabs(computed - bound) <= tol;
  throw std::invalid_argument("direction_holds: unknown direction " + direction);
}

inline CheckEntry make_entry(std::string name, std::string theorem, double computed, double bound,
                             std::string direction, double tol, std::string digest = "",
                             std::uint64_t seed = 0, std::string note = "") {
  CheckEntry e;
  e.name = std::move(name);
  e.theorem = std::move(theorem);
  e.computed_value = computed;
  e.bound_value = bound;
  e.direction = std::move(direction);
  e.tolerance = tol;
  e.status = direction_holds(e.direction, computed, bound, tol) ? CheckStatus::passed
                                                                : CheckStatus::failed;
  e.inputs_digest = std::move(digest);
  e.seed = seed;
  e.note = std::move(note);
  return e;
}

// digest of the canonical dump of an inputs description
inline std::string inputs_digest(const ordered_json& inputs) {
  return hex64(fnv1a64(inputs.dump()));
}

struct VerificationReport {
  std::string command;
  std::uint64_t seed = 0;
  ordered_json config = ordered_json::object();
  ordered_json metadata = ordered_json::object();
  std::vector<CheckEntry> entries;

  bool any_failed() const {
    for (const auto& e : entries)
      if (e.failed()) return true;
    return false;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["schema"] = kReportSchema;
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config;
    j["metadata"] = metadata;
    auto arr = ordered_json::array();
    for (const auto& e : entries) {
      ordered_json je;
      je["name"] = e.name;
      je["theorem"] = e.theorem;
      je["computed_value"] = e.computed_value;
      je["bound_value"] = e.bound_value;
      je["direction"] = e.direction;
      je["tolerance"] = e.tolerance;
      je["status"] = to_string(e.status);
      je["pass"] = e.passed();
      je["inputs_digest"] = e.inputs_digest;
      je["seed"] = e.seed;
      je["note"] = e.note;
      arr.push_back(je);
    }
    j["entries"] = arr;
    return j;
  }

  std::string to_json_text() const { return to_json().dump(2) + "\n"; }

  std::string to_csv() const {
    std::ostringstream os;
    os << "name,theorem,computed_value,bound_value,direction,tolerance,status,inputs_digest,seed\n";
    os.precision(17);
    for (const auto& e : entries)
      os << e.name << ',' << e.theorem << ',' << e.computed_value << ',' << e.bound_value << ','
         << e.direction << ',' << e.tolerance << ',' << to_string(e.status) << ','
         << e.inputs_digest << ',' << e.seed << '\n';
    return os.str();
  }
};

}  // namespace ctlab
