#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weaksim/interferometer.hpp"
#include "weaksim/weakmeas.hpp"

namespace weaksim {

// Declarative scenario runner. Scenario files are JSON documents; complex
// numbers are written as [re, im] pairs, operators as row-major matrices of
// such pairs. See the bundled scenarios/ directory for the schema in use.

enum class ScenarioKind { kWeakValue, kDerail, kAdditivity, kMzi, kSweep };
enum class OutputFormat { kCsv, kJson };

/// Parse/validation failure with a machine-readable code and the offending
/// field's path. Codes: E_SYNTAX, E_UNKNOWN_KIND, E_MISSING_FIELD,
/// E_UNKNOWN_FIELD, E_TYPE, E_VALUE, E_DIMENSION, E_UNKNOWN_LABEL.
struct ParseError : std::runtime_error {
  ParseError(std::string code_in, std::string field_in, const std::string& msg)
      : std::runtime_error("[" + code_in + "] " + field_in + ": " + msg),
        code(std::move(code_in)),
        field(std::move(field_in)) {}

  std::string code;
  std::string field;
};

enum class SweepQuantity { kPolynomial, kPointerShift };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kDerail;
  OutputFormat format = OutputFormat::kCsv;

  std::optional<Op> observable;
  std::optional<Op> observable2;
  std::optional<Ket> in_state;
  std::optional<Ket> fin_state;
  std::optional<MeterModel> meter;
  std::optional<double> g;
  std::vector<double> gs;
  double derail_tol = tol::kDerailment;

  std::optional<SweepQuantity> sweep_quantity;
  std::vector<double> poly_coeffs;  // f(g) = sum_k c_k g^k
  bool sweep_divide = true;

  std::optional<PathNetwork> network;
  std::string report_arm;  // mzi sweep arm; defaults to the dark_port role
};

ScenarioConfig parse_scenario(const std::string& text);

/// Canonical JSON form of a parsed config; parse(serialize(parse(x))) is
/// semantics-preserving.
std::string serialize_scenario(const ScenarioConfig& config);

/// Deterministic report: a JSON tree plus a flat CSV projection of the same
/// data. Identical inputs produce byte-identical reports.
struct RunReport {
  nlohmann::ordered_json tree;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

RunReport run_scenario(const ScenarioConfig& config);

/// CSV: '.' decimal, 17 significant digits, header row, LF endings, complex
/// values split into _re/_im columns. JSON: the report tree, 2-space indent.
std::string emit(const RunReport& report, OutputFormat format);

/// 17-significant-digit, locale-independent rendering used by emit.
std::string format_double(double value);

const char* scenario_kind_name(ScenarioKind kind);

}  // namespace weaksim
