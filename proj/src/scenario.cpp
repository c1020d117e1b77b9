#include "weaksim/scenario.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "weaksim/errors.hpp"

namespace weaksim {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const char* code, const std::string& field,
                       const std::string& msg) {
  throw ParseError(code, field, msg);
}

const json& require_field(const json& obj, const char* name,
                          const std::string& path) {
  const auto it = obj.find(name);
  if (it == obj.end()) {
    fail("E_MISSING_FIELD", path + "." + name, "required field is missing");
  }
  return *it;
}

void check_known_fields(const json& obj, const std::set<std::string>& allowed,
                        const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      fail("E_UNKNOWN_FIELD", path + "." + key, "unknown field");
    }
  }
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) fail("E_TYPE", path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail("E_VALUE", path, "value must be finite");
  return d;
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail("E_TYPE", path, "expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail("E_TYPE", path, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail("E_TYPE", path, "expected a string");
  return v.get<std::string>();
}

Cplx parse_cplx(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) {
    fail("E_TYPE", path, "expected a [re, im] pair");
  }
  return {as_double(v[0], path + "[0]"), as_double(v[1], path + "[1]")};
}

Ket parse_ket(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) {
    fail("E_TYPE", path, "expected a non-empty array of [re, im] pairs");
  }
  std::vector<Cplx> amps;
  amps.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    amps.push_back(parse_cplx(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return Ket(std::move(amps));
}

Op parse_op(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) {
    fail("E_TYPE", path, "expected a non-empty matrix");
  }
  const size_t dim = v.size();
  std::vector<Cplx> entries;
  entries.reserve(dim * dim);
  for (size_t r = 0; r < dim; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != dim) {
      fail("E_DIMENSION", row_path, "matrix must be square");
    }
    for (size_t c = 0; c < dim; ++c) {
      entries.push_back(
          parse_cplx(v[r][c], row_path + "[" + std::to_string(c) + "]"));
    }
  }
  return Op(static_cast<int>(dim), std::move(entries));
}

MeterModel parse_meter(const json& v, const std::string& path) {
  if (!v.is_object()) fail("E_TYPE", path, "expected a meter object");
  const std::string kind =
      v.contains("kind") ? as_string(v["kind"], path + ".kind") : "analytic";
  const double sigma =
      v.contains("sigma") ? as_double(v["sigma"], path + ".sigma") : 1.0;
  try {
    if (kind == "analytic") {
      check_known_fields(v, {"kind", "sigma"}, path);
      return MeterModel::analytic(sigma);
    }
    if (kind == "grid") {
      check_known_fields(v, {"kind", "sigma", "points", "dx"}, path);
      const int points = v.contains("points")
                             ? as_int(v["points"], path + ".points")
                             : defaults::kGridPoints;
      const double dx =
          v.contains("dx") ? as_double(v["dx"], path + ".dx") : 0.0;
      return MeterModel::grid(sigma, points, dx);
    }
  } catch (const ContractViolation& e) {
    fail("E_VALUE", path, e.what());
  }
  fail("E_VALUE", path + ".kind", "meter kind must be 'analytic' or 'grid'");
}

std::vector<double> parse_gs(const json& v, const std::string& path) {
  if (!v.is_array()) fail("E_TYPE", path, "expected an array of couplings");
  std::vector<double> gs;
  std::set<double> seen;
  for (size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const double g = as_double(v[i], p);
    if (!(g > 0.0)) fail("E_VALUE", p, "couplings must be positive");
    if (!seen.insert(g).second) fail("E_VALUE", p, "couplings must be distinct");
    gs.push_back(g);
  }
  return gs;
}

PathNetwork parse_custom_network(const json& v, const std::string& path) {
  check_known_fields(
      v, {"paths", "source", "detector", "stages", "marks", "roles"}, path);
  const json& jpaths = require_field(v, "paths", path);
  if (!jpaths.is_array() || jpaths.empty()) {
    fail("E_TYPE", path + ".paths", "expected a non-empty array of labels");
  }
  std::vector<std::string> paths;
  for (size_t i = 0; i < jpaths.size(); ++i) {
    paths.push_back(
        as_string(jpaths[i], path + ".paths[" + std::to_string(i) + "]"));
  }
  const std::string source =
      as_string(require_field(v, "source", path), path + ".source");
  const std::string detector =
      as_string(require_field(v, "detector", path), path + ".detector");

  try {
    PathNetwork net(paths, source, detector);
    const json& stages = require_field(v, "stages", path);
    if (!stages.is_array()) {
      fail("E_TYPE", path + ".stages", "expected an array of stage objects");
    }
    for (size_t i = 0; i < stages.size(); ++i) {
      const std::string sp = path + ".stages[" + std::to_string(i) + "]";
      const json& stage = stages[i];
      if (!stage.is_object()) fail("E_TYPE", sp, "expected a stage object");
      const std::string type =
          as_string(require_field(stage, "type", sp), sp + ".type");
      try {
        if (type == "beamsplitter") {
          check_known_fields(stage, {"type", "a", "b", "t"}, sp);
          net.add(BeamSplitter{
              as_string(require_field(stage, "a", sp), sp + ".a"),
              as_string(require_field(stage, "b", sp), sp + ".b"),
              as_double(require_field(stage, "t", sp), sp + ".t")});
        } else if (type == "phase") {
          check_known_fields(stage, {"type", "path", "phi"}, sp);
          net.add(PhaseShifter{
              as_string(require_field(stage, "path", sp), sp + ".path"),
              as_double(require_field(stage, "phi", sp), sp + ".phi")});
        } else if (type == "tap") {
          check_known_fields(stage, {"type", "path", "g", "meter"}, sp);
          net.add(WeakTap{
              as_string(require_field(stage, "path", sp), sp + ".path"),
              as_double(require_field(stage, "g", sp), sp + ".g"),
              stage.contains("meter")
                  ? parse_meter(stage["meter"], sp + ".meter")
                  : MeterModel::analytic()});
        } else if (type == "relabel") {
          check_known_fields(stage, {"type", "from", "to"}, sp);
          net.add(Relabel{
              as_string(require_field(stage, "from", sp), sp + ".from"),
              as_string(require_field(stage, "to", sp), sp + ".to")});
        } else {
          fail("E_VALUE", sp + ".type", "unknown stage type '" + type + "'");
        }
      } catch (const ContractViolation& e) {
        const std::string what = e.what();
        fail(what.find("undeclared") != std::string::npos ? "E_UNKNOWN_LABEL"
                                                          : "E_VALUE",
             sp, what);
      }
    }
    if (v.contains("marks")) {
      const json& marks = v["marks"];
      if (!marks.is_object()) fail("E_TYPE", path + ".marks", "expected object");
      for (const auto& [name, stage] : marks.items()) {
        net.set_mark(name, as_int(stage, path + ".marks." + name));
      }
    }
    if (v.contains("roles")) {
      const json& roles = v["roles"];
      if (!roles.is_object()) fail("E_TYPE", path + ".roles", "expected object");
      for (const auto& [role, label] : roles.items()) {
        try {
          net.set_role(role, as_string(label, path + ".roles." + role));
        } catch (const ContractViolation& e) {
          fail("E_UNKNOWN_LABEL", path + ".roles." + role, e.what());
        }
      }
    }
    return net;
  } catch (const ContractViolation& e) {
    const std::string what = e.what();
    fail(what.find("undeclared") != std::string::npos ? "E_UNKNOWN_LABEL"
                                                      : "E_VALUE",
         path, what);
  }
}

PathNetwork parse_network(const json& v, const std::string& path) {
  if (!v.is_object()) fail("E_TYPE", path, "expected a network object");
  if (v.contains("builtin")) {
    check_known_fields(
        v, {"builtin", "outer_t", "inner_t", "inner_phase", "tap"}, path);
    const std::string which = as_string(v["builtin"], path + ".builtin");
    if (which != "nested_mzi") {
      fail("E_VALUE", path + ".builtin", "unknown builtin '" + which + "'");
    }
    const double outer_t = v.contains("outer_t")
                               ? as_double(v["outer_t"], path + ".outer_t")
                               : defaults::kOuterT;
    const double inner_t = v.contains("inner_t")
                               ? as_double(v["inner_t"], path + ".inner_t")
                               : defaults::kInnerT;
    const double inner_phase =
        v.contains("inner_phase")
            ? as_double(v["inner_phase"], path + ".inner_phase")
            : defaults::kInnerPhase;
    std::optional<TapSpec> tap;
    if (v.contains("tap")) {
      const json& jt = v["tap"];
      const std::string tp = path + ".tap";
      if (!jt.is_object()) fail("E_TYPE", tp, "expected a tap object");
      check_known_fields(jt, {"arm", "g", "meter"}, tp);
      tap = TapSpec{
          as_string(require_field(jt, "arm", tp), tp + ".arm"),
          as_double(require_field(jt, "g", tp), tp + ".g"),
          jt.contains("meter") ? parse_meter(jt["meter"], tp + ".meter")
                               : MeterModel::analytic()};
    }
    try {
      return build_nested_mzi(outer_t, inner_t, inner_phase, tap);
    } catch (const ContractViolation& e) {
      const std::string what = e.what();
      fail(what.find("undeclared") != std::string::npos ? "E_UNKNOWN_LABEL"
                                                        : "E_VALUE",
           path, what);
    }
  }
  return parse_custom_network(v, path);
}

ScenarioKind parse_kind(const json& v, const std::string& path) {
  const std::string kind = as_string(v, path);
  if (kind == "weakvalue") return ScenarioKind::kWeakValue;
  if (kind == "derail") return ScenarioKind::kDerail;
  if (kind == "additivity") return ScenarioKind::kAdditivity;
  if (kind == "mzi") return ScenarioKind::kMzi;
  if (kind == "sweep") return ScenarioKind::kSweep;
  fail("E_UNKNOWN_KIND", path, "unknown scenario kind '" + kind + "'");
}

void require_dims_match(const ScenarioConfig& c, const std::string& path) {
  if (c.observable && c.in_state &&
      c.observable->dim() != c.in_state->dim()) {
    fail("E_DIMENSION", path + ".in_state",
         "state dimension does not match the observable");
  }
  if (c.observable && c.fin_state &&
      c.observable->dim() != c.fin_state->dim()) {
    fail("E_DIMENSION", path + ".fin_state",
         "state dimension does not match the observable");
  }
  if (c.observable && c.observable2 &&
      c.observable->dim() != c.observable2->dim()) {
    fail("E_DIMENSION", path + ".observable2",
         "operator dimensions do not match");
  }
}

}  // namespace

const char* scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kWeakValue: return "weakvalue";
    case ScenarioKind::kDerail: return "derail";
    case ScenarioKind::kAdditivity: return "additivity";
    case ScenarioKind::kMzi: return "mzi";
    case ScenarioKind::kSweep: return "sweep";
  }
  return "?";
}

ScenarioConfig parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("E_SYNTAX", "$", e.what());
  }
  if (!doc.is_object()) {
    fail("E_TYPE", "$", "scenario must be a JSON object");
  }

  ScenarioConfig config;
  config.kind = parse_kind(require_field(doc, "kind", "$"), "$.kind");

  if (doc.contains("format")) {
    const std::string f = as_string(doc["format"], "$.format");
    if (f == "csv") {
      config.format = OutputFormat::kCsv;
    } else if (f == "json") {
      config.format = OutputFormat::kJson;
    } else {
      fail("E_VALUE", "$.format", "format must be 'csv' or 'json'");
    }
  }

  try {
    switch (config.kind) {
      case ScenarioKind::kWeakValue: {
        check_known_fields(doc,
                           {"kind", "format", "observable", "in_state",
                            "fin_state", "meter", "g"},
                           "$");
        config.observable =
            parse_op(require_field(doc, "observable", "$"), "$.observable");
        config.in_state =
            parse_ket(require_field(doc, "in_state", "$"), "$.in_state");
        config.fin_state =
            parse_ket(require_field(doc, "fin_state", "$"), "$.fin_state");
        if (doc.contains("meter")) {
          config.meter = parse_meter(doc["meter"], "$.meter");
        }
        if (doc.contains("g")) {
          const double g = as_double(doc["g"], "$.g");
          if (!(g > 0.0)) fail("E_VALUE", "$.g", "g must be positive");
          config.g = g;
          if (!config.meter) config.meter = MeterModel::analytic();
        }
        break;
      }
      case ScenarioKind::kDerail: {
        check_known_fields(
            doc, {"kind", "format", "observable", "in_state", "tolerance"},
            "$");
        config.observable =
            parse_op(require_field(doc, "observable", "$"), "$.observable");
        config.in_state =
            parse_ket(require_field(doc, "in_state", "$"), "$.in_state");
        if (doc.contains("tolerance")) {
          config.derail_tol = as_double(doc["tolerance"], "$.tolerance");
          if (!(config.derail_tol > 0.0)) {
            fail("E_VALUE", "$.tolerance", "tolerance must be positive");
          }
        }
        if (config.observable->hermitian_flag() != TriFlag::kTrue) {
          fail("E_VALUE", "$.observable", "observable must be hermitian");
        }
        break;
      }
      case ScenarioKind::kAdditivity: {
        check_known_fields(doc,
                           {"kind", "format", "observable", "observable2",
                            "in_state", "fin_state"},
                           "$");
        config.observable =
            parse_op(require_field(doc, "observable", "$"), "$.observable");
        config.observable2 =
            parse_op(require_field(doc, "observable2", "$"), "$.observable2");
        config.in_state =
            parse_ket(require_field(doc, "in_state", "$"), "$.in_state");
        config.fin_state =
            parse_ket(require_field(doc, "fin_state", "$"), "$.fin_state");
        if (config.observable->hermitian_flag() != TriFlag::kTrue) {
          fail("E_VALUE", "$.observable", "observable must be hermitian");
        }
        if (config.observable2->hermitian_flag() != TriFlag::kTrue) {
          fail("E_VALUE", "$.observable2", "observable must be hermitian");
        }
        break;
      }
      case ScenarioKind::kSweep: {
        check_known_fields(doc,
                           {"kind", "format", "sweep", "gs", "observable",
                            "in_state", "fin_state", "meter"},
                           "$");
        const json& sw = require_field(doc, "sweep", "$");
        if (!sw.is_object()) fail("E_TYPE", "$.sweep", "expected an object");
        check_known_fields(sw, {"quantity", "coefficients", "divide"},
                           "$.sweep");
        const std::string quantity = as_string(
            require_field(sw, "quantity", "$.sweep"), "$.sweep.quantity");
        if (sw.contains("divide")) {
          config.sweep_divide = as_bool(sw["divide"], "$.sweep.divide");
        }
        config.gs = parse_gs(require_field(doc, "gs", "$"), "$.gs");
        if (config.gs.size() < 2) {
          fail("E_VALUE", "$.gs", "a sweep needs at least two couplings");
        }
        if (quantity == "polynomial") {
          config.sweep_quantity = SweepQuantity::kPolynomial;
          const json& coeffs =
              require_field(sw, "coefficients", "$.sweep");
          if (!coeffs.is_array() || coeffs.empty()) {
            fail("E_TYPE", "$.sweep.coefficients", "expected an array");
          }
          for (size_t i = 0; i < coeffs.size(); ++i) {
            config.poly_coeffs.push_back(as_double(
                coeffs[i],
                "$.sweep.coefficients[" + std::to_string(i) + "]"));
          }
        } else if (quantity == "pointer_shift") {
          config.sweep_quantity = SweepQuantity::kPointerShift;
          config.observable =
              parse_op(require_field(doc, "observable", "$"), "$.observable");
          config.in_state =
              parse_ket(require_field(doc, "in_state", "$"), "$.in_state");
          config.fin_state =
              parse_ket(require_field(doc, "fin_state", "$"), "$.fin_state");
          config.meter = doc.contains("meter")
                             ? parse_meter(doc["meter"], "$.meter")
                             : MeterModel::analytic();
          if (config.observable->hermitian_flag() != TriFlag::kTrue) {
            fail("E_VALUE", "$.observable", "observable must be hermitian");
          }
        } else {
          fail("E_VALUE", "$.sweep.quantity",
               "quantity must be 'polynomial' or 'pointer_shift'");
        }
        break;
      }
      case ScenarioKind::kMzi: {
        check_known_fields(
            doc, {"kind", "format", "network", "gs", "report_arm"}, "$");
        config.network =
            parse_network(require_field(doc, "network", "$"), "$.network");
        if (doc.contains("gs")) {
          config.gs = parse_gs(doc["gs"], "$.gs");
          if (config.gs.size() == 1) {
            fail("E_VALUE", "$.gs", "a sweep needs at least two couplings");
          }
        }
        if (doc.contains("report_arm")) {
          config.report_arm = as_string(doc["report_arm"], "$.report_arm");
          try {
            config.network->path_index(config.report_arm);
          } catch (const ContractViolation& e) {
            fail("E_UNKNOWN_LABEL", "$.report_arm", e.what());
          }
        } else if (const auto dark = config.network->role("dark_port")) {
          config.report_arm = *dark;
        }
        if (!config.gs.empty()) {
          if (config.network->tap_stages().size() != 1) {
            fail("E_VALUE", "$.gs",
                 "an mzi sweep needs exactly one tap in the network");
          }
          if (config.report_arm.empty()) {
            fail("E_MISSING_FIELD", "$.report_arm",
                 "no report arm given and the network has no dark_port role");
          }
        }
        break;
      }
    }
  } catch (const ContractViolation& e) {
    // Anything the core types reject (non-finite entries, bad dimensions)
    // is a scenario validation failure, not an internal error.
    fail("E_VALUE", "$", e.what());
  }

  require_dims_match(config, "$");
  return config;
}

// -- Serialization --------------------------------------------------------------

namespace {

json cplx_to_json(const Cplx& c) { return json::array({c.real(), c.imag()}); }

json ket_to_json(const Ket& k) {
  json arr = json::array();
  for (int i = 0; i < k.dim(); ++i) arr.push_back(cplx_to_json(k[i]));
  return arr;
}

json op_to_json(const Op& m) {
  json rows = json::array();
  for (int r = 0; r < m.dim(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.dim(); ++c) row.push_back(cplx_to_json(m.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json meter_to_json(const MeterModel& m) {
  json out;
  if (m.kind() == MeterModel::Kind::kAnalyticGaussian) {
    out["kind"] = "analytic";
    out["sigma"] = m.sigma();
  } else {
    out["kind"] = "grid";
    out["sigma"] = m.sigma();
    out["points"] = m.points();
    out["dx"] = m.dx();
  }
  return out;
}

json network_to_json(const PathNetwork& net) {
  json out;
  out["paths"] = net.paths();
  out["source"] = net.source();
  out["detector"] = net.detector();
  json stages = json::array();
  for (const Element& e : net.stages()) {
    json s;
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
      s["type"] = "beamsplitter";
      s["a"] = bs->path_a;
      s["b"] = bs->path_b;
      s["t"] = bs->transmission;
    } else if (const auto* ps = std::get_if<PhaseShifter>(&e)) {
      s["type"] = "phase";
      s["path"] = ps->path;
      s["phi"] = ps->phase;
    } else if (const auto* tap = std::get_if<WeakTap>(&e)) {
      s["type"] = "tap";
      s["path"] = tap->path;
      s["g"] = tap->g;
      s["meter"] = meter_to_json(tap->meter);
    } else {
      const auto& rl = std::get<Relabel>(e);
      s["type"] = "relabel";
      s["from"] = rl.from;
      s["to"] = rl.to;
    }
    stages.push_back(std::move(s));
  }
  out["stages"] = std::move(stages);
  if (!net.marks().empty()) {
    json marks;
    for (const auto& [name, stage] : net.marks()) marks[name] = stage;
    out["marks"] = std::move(marks);
  }
  if (!net.roles().empty()) {
    json roles;
    for (const auto& [role, label] : net.roles()) roles[role] = label;
    out["roles"] = std::move(roles);
  }
  return out;
}

}  // namespace

std::string serialize_scenario(const ScenarioConfig& config) {
  json doc;
  doc["kind"] = scenario_kind_name(config.kind);
  doc["format"] = config.format == OutputFormat::kCsv ? "csv" : "json";
  switch (config.kind) {
    case ScenarioKind::kWeakValue:
      doc["observable"] = op_to_json(*config.observable);
      doc["in_state"] = ket_to_json(*config.in_state);
      doc["fin_state"] = ket_to_json(*config.fin_state);
      if (config.meter) doc["meter"] = meter_to_json(*config.meter);
      if (config.g) doc["g"] = *config.g;
      break;
    case ScenarioKind::kDerail:
      doc["observable"] = op_to_json(*config.observable);
      doc["in_state"] = ket_to_json(*config.in_state);
      doc["tolerance"] = config.derail_tol;
      break;
    case ScenarioKind::kAdditivity:
      doc["observable"] = op_to_json(*config.observable);
      doc["observable2"] = op_to_json(*config.observable2);
      doc["in_state"] = ket_to_json(*config.in_state);
      doc["fin_state"] = ket_to_json(*config.fin_state);
      break;
    case ScenarioKind::kSweep: {
      json sw;
      if (config.sweep_quantity == SweepQuantity::kPolynomial) {
        sw["quantity"] = "polynomial";
        sw["coefficients"] = config.poly_coeffs;
      } else {
        sw["quantity"] = "pointer_shift";
      }
      sw["divide"] = config.sweep_divide;
      doc["sweep"] = std::move(sw);
      doc["gs"] = config.gs;
      if (config.sweep_quantity == SweepQuantity::kPointerShift) {
        doc["observable"] = op_to_json(*config.observable);
        doc["in_state"] = ket_to_json(*config.in_state);
        doc["fin_state"] = ket_to_json(*config.fin_state);
        doc["meter"] = meter_to_json(*config.meter);
      }
      break;
    }
    case ScenarioKind::kMzi:
      doc["network"] = network_to_json(*config.network);
      if (!config.gs.empty()) doc["gs"] = config.gs;
      if (!config.report_arm.empty()) doc["report_arm"] = config.report_arm;
      break;
  }
  return doc.dump(2) + "\n";
}

// -- Running ---------------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

json cplx_tree(const Cplx& c) {
  json out;
  out["re"] = c.real();
  out["im"] = c.imag();
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

json derail_tree(const DerailmentReport& rep) {
  json out;
  out["expectation"] = cplx_tree(rep.expectation);
  out["s_in_norm"] = rep.s_in_norm;
  out["derailed"] = rep.derailed;
  out["tolerance"] = rep.tol_used;
  return out;
}

RunReport run_derail(const ScenarioConfig& config) {
  const DerailmentReport rep = derailment_check(
      *config.observable, config.in_state->normalized(), config.derail_tol);
  RunReport report;
  report.tree["kind"] = "derail";
  report.tree.update(derail_tree(rep));
  report.csv_header = {"expectation_re", "expectation_im", "s_in_norm",
                       "derailed"};
  report.csv_rows.push_back(
      {format_double(rep.expectation.real()), format_double(rep.expectation.imag()),
       format_double(rep.s_in_norm), fmt_bool(rep.derailed)});
  return report;
}

RunReport run_weakvalue(const ScenarioConfig& config) {
  const WeakValueResult analytic = analytic_weak_value(
      *config.observable, *config.in_state, *config.fin_state);
  RunReport report;
  report.tree["kind"] = "weakvalue";
  report.tree["analytic"] = cplx_tree(analytic.value);
  report.csv_header = {"method", "value_re", "value_im", "g_used", "est_error"};
  report.csv_rows.push_back({"analytic", format_double(analytic.value.real()),
                             format_double(analytic.value.imag()),
                             format_double(0.0), format_double(0.0)});
  if (config.g) {
    const WeakValueResult pointer =
        extract_weak_value(*config.observable, *config.in_state,
                           *config.fin_state, *config.meter, *config.g);
    json jp = cplx_tree(pointer.value);
    jp["g"] = pointer.g_used;
    jp["est_error"] = pointer.est_error;
    report.tree["pointer"] = std::move(jp);
    report.csv_rows.push_back({"pointer", format_double(pointer.value.real()),
                               format_double(pointer.value.imag()),
                               format_double(pointer.g_used),
                               format_double(pointer.est_error)});
  }
  return report;
}

RunReport run_additivity(const ScenarioConfig& config) {
  const AdditivityReport rep =
      additivity_report(*config.observable, *config.observable2,
                        *config.in_state, *config.fin_state);
  RunReport report;
  report.tree["kind"] = "additivity";
  report.tree["additivity_residual"] = rep.additivity_residual;

  report.csv_header = {"operator",       "wv_re",          "wv_im",
                       "expectation_re", "expectation_im", "derailed"};
  const auto add_row = [&](const char* label, const WeakValueResult& wv,
                           const DerailmentReport& d) {
    json entry;
    entry["weak_value"] = cplx_tree(wv.value);
    entry.update(derail_tree(d));
    report.tree[label] = std::move(entry);
    report.csv_rows.push_back(
        {label, format_double(wv.value.real()), format_double(wv.value.imag()),
         format_double(d.expectation.real()), format_double(d.expectation.imag()),
         fmt_bool(d.derailed)});
  };
  add_row("S1", rep.wv1, rep.derail1);
  add_row("S2", rep.wv2, rep.derail2);
  add_row("S1+S2", rep.wv_sum, rep.derail_sum);
  return report;
}

json sweep_tree(const SweepResult& sweep) {
  json out;
  json rows = json::array();
  for (const SweepRow& row : sweep.rows) {
    json r;
    r["g"] = row.g;
    r["raw"] = cplx_tree(row.raw);
    r["divided"] = cplx_tree(row.divided);
    rows.push_back(std::move(r));
  }
  out["rows"] = std::move(rows);
  out["extrapolated_limit"] = cplx_tree(sweep.extrapolated_limit);
  if (sweep.endpoint) {
    out["endpoint"] = cplx_tree(*sweep.endpoint);
  } else {
    out["endpoint"] = "UNDEFINED";
  }
  out["discontinuity_flag"] = sweep.discontinuity_flag;
  out["divide_by_g"] = sweep.divide_by_g;
  return out;
}

RunReport run_sweep(const ScenarioConfig& config) {
  SweepProbe probe;
  if (config.sweep_quantity == SweepQuantity::kPolynomial) {
    const std::vector<double> coeffs = config.poly_coeffs;
    probe.raw_at = [coeffs](double g) -> Cplx {
      double acc = 0.0;
      for (size_t k = coeffs.size(); k-- > 0;) acc = acc * g + coeffs[k];
      return {acc, 0.0};
    };
    probe.raw_at_zero = [coeffs]() -> Cplx { return {coeffs[0], 0.0}; };
    probe.divide_by_g = config.sweep_divide;
  } else {
    probe = pointer_shift_probe(*config.observable, *config.in_state,
                                *config.fin_state, *config.meter,
                                config.sweep_divide);
  }
  const SweepResult sweep = g_sweep(probe, config.gs);

  RunReport report;
  report.tree["kind"] = "sweep";
  report.tree.update(sweep_tree(sweep));

  report.csv_header = {"g",
                       "raw_re",
                       "raw_im",
                       "divided_re",
                       "divided_im",
                       "extrapolated_re",
                       "extrapolated_im",
                       "endpoint_re",
                       "endpoint_im",
                       "discontinuity_flag"};
  for (const SweepRow& row : sweep.rows) {
    report.csv_rows.push_back(
        {format_double(row.g), format_double(row.raw.real()),
         format_double(row.raw.imag()), format_double(row.divided.real()),
         format_double(row.divided.imag()),
         format_double(sweep.extrapolated_limit.real()),
         format_double(sweep.extrapolated_limit.imag()),
         sweep.endpoint ? format_double(sweep.endpoint->real()) : "UNDEFINED",
         sweep.endpoint ? format_double(sweep.endpoint->imag()) : "UNDEFINED",
         fmt_bool(sweep.discontinuity_flag)});
  }
  return report;
}

json which_way_tree(const WhichWayReport& rep) {
  json out;
  json arms = json::array();
  for (const WhichWayEntry& arm : rep.arms) {
    json a;
    a["arm"] = arm.label;
    a["weak_value"] = cplx_tree(arm.weak_value);
    a["present"] = arm.present;
    arms.push_back(std::move(a));
  }
  out["arms"] = std::move(arms);
  out["success_probability"] = rep.success_probability;
  out["presence_tolerance"] = rep.presence_tol;
  if (rep.tap_derailment) {
    out["tap_derailment"] = derail_tree(*rep.tap_derailment);
  }
  if (rep.dark_amp_over_g) {
    out["dark_amp_over_g"] = *rep.dark_amp_over_g;
  }
  return out;
}

RunReport run_mzi(const ScenarioConfig& config) {
  const PathNetwork& net = *config.network;
  RunReport report;
  report.tree["kind"] = "mzi";

  const WhichWayReport ww = which_way_report(net);
  report.tree["which_way"] = which_way_tree(ww);

  if (config.gs.empty()) {
    report.csv_header = {"arm", "wv_re", "wv_im", "present"};
    for (const WhichWayEntry& arm : ww.arms) {
      report.csv_rows.push_back(
          {arm.label, format_double(arm.weak_value.real()),
           format_double(arm.weak_value.imag()), fmt_bool(arm.present)});
    }
    return report;
  }

  const std::string& arm = config.report_arm;
  const auto& tap = std::get<WeakTap>(
      net.stages()[static_cast<size_t>(net.tap_stages().front())]);

  SweepProbe probe;
  probe.divide_by_g = true;
  probe.raw_at = [&net, &arm](double g) -> Cplx {
    return {std::abs(arm_amplitude(net, arm, g)), 0.0};
  };
  const SweepResult sweep = g_sweep(probe, config.gs);
  report.tree["sweep"] = sweep_tree(sweep);
  report.tree["report_arm"] = arm;
  report.tree["tap_arm"] = tap.path;
  const Cplx analytic_wv = projector_weak_value(net, tap.path).value;
  report.tree["analytic_tap_weak_value"] = cplx_tree(analytic_wv);

  report.csv_header = {"g",
                       "abs_" + arm,
                       "abs_" + arm + "_over_g",
                       "Pi_" + tap.path + "_w_re",
                       "Pi_" + tap.path + "_w_im",
                       "discontinuity_flag"};
  json extracted = json::array();
  for (const SweepRow& row : sweep.rows) {
    const WeakValueResult wv =
        extract_tap_weak_value(net.with_tap_strength(row.g));
    json e;
    e["g"] = row.g;
    e["value"] = cplx_tree(wv.value);
    e["est_error"] = wv.est_error;
    extracted.push_back(std::move(e));
    report.csv_rows.push_back(
        {format_double(row.g), format_double(row.raw.real()),
         format_double(row.divided.real()), format_double(wv.value.real()),
         format_double(wv.value.imag()), fmt_bool(sweep.discontinuity_flag)});
  }
  report.tree["pointer_extracted"] = std::move(extracted);
  return report;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config) {
  switch (config.kind) {
    case ScenarioKind::kDerail: return run_derail(config);
    case ScenarioKind::kWeakValue: return run_weakvalue(config);
    case ScenarioKind::kAdditivity: return run_additivity(config);
    case ScenarioKind::kSweep: return run_sweep(config);
    case ScenarioKind::kMzi: return run_mzi(config);
  }
  throw std::logic_error("run_scenario: unreachable");
}

std::string emit(const RunReport& report, OutputFormat format) {
  if (format == OutputFormat::kJson) {
    return report.tree.dump(2) + "\n";
  }
  std::string out;
  for (size_t i = 0; i < report.csv_header.size(); ++i) {
    if (i > 0) out += ',';
    out += csv_escape(report.csv_header[i]);
  }
  out += '\n';
  for (const auto& row : report.csv_rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_escape(row[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace weaksim
