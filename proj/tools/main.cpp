#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "weaksim/errors.hpp"
#include "weaksim/scenario.hpp"

// Exit codes: 0 success, 2 parse/validation failure, 3 domain error
// (e.g. orthogonal postselection), 4 internal invariant breach.

namespace {

constexpr int kOk = 0;
constexpr int kParseFailure = 2;
constexpr int kDomainFailure = 3;
constexpr int kInternalFailure = 4;

struct CommandOptions {
  std::string scenario_path;
  std::string format;  // "", "csv", "json"
  std::string out_path;
  std::string tolerance_profile = "default";
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run(const std::string& subcommand, const CommandOptions& opts) {
  const auto text = read_file(opts.scenario_path);
  if (!text) {
    std::cerr << "error: cannot read scenario file '" << opts.scenario_path
              << "'\n";
    return kParseFailure;
  }

  weaksim::ScenarioConfig config;
  try {
    config = weaksim::parse_scenario(*text);
  } catch (const weaksim::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseFailure;
  }

  if (subcommand == "validate") {
    std::cout << "OK: " << weaksim::scenario_kind_name(config.kind)
              << " scenario\n";
    return kOk;
  }
  if (subcommand != weaksim::scenario_kind_name(config.kind)) {
    std::cerr << "error: scenario kind '"
              << weaksim::scenario_kind_name(config.kind)
              << "' does not match subcommand '" << subcommand << "'\n";
    return kParseFailure;
  }

  if (opts.tolerance_profile == "strict") {
    config.derail_tol *= 1e-2;
  } else if (opts.tolerance_profile == "loose") {
    config.derail_tol *= 1e2;
  } else if (opts.tolerance_profile != "default") {
    std::cerr << "error: unknown tolerance profile '" << opts.tolerance_profile
              << "'\n";
    return kParseFailure;
  }

  if (opts.format == "csv") {
    config.format = weaksim::OutputFormat::kCsv;
  } else if (opts.format == "json") {
    config.format = weaksim::OutputFormat::kJson;
  } else if (!opts.format.empty()) {
    std::cerr << "error: unknown format '" << opts.format << "'\n";
    return kParseFailure;
  }

  std::string bytes;
  try {
    bytes = weaksim::emit(weaksim::run_scenario(config), config.format);
  } catch (const weaksim::DomainError& e) {
    std::cerr << "domain error [" << weaksim::scenario_kind_name(config.kind)
              << " scenario]: " << e.what() << "\n";
    return kDomainFailure;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalFailure;
  }

  if (opts.out_path.empty()) {
    std::cout << bytes;
  } else {
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot open output file '" << opts.out_path << "'\n";
      return kInternalFailure;
    }
    out << bytes;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "weaksim: weak-value simulator and nested-MZI scenario runner"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"weakvalue", "Analytic (and optionally pointer-extracted) weak value"},
      {"derail", "Derailment diagnostic <in|S|in> = 0"},
      {"additivity", "Additivity of weak values with derailment flags"},
      {"mzi", "Interferometer which-way report or dark-port sweep"},
      {"sweep", "Divide-by-g limit analysis"},
      {"validate", "Parse and validate a scenario file"}};

  std::map<std::string, CommandOptions> opts;
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    CommandOptions& o = opts[name];
    sub->add_option("--scenario", o.scenario_path, "Scenario file")->required();
    sub->add_option("--format", o.format, "Output format: csv or json");
    sub->add_option("--out", o.out_path, "Write the report to this file");
    sub->add_option("--tolerance-profile", o.tolerance_profile,
                    "default, strict, or loose");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParseFailure;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return run(sub, opts[sub]);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalFailure;
  }
}
