#pragma once

// The `neckid` command line: `neckid analyze FILE [options]`.
//
// Exit status: 0 boundary found, 1 none found, 2 usage / input / parse /
// validation error, 3 oracle disagreement under --oracle-check.

#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neck/block_graph.hpp"
#include "neck/boundary.hpp"
#include "neck/oracle.hpp"
#include "neck/parser.hpp"
#include "neck/report.hpp"

namespace neck::cli {

enum class Format { text, json };

enum ExitCode : int { kFound = 0, kNoneFound = 1, kInputError = 2, kOracleDisagreement = 3 };

struct CliConfig {
  std::string input_path;
  std::string entry_name = "main";
  std::optional<std::vector<std::string>> taint_params;  // nullopt: all entry parameters
  std::vector<std::string> taint_intrinsics{"readcfg"};
  Format output_format = Format::text;
  bool annotate = false;
  bool oracle_check = false;
  std::optional<std::string> dot_dump;
};

struct Hooks {
  std::function<BoundaryReport(const ir::Program&, const TaintSourceSpec&)> oracle =
      [](const ir::Program& p, const TaintSourceSpec& s) { return oracle_boundary(p, s); };
};

inline std::string annotated_path(const std::string& input) { return input + ".annotated.mir"; }

inline int run(const CliConfig& config, std::ostream& out, std::ostream& err, const Hooks& hooks = {}) {
  std::ifstream in(config.input_path, std::ios::binary);
  if (!in) {
    err << "error: cannot read " << config.input_path << "\n";
    return kInputError;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  ir::Program program;
  try {
    program = parse({buffer.str(), config.input_path}, {config.entry_name});
  } catch (const ParseError& e) {
    for (const auto& d : e.diagnostics()) err << d.to_string(e.origin()) << "\n";
    return kInputError;
  }

  TaintSourceSpec sources;
  sources.entry_params = config.taint_params;
  sources.intrinsic_sources = {config.taint_intrinsics.begin(), config.taint_intrinsics.end()};

  BoundaryReport report;
  double elapsed_ms = 0;
  try {
    auto start = std::chrono::steady_clock::now();
    report = identify_boundary(program, sources);
    elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  if (config.output_format == Format::json)
    out << to_json(report, elapsed_ms).dump(2) << "\n";
  else
    out << to_text(report);

  if (config.dot_dump) {
    std::ofstream dot(*config.dot_dump);
    if (!dot) {
      err << "error: cannot write " << *config.dot_dump << "\n";
      return kInputError;
    }
    for (const auto& proc : program.procedures) dot << to_dot(build_block_graph(proc));
  }

  if (config.annotate) {
    if (report.boundary) {
      std::ofstream annotated(annotated_path(config.input_path));
      if (!annotated) {
        err << "error: cannot write " << annotated_path(config.input_path) << "\n";
        return kInputError;
      }
      annotated << emit_annotated(program, report).content;
    } else {
      err << "warning: no boundary to annotate\n";
    }
  }

  if (config.oracle_check) {
    try {
      auto expected = hooks.oracle(program, sources);
      if (!same_outcome(report, expected)) {
        err << "oracle disagreement: pipeline "
            << (report.boundary ? report.boundary->to_string() : std::string(to_string(report.verdict)))
            << ", oracle " << (expected.boundary ? expected.boundary->to_string() : std::string(to_string(expected.verdict)))
            << "\n";
        return kOracleDisagreement;
      }
    } catch (const Error& e) {
      err << "warning: oracle check skipped: " << e.what() << "\n";
    }
  }

  return report.boundary ? kFound : kNoneFound;
}

// Parses argv (argv[0] is the program name) and runs.
inline int run_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const Hooks& hooks = {}) {
  CLI::App app{"Locate the boundary between configuration parsing and main computation"};
  app.require_subcommand(1);
  CliConfig config;
  std::string format = "text";
  std::vector<std::string> params, intrinsics;
  std::string dot;

  auto* analyze = app.add_subcommand("analyze", "Analyze one .mir file");
  analyze->add_option("input", config.input_path, "Input .mir file")->required();
  analyze->add_option("--entry", config.entry_name, "Entry procedure");
  auto* param_opt = analyze->add_option("--taint-param", params, "Tainted entry parameter (repeatable)")
                        ->allow_extra_args(false);
  auto* intr_opt = analyze->add_option("--taint-intrinsic", intrinsics, "Intrinsic whose result is tainted (repeatable)")
                       ->allow_extra_args(false);
  analyze->add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json"}));
  analyze->add_flag("--annotate", config.annotate, "Write <input>.annotated.mir");
  analyze->add_flag("--oracle-check", config.oracle_check, "Cross-check against the brute-force oracle");
  auto* dot_opt = analyze->add_option("--dot", dot, "Write block graphs in DOT format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; every other parse failure is a usage error.
    return app.exit(e, out, err) == 0 ? 0 : kInputError;
  }

  if (param_opt->count() > 0) config.taint_params = params;
  if (intr_opt->count() > 0) config.taint_intrinsics = intrinsics;
  config.output_format = format == "json" ? Format::json : Format::text;
  if (dot_opt->count() > 0) config.dot_dump = dot;
  return run(config, out, err, hooks);
}

}  // namespace neck::cli
