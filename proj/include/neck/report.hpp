#pragma once

// Rendering of a BoundaryReport as JSON or text, and boundary annotation of
// the analyzed program.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neck/boundary.hpp"
#include "neck/parser.hpp"

namespace neck {

inline std::vector<std::string> sorted_names(const std::set<VarId>& vars) {
  std::vector<std::string> out;
  for (const auto& v : vars) out.push_back(v.to_string());
  std::sort(out.begin(), out.end());
  return out;
}

// Keys come out sorted (nlohmann::json objects are std::map backed).
// Everything except `timing_ms` is a function of the input.
inline nlohmann::json to_json(const BoundaryReport& r, std::optional<double> timing_ms = std::nullopt) {
  using nlohmann::json;
  json j;
  j["verdict"] = std::string(to_string(r.verdict));
  j["boundary"] = r.boundary ? json{{"proc", r.boundary->procedure},
                                    {"block", r.boundary->block},
                                    {"start_index", r.boundary_start}}
                             : json(nullptr);
  j["c_host"] = sorted_names(r.c_host);
  json candidates = json::array();
  for (const auto& c : r.candidates) {
    json origin = json::array();
    for (const auto& step : c.origin) origin.push_back(step.to_string());
    candidates.push_back({{"proc", c.block.procedure},
                          {"block", c.block.block},
                          {"start_index", c.start_index},
                          {"origin", origin},
                          {"eliminated_by", c.eliminated_by ? json(std::string(to_string(*c.eliminated_by))) : json(nullptr)},
                          {"distance", c.distance ? json(*c.distance) : json(nullptr)}});
  }
  j["candidates"] = candidates;
  j["warnings"] = r.warnings;
  j["timing_ms"] = timing_ms ? json(*timing_ms) : json(nullptr);
  return j;
}

inline std::string to_text(const BoundaryReport& r) {
  std::string out;
  if (r.boundary) {
    out += "boundary: " + r.boundary->to_string();
    if (r.boundary_start > 0) out += " (after instruction " + std::to_string(r.boundary_start - 1) + ")";
    out += "\n";
  } else {
    out += "no single-element boundary\n";
  }
  out += "verdict: " + std::string(to_string(r.verdict)) + "\n";
  out += "c_host:";
  for (const auto& name : sorted_names(r.c_host)) out += " " + name;
  out += "\n";
  if (!r.candidates.empty()) out += "candidates:\n";
  for (const auto& c : r.candidates) {
    out += "  " + c.block.to_string();
    if (c.start_index > 0) out += "@" + std::to_string(c.start_index);
    out += c.eliminated_by ? "  eliminated: " + std::string(to_string(*c.eliminated_by)) : std::string("  selected");
    out += "  from";
    for (const auto& step : c.origin) out += " " + step.to_string();
    out += "\n";
  }
  for (const auto& w : r.warnings) out += "warning: " + w + "\n";
  return out;
}

// The program's canonical text with `# BOUNDARY` on the line before the
// boundary block's label.
inline SourceText emit_annotated(const ir::Program& program, const BoundaryReport& report) {
  if (!report.boundary) throw Error("no boundary to annotate");
  if (!ir::validate(program).empty()) throw Error("cannot annotate an invalid program");
  const auto& b = *report.boundary;
  bool placed = false;
  auto text = emit_with(program, [&](const ir::Procedure& proc, const ir::BasicBlock& block) {
    if (proc.name != b.procedure || block.label != b.block) return std::string();
    placed = true;
    return std::string("# BOUNDARY");
  });
  if (!placed) throw Error("boundary " + b.to_string() + " is not in the program");
  return {std::move(text), "<annotated>"};
}

}  // namespace neck
