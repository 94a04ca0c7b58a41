#pragma once

// Boundary invariants P1-P7 and P9, checked with the brute-force model
// rather than the production analyses.

#include <climits>
#include <string>
#include <vector>

#include "neck/boundary.hpp"
#include "neck/oracle.hpp"

namespace neck::testprop {

// Returns one message per violated property; empty when all hold.
inline std::vector<std::string> boundary_violations(const ir::Program& program, const TaintSourceSpec& sources,
                                                    const BoundaryReport& report) {
  std::vector<std::string> bad;
  if (report.boundary.has_value() != (report.verdict == Verdict::single_element_found))
    bad.push_back("verdict does not match boundary presence");
  if (identify_boundary(program, sources) != report) bad.push_back("P9: second run differs");
  if (!report.boundary) return bad;

  const auto& b = *report.boundary;
  if (b.procedure != program.entry_name) bad.push_back("boundary outside the entry procedure");
  int selected = 0;
  for (const auto& c : report.candidates)
    if (c.survived()) {
      ++selected;
      if (c.block != b || c.start_index != report.boundary_start) bad.push_back("surviving candidate is not the boundary");
    }
  if (selected != 1) bad.push_back("expected exactly one surviving candidate");

  oracle::Model m(program, sources);
  int proc = m.entry();
  int block = m.block_of(proc, b.block);
  int start = static_cast<int>(report.boundary_start);
  if (!m.articulation(proc, block)) bad.push_back("P1: not an articulation point");
  if (!m.reachable_from_entry({proc, block, 0})) bad.push_back("P2: unreachable from the entry");
  if (!m.post_dominates_all(block)) bad.push_back("P3: does not post-dominate every reachable definition");
  for (const auto& v : m.hosting().c_host)
    if (!m.definition_free(block, start, v)) bad.push_back("P4: " + v.to_string() + " is redefined afterwards");
  if (!m.follows_loop(block, start)) bad.push_back("P5: does not follow a loop");

  int best = m.distance(block);
  for (const auto& c : report.candidates) {
    if (c.eliminated_by != Elimination::not_closest) continue;
    int d = m.distance(m.block_of(proc, c.block.block));
    int cb = m.block_of(proc, c.block.block);
    if (d < best || (d == best && (cb < block || (cb == block && static_cast<int>(c.start_index) < start))))
      bad.push_back("P6: " + c.block.to_string() + " is closer");
  }
  if (m.in_cycle(proc, block)) bad.push_back("P7: boundary lies on a cycle");
  return bad;
}

}  // namespace neck::testprop
