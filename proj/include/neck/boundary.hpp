#pragma once

// Boundary identification: candidate generation from the hosting blocks,
// the three filters and closest-to-entry selection.

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "neck/block_graph.hpp"
#include "neck/graph.hpp"
#include "neck/icfg.hpp"
#include "neck/ir.hpp"
#include "neck/taint.hpp"

namespace neck {

struct BlockRef {
  std::string procedure;
  std::string block;

  std::string to_string() const { return procedure + "/" + block; }
  auto operator<=>(const BlockRef&) const = default;
};

struct OriginStep {
  enum class Kind { hosting_block, loop_exit_of, proxy_for };
  Kind kind;
  BlockRef block;
  std::optional<Location> call_site;  // proxy_for only

  std::string to_string() const {
    switch (kind) {
      case Kind::hosting_block: return "hosting-block(" + block.to_string() + ")";
      case Kind::loop_exit_of: return "loop-exit-of(" + block.to_string() + ")";
      case Kind::proxy_for: return "proxy-for(" + block.to_string() + " via " + call_site->to_string() + ")";
    }
    return {};
  }
  bool operator==(const OriginStep&) const = default;
};

enum class Elimination { not_articulation, unreachable, fails_c1, fails_c2, fails_c3, not_closest };

inline std::string_view to_string(Elimination e) {
  switch (e) {
    case Elimination::not_articulation: return "not-articulation";
    case Elimination::unreachable: return "unreachable";
    case Elimination::fails_c1: return "fails-C1";
    case Elimination::fails_c2: return "fails-C2";
    case Elimination::fails_c3: return "fails-C3";
    case Elimination::not_closest: return "not-closest";
  }
  return {};
}

struct Candidate {
  BlockRef block;
  // First instruction the candidate covers. Non-zero only for proxies,
  // which start right after their call site.
  std::size_t start_index = 0;
  std::vector<OriginStep> origin;
  std::optional<Elimination> eliminated_by;
  // BFS distance from the entry block; set for entry-procedure candidates
  // that reach the filters.
  std::optional<int> distance;

  bool survived() const { return !eliminated_by; }
  bool operator==(const Candidate&) const = default;
};

enum class Verdict { single_element_found, none_found };

inline std::string_view to_string(Verdict v) {
  return v == Verdict::single_element_found ? "single-element-found" : "none-found";
}

struct BoundaryReport {
  std::optional<BlockRef> boundary;
  std::size_t boundary_start = 0;
  std::vector<Candidate> candidates;
  std::set<VarId> c_host;
  Verdict verdict = Verdict::none_found;
  std::vector<std::string> warnings;

  bool operator==(const BoundaryReport&) const = default;
};

// Everything the pipeline derives from (program, sources).
struct ProgramAnalyses {
  const ir::Program& program;
  Icfg icfg;
  std::vector<ProcedureAnalyses> procs;
  TaintResult taint;
  HostingSet hosting;
  std::vector<bool> from_entry;  // ICFG nodes on valid paths from v_en
  int entry = 0;

  ProgramAnalyses(const ir::Program& p, const TaintSourceSpec& sources)
      : program(p),
        icfg(build_icfg(p)),
        procs(analyze_procedures(p)),
        taint(taint_analysis(p, icfg, sources)),
        hosting(hosting_set(p, taint, cdeps_of(procs))),
        from_entry(reachable_mask(icfg, icfg.v_en)),
        entry(icfg.entry_proc) {}

  int proc_index(const std::string& name) const { return *icfg.locations.proc_of(name); }
  int block_index(const BlockRef& b) const { return *icfg.locations.block_of(proc_index(b.procedure), b.block); }
  int node_of(const BlockRef& b, std::size_t index) const { return icfg.node_of({b.procedure, b.block, index}); }

  // Call sites of program procedures in the entry procedure, in program
  // order, with the nodes each call descends to.
  struct EntryCall {
    int block;
    std::size_t index;
    std::vector<bool> reaches;
  };
  const std::vector<EntryCall>& entry_calls() const {
    if (!entry_calls_) {
      entry_calls_.emplace();
      const auto& proc = program.procedures[static_cast<std::size_t>(entry)];
      for (std::size_t b = 0; b < proc.blocks.size(); ++b)
        for (std::size_t i = 0; i < proc.blocks[b].instructions.size(); ++i) {
          const auto* c = proc.blocks[b].instructions[i].as<ir::Call>();
          if (!c || !program.find_procedure(c->callee)) continue;
          int node = icfg.node_of({proc.name, proc.blocks[b].label, i});
          entry_calls_->push_back({static_cast<int>(b), i, callee_reachable_mask(icfg, node)});
        }
    }
    return *entry_calls_;
  }

 private:
  static std::vector<graph::ControlDependence> cdeps_of(const std::vector<ProcedureAnalyses>& procs) {
    std::vector<graph::ControlDependence> out;
    for (const auto& a : procs) out.push_back(a.cdeps);
    return out;
  }
  mutable std::optional<std::vector<EntryCall>> entry_calls_;
};

// Blocks outside the cyclic SCC containing `block` with an in-edge from it.
inline std::vector<int> loop_exit_blocks(const BlockGraph& g, const graph::SccPartition& sccs, int block) {
  std::set<int> exits;
  int comp = sccs.component_of[static_cast<std::size_t>(block)];
  for (int n : sccs.components[static_cast<std::size_t>(comp)])
    for (int s : g.successors(n))
      if (sccs.component_of[static_cast<std::size_t>(s)] != comp && s != g.virtual_exit) exits.insert(s);
  return {exits.begin(), exits.end()};
}

// C1 at block level: the block lies in no cyclic SCC and is reachable from
// one.
inline bool follows_loop(const BlockGraph& g, const graph::SccPartition& sccs, int block) {
  if (sccs.in_loop(block)) return false;
  std::vector<bool> seen(g.node_count(), false);
  std::vector<int> work;
  for (int n = 0; n < g.block_count(); ++n)
    if (sccs.in_loop(n)) {
      seen[n] = true;
      work.push_back(n);
    }
  while (!work.empty()) {
    int v = work.back();
    work.pop_back();
    if (v == block) return true;
    for (int s : g.successors(v))
      if (!seen[s]) {
        seen[s] = true;
        work.push_back(s);
      }
  }
  return false;
}

// C1 for a candidate. A proxy also follows a loop when a call preceding its
// start descends into a loop of some procedure.
inline bool follows_loop(const Candidate& c, const ProgramAnalyses& a) {
  int p = a.proc_index(c.block.procedure);
  int b = a.block_index(c.block);
  const auto& pa = a.procs[static_cast<std::size_t>(p)];
  if (pa.sccs.in_loop(b)) return false;
  if (follows_loop(pa.cfg, pa.sccs, b)) return true;
  for (std::size_t i = 0; i < c.start_index; ++i) {
    const auto* call = a.program.procedures[p].blocks[b].instructions[i].as<ir::Call>();
    if (!call || !a.program.find_procedure(call->callee)) continue;
    auto reach = callee_reachable_mask(a.icfg, a.node_of(c.block, i));
    for (int v = 0; v < static_cast<int>(reach.size()); ++v) {
      const auto& n = a.icfg.nodes[static_cast<std::size_t>(v)];
      if (reach[v] && n.kind == IcfgNode::Kind::instruction &&
          a.procs[static_cast<std::size_t>(n.proc)].sccs.in_loop(n.block))
        return true;
    }
  }
  return false;
}

// C2: the candidate post-dominates every definition of a hosting variable
// reachable from the entry. A definition in another procedure is
// represented by each entry-procedure call-site block that descends to it.
inline bool post_dominates_all(const Candidate& c, const ProgramAnalyses& a) {
  const auto& pd = a.procs[static_cast<std::size_t>(a.entry)].postdom;
  int b = a.block_index(c.block);
  if (!pd.contains(b)) return false;
  const auto& entry_name = a.program.procedures[static_cast<std::size_t>(a.entry)].name;
  for (const auto& var : a.hosting.c_host)
    for (const auto& def : ir::defs_of(a.program, var)) {
      int node = a.icfg.node_of(def);
      if (!a.from_entry[node]) continue;
      if (def.procedure == entry_name) {
        if (!pd.post_dominates(b, a.block_index({def.procedure, def.block}))) return false;
        continue;
      }
      bool represented = false;
      for (const auto& call : a.entry_calls()) {
        if (!call.reaches[node]) continue;
        represented = true;
        if (!pd.post_dominates(b, call.block)) return false;
      }
      if (!represented) return false;
    }
  return true;
}

// C3 for one variable: no definition of `var` is reachable from `start`
// along a valid path (the start instruction included).
inline bool definition_free(const ir::Program& program, const Icfg& icfg, const Location& start, const VarId& var) {
  auto reach = reachable_mask(icfg, icfg.node_of(start));
  for (const auto& def : ir::defs_of(program, var))
    if (reach[icfg.node_of(def)]) return false;
  return true;
}

inline bool definition_free_all(const Candidate& c, const ProgramAnalyses& a) {
  auto reach = reachable_mask(a.icfg, a.node_of(c.block, c.start_index));
  for (const auto& var : a.hosting.c_host)
    for (const auto& def : ir::defs_of(a.program, var))
      if (reach[a.icfg.node_of(def)]) return false;
  return true;
}

namespace boundary_detail {

class CandidateList {
 public:
  // Adds a candidate unless one with the same block and start exists.
  void add(Candidate c) {
    auto key = std::make_tuple(c.block.procedure, c.block.block, c.start_index);
    if (!seen_.insert(key).second) return;
    list_.push_back(std::move(c));
  }
  std::vector<Candidate>& items() { return list_; }

 private:
  std::vector<Candidate> list_;
  std::set<std::tuple<std::string, std::string, std::size_t>> seen_;
};

}  // namespace boundary_detail

// Steps (1)-(5): loop-exit adjustment, own-procedure articulation points,
// reachability from the entry, proxy relocation into the entry procedure
// and entry-procedure articulation points. Eliminated candidates keep their
// reason; relocated ones are replaced by their proxies.
inline std::vector<Candidate> generate_candidates(const ProgramAnalyses& a) {
  using Kind = OriginStep::Kind;
  const auto& program = a.program;
  const auto& entry_name = program.procedures[static_cast<std::size_t>(a.entry)].name;

  boundary_detail::CandidateList seeds;
  for (const auto& hb : a.hosting.v_host) {
    BlockRef host{hb.procedure, hb.block};
    int p = a.proc_index(hb.procedure);
    const auto& pa = a.procs[static_cast<std::size_t>(p)];
    int b = a.block_index(host);
    if (pa.sccs.in_loop(b)) {
      for (int e : loop_exit_blocks(pa.cfg, pa.sccs, b))
        seeds.add({{hb.procedure, pa.cfg.labels[e]}, 0, {{Kind::hosting_block, host, {}}, {Kind::loop_exit_of, host, {}}}, {}, {}});
    } else {
      seeds.add({host, 0, {{Kind::hosting_block, host, {}}}, {}, {}});
    }
  }

  boundary_detail::CandidateList out;
  for (auto& c : seeds.items()) {
    int p = a.proc_index(c.block.procedure);
    int b = a.block_index(c.block);
    if (!graph::contains(a.procs[static_cast<std::size_t>(p)].articulation, b)) {
      c.eliminated_by = Elimination::not_articulation;
    } else if (!a.from_entry[a.node_of(c.block, 0)]) {
      c.eliminated_by = Elimination::unreachable;
    }
    if (c.eliminated_by || p == a.entry) {
      out.add(std::move(c));
      continue;
    }

    int target = a.node_of(c.block, 0);
    std::map<int, std::size_t> last_call;  // entry block -> last reaching call index
    for (const auto& call : a.entry_calls())
      if (call.reaches[target]) {
        last_call[call.block] = call.index;
      }
    if (last_call.empty()) {
      c.eliminated_by = Elimination::unreachable;
      out.add(std::move(c));
      continue;
    }
    for (const auto& [block, index] : last_call) {
      const auto& label = program.procedures[static_cast<std::size_t>(a.entry)].blocks[block].label;
      Candidate proxy{{entry_name, label}, index + 1, c.origin, {}, {}};
      proxy.origin.push_back({Kind::proxy_for, c.block, Location{entry_name, label, index}});
      out.add(std::move(proxy));
    }
  }

  const auto& entry_pa = a.procs[static_cast<std::size_t>(a.entry)];
  for (auto& c : out.items()) {
    if (c.eliminated_by || c.start_index == 0) continue;
    int b = a.block_index(c.block);
    if (!a.from_entry[a.node_of(c.block, 0)])
      c.eliminated_by = Elimination::unreachable;
    else if (!graph::contains(entry_pa.articulation, b))
      c.eliminated_by = Elimination::not_articulation;
  }
  return std::move(out.items());
}

inline std::vector<std::string> exit_warnings(const ProgramAnalyses& a) {
  std::vector<std::string> out;
  for (const auto& pa : a.procs)
    for (int b : pa.postdom.excluded())
      if (b != pa.cfg.virtual_exit)
        out.push_back("block " + pa.cfg.procedure + "/" + pa.cfg.labels[b] + " cannot reach the procedure exit");
  return out;
}

inline void validate_or_throw(const ir::Program& program) {
  auto diags = ir::validate(program);
  if (!diags.empty()) throw Error("invalid program: " + diags.front().to_string("<program>"));
}

inline BoundaryReport identify_boundary(const ProgramAnalyses& a) {
  BoundaryReport report;
  report.c_host = a.hosting.c_host;
  report.warnings = exit_warnings(a);
  if (a.hosting.c_host.empty()) return report;

  report.candidates = generate_candidates(a);
  const auto& entry_pa = a.procs[static_cast<std::size_t>(a.entry)];
  auto dist = graph::bfs_distance(entry_pa.cfg, entry_pa.cfg.entry);

  for (auto& c : report.candidates) {
    if (c.eliminated_by) continue;
    int b = a.block_index(c.block);
    if (auto it = dist.find(b); it != dist.end()) c.distance = it->second;
    if (!follows_loop(c, a))
      c.eliminated_by = Elimination::fails_c1;
    else if (!post_dominates_all(c, a))
      c.eliminated_by = Elimination::fails_c2;
    else if (!definition_free_all(c, a))
      c.eliminated_by = Elimination::fails_c3;
  }

  Candidate* best = nullptr;
  auto key = [&](const Candidate& c) {
    return std::make_tuple(c.distance.value_or(INT_MAX), a.block_index(c.block), c.start_index);
  };
  std::size_t survivors = 0;
  for (auto& c : report.candidates) {
    if (c.eliminated_by) continue;
    ++survivors;
    if (!best || key(c) < key(*best)) best = &c;
  }
  if (!best) return report;
  for (auto& c : report.candidates)
    if (!c.eliminated_by && &c != best) c.eliminated_by = Elimination::not_closest;
  if (survivors > 1)
    report.warnings.push_back(std::to_string(survivors) + " candidates survive all filters; selected the closest, " +
                              best->block.to_string());
  report.boundary = best->block;
  report.boundary_start = best->start_index;
  report.verdict = Verdict::single_element_found;
  return report;
}

inline BoundaryReport identify_boundary(const ir::Program& program, const TaintSourceSpec& sources = {}) {
  validate_or_throw(program);
  ProgramAnalyses a(program, sources);
  return identify_boundary(a);
}

}  // namespace neck
