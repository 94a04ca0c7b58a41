#pragma once

// Interprocedural control-flow graph at instruction granularity.
//
// Each procedure contributes an entry anchor, one node per instruction and
// an exit anchor. A call to a declared procedure has a call edge to the
// callee's entry anchor, a call-to-return edge to the next instruction, and
// the callee's exit anchor has a matching return edge to that instruction.
// Intrinsic calls are opaque; `exit` jumps to its procedure's exit anchor.

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "neck/graph.hpp"
#include "neck/ir.hpp"

namespace neck {

struct IcfgNode {
  enum class Kind { entry, exit, instruction };
  Kind kind = Kind::instruction;
  int proc = 0;
  int block = -1;
  int index = -1;
};

enum class EdgeKind { intra, call_to_return, call, ret };

struct IcfgEdge {
  int to;
  EdgeKind kind;
  // The call instruction node for call / call_to_return / ret edges.
  int call_site = -1;
};

// Maps Locations to ICFG node ids.
struct LocationIndex {
  std::vector<std::string> proc_names;
  std::vector<std::vector<std::string>> block_labels;
  std::vector<std::vector<int>> block_first;  // node of instruction 0
  std::vector<std::vector<int>> block_size;
  std::vector<std::unordered_map<std::string, int>> block_ids;

  std::optional<int> proc_of(std::string_view name) const {
    for (std::size_t i = 0; i < proc_names.size(); ++i)
      if (proc_names[i] == name) return static_cast<int>(i);
    return std::nullopt;
  }
  std::optional<int> block_of(int proc, std::string_view label) const {
    const auto& ids = block_ids[static_cast<std::size_t>(proc)];
    if (auto it = ids.find(std::string(label)); it != ids.end()) return it->second;
    return std::nullopt;
  }
  int node_of(const Location& loc) const {
    auto p = proc_of(loc.procedure);
    if (!p) throw Error("unknown procedure " + loc.procedure);
    auto b = block_of(*p, loc.block);
    if (!b || static_cast<int>(loc.index) >= block_size[*p][*b]) throw Error("no instruction at " + loc.to_string());
    return block_first[*p][*b] + static_cast<int>(loc.index);
  }
};

struct Icfg {
  std::vector<IcfgNode> nodes;
  std::vector<std::vector<IcfgEdge>> out;
  std::vector<std::vector<IcfgEdge>> in;
  std::vector<int> proc_entry;
  std::vector<int> proc_exit;
  LocationIndex locations;
  int v_en = -1;
  int v_ex = -1;
  int entry_proc = -1;
  // Whether a procedure's exit is reachable from its entry along a
  // same-level path (used to enable call-to-return edges).
  std::vector<bool> can_return;

  std::size_t node_count() const { return nodes.size(); }

  int node_of(const Location& loc) const { return locations.node_of(loc); }

  Location location_of(int node) const {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    if (n.kind != IcfgNode::Kind::instruction) throw Error("anchor node has no location");
    return {locations.proc_names[n.proc], locations.block_labels[n.proc][n.block], static_cast<std::size_t>(n.index)};
  }

  std::string node_name(int node) const {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    const auto& proc = locations.proc_names[n.proc];
    switch (n.kind) {
      case IcfgNode::Kind::entry: return proc + ":<entry>";
      case IcfgNode::Kind::exit: return proc + ":<exit>";
      default: return location_of(node).to_string();
    }
  }

  std::size_t edge_count(EdgeKind kind) const {
    std::size_t c = 0;
    for (const auto& edges : out)
      for (const auto& e : edges) c += e.kind == kind;
    return c;
  }
};

namespace icfg_detail {

inline void add_edge(Icfg& g, int from, IcfgEdge e) {
  for (const auto& existing : g.out[from])
    if (existing.to == e.to && existing.kind == e.kind && existing.call_site == e.call_site) return;
  g.out[from].push_back(e);
  g.in[e.to].push_back({from, e.kind, e.call_site});
}

inline bool edge_enabled(const Icfg& g, const IcfgEdge& e, bool calls, bool returns) {
  switch (e.kind) {
    case EdgeKind::intra: return true;
    case EdgeKind::call_to_return: {
      for (const auto& c : g.out[e.call_site])
        if (c.kind == EdgeKind::call) return g.can_return[g.nodes[c.to].proc];
      return false;
    }
    case EdgeKind::call: return calls;
    case EdgeKind::ret: return returns;
  }
  return false;
}

inline void flood(const Icfg& g, std::vector<bool>& seen, std::vector<int> work, bool calls, bool returns) {
  while (!work.empty()) {
    int v = work.back();
    work.pop_back();
    for (const auto& e : g.out[v]) {
      if (seen[e.to] || !edge_enabled(g, e, calls, returns)) continue;
      seen[e.to] = true;
      work.push_back(e.to);
    }
  }
}

inline void compute_can_return(Icfg& g) {
  const std::size_t procs = g.proc_entry.size();
  g.can_return.assign(procs, false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t p = 0; p < procs; ++p) {
      if (g.can_return[p]) continue;
      std::vector<bool> seen(g.node_count(), false);
      seen[g.proc_entry[p]] = true;
      flood(g, seen, {g.proc_entry[p]}, false, false);
      if (seen[g.proc_exit[p]]) {
        g.can_return[p] = true;
        changed = true;
      }
    }
  }
}

}  // namespace icfg_detail

inline Icfg build_icfg(const ir::Program& program) {
  auto entry = program.procedure_index(program.entry_name);
  if (!entry) throw Error("no entry procedure '" + program.entry_name + "'");

  Icfg g;
  g.entry_proc = static_cast<int>(*entry);
  const auto& procs = program.procedures;
  auto& loc = g.locations;
  for (std::size_t p = 0; p < procs.size(); ++p) {
    const int pi = static_cast<int>(p);
    loc.proc_names.push_back(procs[p].name);
    loc.block_labels.emplace_back();
    loc.block_first.emplace_back();
    loc.block_size.emplace_back();
    loc.block_ids.emplace_back();
    g.proc_entry.push_back(static_cast<int>(g.nodes.size()));
    g.nodes.push_back({IcfgNode::Kind::entry, pi});
    for (std::size_t b = 0; b < procs[p].blocks.size(); ++b) {
      const auto& block = procs[p].blocks[b];
      loc.block_ids.back().emplace(block.label, static_cast<int>(loc.block_labels.back().size()));
      loc.block_labels.back().push_back(block.label);
      loc.block_first.back().push_back(static_cast<int>(g.nodes.size()));
      loc.block_size.back().push_back(static_cast<int>(block.instructions.size()));
      for (std::size_t i = 0; i < block.instructions.size(); ++i)
        g.nodes.push_back({IcfgNode::Kind::instruction, pi, static_cast<int>(b), static_cast<int>(i)});
    }
    g.proc_exit.push_back(static_cast<int>(g.nodes.size()));
    g.nodes.push_back({IcfgNode::Kind::exit, pi});
  }
  g.out.resize(g.nodes.size());
  g.in.resize(g.nodes.size());

  for (std::size_t p = 0; p < procs.size(); ++p) {
    const auto& proc = procs[p];
    const int exit_node = g.proc_exit[p];
    std::unordered_map<std::string, int> first;
    for (std::size_t b = 0; b < proc.blocks.size(); ++b) first.emplace(proc.blocks[b].label, loc.block_first[p][b]);
    if (!proc.blocks.empty()) icfg_detail::add_edge(g, g.proc_entry[p], {loc.block_first[p][0], EdgeKind::intra});

    for (std::size_t b = 0; b < proc.blocks.size(); ++b) {
      const auto& insts = proc.blocks[b].instructions;
      for (std::size_t i = 0; i < insts.size(); ++i) {
        const int node = loc.block_first[p][b] + static_cast<int>(i);
        const auto& inst = insts[i];
        const bool has_next = i + 1 < insts.size();
        if (const auto* br = inst.as<ir::Branch>()) {
          icfg_detail::add_edge(g, node, {first.at(br->if_true), EdgeKind::intra});
          icfg_detail::add_edge(g, node, {first.at(br->if_false), EdgeKind::intra});
        } else if (const auto* j = inst.as<ir::Jump>()) {
          icfg_detail::add_edge(g, node, {first.at(j->target), EdgeKind::intra});
        } else if (inst.is<ir::Return>()) {
          icfg_detail::add_edge(g, node, {exit_node, EdgeKind::intra});
        } else if (const auto* call = inst.as<ir::Call>()) {
          if (call->callee == "exit") {
            icfg_detail::add_edge(g, node, {exit_node, EdgeKind::intra});
          } else if (auto callee = program.procedure_index(call->callee)) {
            if (has_next) {
              icfg_detail::add_edge(g, node, {g.proc_entry[*callee], EdgeKind::call, node});
              icfg_detail::add_edge(g, node, {node + 1, EdgeKind::call_to_return, node});
              icfg_detail::add_edge(g, g.proc_exit[*callee], {node + 1, EdgeKind::ret, node});
            }
          } else if (has_next) {
            icfg_detail::add_edge(g, node, {node + 1, EdgeKind::intra});
          }
        } else if (has_next) {
          icfg_detail::add_edge(g, node, {node + 1, EdgeKind::intra});
        }
      }
    }
  }

  g.v_en = g.proc_entry[*entry];
  g.v_ex = g.proc_exit[*entry];
  icfg_detail::compute_can_return(g);
  return g;
}

// Nodes reachable along interprocedurally valid paths: a prefix of
// unmatched returns followed by unmatched calls, with matched call/return
// pairs summarized by call-to-return edges.
inline std::vector<bool> reachable_mask(const Icfg& g, int start) {
  std::vector<bool> seen(g.node_count(), false);
  seen[start] = true;
  icfg_detail::flood(g, seen, {start}, false, true);
  std::vector<int> frontier;
  for (int v = 0; v < static_cast<int>(seen.size()); ++v)
    if (seen[v]) frontier.push_back(v);
  icfg_detail::flood(g, seen, std::move(frontier), true, false);
  return seen;
}

inline graph::NodeSet reachable_from(const Icfg& g, int start) {
  auto mask = reachable_mask(g, start);
  graph::NodeSet out;
  for (int v = 0; v < static_cast<int>(mask.size()); ++v)
    if (mask[v]) out.push_back(v);
  return out;
}

// Nodes reachable from the entry of the procedure called at `call_node`
// without returning from it (nested calls are entered or summarized).
inline std::vector<bool> callee_reachable_mask(const Icfg& g, int call_node) {
  std::vector<bool> seen(g.node_count(), false);
  std::vector<int> work;
  for (const auto& e : g.out[call_node])
    if (e.kind == EdgeKind::call && !seen[e.to]) {
      seen[e.to] = true;
      work.push_back(e.to);
    }
  icfg_detail::flood(g, seen, std::move(work), true, false);
  return seen;
}

inline std::string to_dot(const Icfg& g) {
  std::string out = "digraph icfg {\n";
  for (int v = 0; v < static_cast<int>(g.node_count()); ++v)
    out += "  n" + std::to_string(v) + " [label=\"" + g.node_name(v) + "\"];\n";
  for (int v = 0; v < static_cast<int>(g.node_count()); ++v)
    for (const auto& e : g.out[v]) {
      out += "  n" + std::to_string(v) + " -> n" + std::to_string(e.to);
      if (e.kind == EdgeKind::call || e.kind == EdgeKind::ret) out += " [style=dashed]";
      out += ";\n";
    }
  return out + "}\n";
}

}  // namespace neck
