#pragma once

#include <string>
#include <vector>

#include "neck/graph.hpp"
#include "neck/ir.hpp"

namespace neck {

// Control-flow graph of one procedure at block granularity. Nodes
// 0..blocks-1 are the procedure's blocks in declaration order; the last
// node is the synthetic virtual exit. Calls are straight-line here.
struct BlockGraph {
  std::string procedure;
  std::vector<std::string> labels;  // labels[virtual_exit] == "<exit>"
  graph::Digraph edges;
  int entry = 0;
  int virtual_exit = 0;

  std::size_t node_count() const { return edges.node_count(); }
  const std::vector<int>& successors(int n) const { return edges.successors(n); }

  int block_count() const { return virtual_exit; }

  int node_of(std::string_view label) const {
    for (int i = 0; i < virtual_exit; ++i)
      if (labels[static_cast<std::size_t>(i)] == label) return i;
    throw Error("no block " + std::string(label) + " in " + procedure);
  }
};

// Branch yields [then, else] (deduplicated when both name the same
// block), Jump its target, Return and any block calling the exit intrinsic
// a single edge to the virtual exit.
inline BlockGraph build_block_graph(const ir::Procedure& proc) {
  BlockGraph g;
  g.procedure = proc.name;
  const int n = static_cast<int>(proc.blocks.size());
  g.virtual_exit = n;
  g.edges = graph::Digraph(static_cast<std::size_t>(n) + 1);
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < n; ++i) {
    g.labels.push_back(proc.blocks[static_cast<std::size_t>(i)].label);
    index.emplace(g.labels.back(), i);
  }
  g.labels.push_back("<exit>");

  for (int i = 0; i < n; ++i) {
    const auto& block = proc.blocks[static_cast<std::size_t>(i)];
    if (ir::calls_exit(block)) {
      g.edges.add_edge(i, g.virtual_exit);
      continue;
    }
    const auto* term = block.terminator();
    if (!term) continue;
    if (const auto* br = term->as<ir::Branch>()) {
      g.edges.add_edge(i, index.at(br->if_true));
      g.edges.add_edge(i, index.at(br->if_false));
    } else if (const auto* j = term->as<ir::Jump>()) {
      g.edges.add_edge(i, index.at(j->target));
    } else {
      g.edges.add_edge(i, g.virtual_exit);
    }
  }
  return g;
}

// Per-procedure analyses computed once and shared by the pipeline.
struct ProcedureAnalyses {
  BlockGraph cfg;
  graph::SccPartition sccs;
  graph::NodeSet articulation;
  graph::PostDomTree postdom;
  graph::ControlDependence cdeps;
};

inline ProcedureAnalyses analyze_procedure(const ir::Procedure& proc) {
  ProcedureAnalyses a;
  a.cfg = build_block_graph(proc);
  a.sccs = graph::scc(a.cfg);
  a.articulation = graph::articulation_points(a.cfg);
  a.postdom = graph::post_dominators(a.cfg, a.cfg.virtual_exit);
  a.cdeps = graph::control_dependence(a.cfg, a.postdom);
  return a;
}

inline std::vector<ProcedureAnalyses> analyze_procedures(const ir::Program& program) {
  std::vector<ProcedureAnalyses> out;
  out.reserve(program.procedures.size());
  for (const auto& proc : program.procedures) out.push_back(analyze_procedure(proc));
  return out;
}

inline std::string to_dot(const BlockGraph& g) {
  std::string out = "digraph \"" + g.procedure + "\" {\n";
  for (int v = 0; v < static_cast<int>(g.node_count()); ++v)
    out += "  n" + std::to_string(v) + " [label=\"" + g.procedure + ":" + g.labels[v] + "\"];\n";
  for (int v = 0; v < static_cast<int>(g.node_count()); ++v)
    for (int s : g.successors(v)) out += "  n" + std::to_string(v) + " -> n" + std::to_string(s) + ";\n";
  return out + "}\n";
}

}  // namespace neck
