#pragma once

// Brute-force reference for the boundary pipeline, meant for small
// programs. Every graph question is answered from first principles on
// successor lists built here: cycles by mutual reachability, articulation
// by deleting the node and counting components, post-dominance by looking
// for an exit path that avoids the node, control dependence from its
// definition, and interprocedural reachability by exploring explicit call
// stacks. Only taint and the hosting rules come from the production code.

#include <algorithm>
#include <climits>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "neck/boundary.hpp"
#include "neck/ir.hpp"
#include "neck/taint.hpp"

namespace neck::oracle {

inline constexpr std::size_t kMaxBlocks = 40;

using Succ = std::vector<std::vector<int>>;

// Path existence from `from` to `to` that never visits `avoid`.
inline bool path_exists(const Succ& succ, int from, int to, int avoid = -1) {
  if (from == avoid) return false;
  std::vector<char> seen(succ.size(), 0);
  std::vector<int> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    for (int s : succ[v])
      if (!seen[s] && s != avoid) {
        seen[s] = 1;
        stack.push_back(s);
      }
  }
  return false;
}

// On a cycle: some successor leads back.
inline bool on_cycle(const Succ& succ, int v) {
  for (int s : succ[v])
    if (path_exists(succ, s, v)) return true;
  return false;
}

inline bool same_component(const Succ& succ, int a, int b) {
  return a == b || (path_exists(succ, a, b) && path_exists(succ, b, a));
}

// Weakly connected components among nodes other than `removed`.
inline int component_count(const Succ& succ, int removed = -1) {
  const int n = static_cast<int>(succ.size());
  std::vector<std::vector<int>> und(n);
  for (int v = 0; v < n; ++v)
    for (int s : succ[v]) {
      und[v].push_back(s);
      und[s].push_back(v);
    }
  std::vector<char> seen(n, 0);
  int count = 0;
  for (int root = 0; root < n; ++root) {
    if (root == removed || seen[root]) continue;
    ++count;
    std::vector<int> stack{root};
    seen[root] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : und[v])
        if (w != removed && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
  }
  return count;
}

inline bool is_articulation(const Succ& succ, int v) { return component_count(succ, v) > component_count(succ); }

// p post-dominates n: n reaches exit, and not while avoiding p.
inline bool post_dominates(const Succ& succ, int exit, int p, int n) {
  if (!path_exists(succ, n, exit)) return false;
  if (p == n) return true;
  return !path_exists(succ, n, exit, p);
}

// b is control dependent on branch a: b post-dominates some successor of a
// and does not strictly post-dominate a.
inline bool control_dependent(const Succ& succ, int exit, int b, int a, int edge) {
  int s = succ[a][edge];
  if (!post_dominates(succ, exit, b, s)) return false;
  return b == a || !post_dominates(succ, exit, b, a);
}

inline std::vector<int> distances(const Succ& succ, int start) {
  std::vector<int> dist(succ.size(), INT_MAX);
  std::deque<int> frontier{start};
  dist[start] = 0;
  while (!frontier.empty()) {
    int v = frontier.front();
    frontier.pop_front();
    for (int s : succ[v])
      if (dist[s] == INT_MAX) {
        dist[s] = dist[v] + 1;
        frontier.push_back(s);
      }
  }
  return dist;
}

// Block-level successor lists; node `blocks.size()` is the exit.
inline Succ block_successors(const ir::Procedure& proc) {
  const int n = static_cast<int>(proc.blocks.size());
  Succ succ(n + 1);
  auto index = [&](const std::string& label) { return static_cast<int>(*proc.block_index(label)); };
  for (int b = 0; b < n; ++b) {
    const auto& insts = proc.blocks[b].instructions;
    bool exits = false;
    for (const auto& inst : insts)
      if (const auto* c = inst.as<ir::Call>(); c && c->callee == "exit") exits = true;
    const auto& last = insts.back();
    auto add = [&](int t) {
      if (std::find(succ[b].begin(), succ[b].end(), t) == succ[b].end()) succ[b].push_back(t);
    };
    if (exits || last.is<ir::Return>()) {
      add(n);
    } else if (const auto* br = last.as<ir::Branch>()) {
      add(index(br->if_true));
      add(index(br->if_false));
    } else if (const auto* j = last.as<ir::Jump>()) {
      add(index(j->target));
    }
  }
  return succ;
}

// Instruction position; index == -1 denotes the procedure's exit.
struct Pos {
  int proc;
  int block;
  int index;
  auto operator<=>(const Pos&) const = default;
};

class Model {
 public:
  Model(const ir::Program& program, const TaintSourceSpec& sources) : program_(program) {
    std::size_t blocks = 0;
    for (const auto& p : program.procedures) blocks += p.blocks.size();
    if (blocks > kMaxBlocks)
      throw Error("program has " + std::to_string(blocks) + " blocks; the oracle handles at most " +
                  std::to_string(kMaxBlocks));
    for (std::size_t p = 0; p < program.procedures.size(); ++p) {
      if (program.procedures[p].name == program.entry_name) entry_ = static_cast<int>(p);
      succ_.push_back(block_successors(program.procedures[p]));
    }

    std::vector<graph::ControlDependence> cds(program.procedures.size());
    for (std::size_t p = 0; p < program.procedures.size(); ++p) {
      const auto& s = succ_[p];
      int exit = exit_node(static_cast<int>(p));
      cds[p].deps.resize(s.size());
      for (int b = 0; b < static_cast<int>(s.size()); ++b)
        for (int a = 0; a < static_cast<int>(s.size()); ++a)
          for (int e = 0; e < static_cast<int>(s[a].size()); ++e)
            if (control_dependent(s, exit, b, a, e)) cds[p].deps[b].push_back({a, e});
    }
    hosting_ = hosting_set(program, taint_analysis(program, sources), cds);
    from_entry_ = explore({entry_, 0, 0}, true);
  }

  const HostingSet& hosting() const { return hosting_; }
  int entry() const { return entry_; }
  int exit_node(int proc) const { return static_cast<int>(program_.procedures[proc].blocks.size()); }
  const Succ& successors(int proc) const { return succ_[proc]; }

  int proc_of(const std::string& name) const {
    for (std::size_t p = 0; p < program_.procedures.size(); ++p)
      if (program_.procedures[p].name == name) return static_cast<int>(p);
    throw Error("unknown procedure " + name);
  }
  int block_of(int proc, const std::string& label) const {
    return static_cast<int>(*program_.procedures[proc].block_index(label));
  }

  // Positions reachable from `start` along valid paths. With
  // `allow_unmatched`, returning from a frame that was not entered here goes
  // to every return site of the procedure.
  std::set<Pos> explore(Pos start, bool allow_unmatched) const {
    using State = std::pair<Pos, std::vector<Pos>>;
    std::set<State> seen;
    std::set<Pos> reached;
    std::vector<State> work{{start, {}}};
    while (!work.empty()) {
      auto state = std::move(work.back());
      work.pop_back();
      if (!seen.insert(state).second) continue;
      const auto& [pos, stack] = state;
      if (pos.index >= 0) reached.insert(pos);
      auto go = [&](Pos next, std::vector<Pos> st) { work.push_back({next, std::move(st)}); };

      if (pos.index < 0) {
        if (!stack.empty()) {
          auto st = stack;
          Pos back = st.back();
          st.pop_back();
          go(back, std::move(st));
        } else if (allow_unmatched) {
          for (const auto& site : call_sites_of(pos.proc)) go({site.proc, site.block, site.index + 1}, {});
        }
        continue;
      }

      const auto& proc = program_.procedures[pos.proc];
      const auto& inst = proc.blocks[pos.block].instructions[pos.index];
      auto at_label = [&](const std::string& label) { return Pos{pos.proc, block_of(pos.proc, label), 0}; };
      if (const auto* br = inst.as<ir::Branch>()) {
        go(at_label(br->if_true), stack);
        go(at_label(br->if_false), stack);
      } else if (const auto* j = inst.as<ir::Jump>()) {
        go(at_label(j->target), stack);
      } else if (inst.is<ir::Return>()) {
        go({pos.proc, -1, -1}, stack);
      } else if (const auto* c = inst.as<ir::Call>()) {
        if (c->callee == "exit") {
          go({pos.proc, -1, -1}, stack);
        } else if (program_.find_procedure(c->callee)) {
          Pos ret{pos.proc, pos.block, pos.index + 1};
          if (std::find(stack.begin(), stack.end(), ret) != stack.end()) continue;
          auto st = stack;
          st.push_back(ret);
          go({proc_of(c->callee), 0, 0}, std::move(st));
        } else {
          go({pos.proc, pos.block, pos.index + 1}, stack);
        }
      } else {
        go({pos.proc, pos.block, pos.index + 1}, stack);
      }
    }
    return reached;
  }

  bool reachable_from_entry(Pos p) const { return from_entry_.count(p) > 0; }

  // Positions inside the callee of the call at `site`, before it returns.
  std::set<Pos> descend(Pos site) const {
    const auto& c = *program_.procedures[site.proc].blocks[site.block].instructions[site.index].as<ir::Call>();
    return explore({proc_of(c.callee), 0, 0}, false);
  }

  // Calls to program procedure `callee`, as positions.
  std::vector<Pos> call_sites_of(int callee) const {
    std::vector<Pos> out;
    const auto& name = program_.procedures[callee].name;
    for (std::size_t p = 0; p < program_.procedures.size(); ++p)
      for (std::size_t b = 0; b < program_.procedures[p].blocks.size(); ++b) {
        const auto& insts = program_.procedures[p].blocks[b].instructions;
        for (std::size_t i = 0; i < insts.size(); ++i)
          if (const auto* c = insts[i].as<ir::Call>(); c && c->callee == name)
            out.push_back({static_cast<int>(p), static_cast<int>(b), static_cast<int>(i)});
      }
    return out;
  }

  std::vector<Pos> entry_call_sites() const {
    std::vector<Pos> out;
    const auto& blocks = program_.procedures[entry_].blocks;
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (std::size_t i = 0; i < blocks[b].instructions.size(); ++i)
        if (const auto* c = blocks[b].instructions[i].as<ir::Call>(); c && program_.find_procedure(c->callee))
          out.push_back({entry_, static_cast<int>(b), static_cast<int>(i)});
    return out;
  }

  std::vector<Pos> definitions(const VarId& var) const {
    std::vector<Pos> out;
    for (std::size_t p = 0; p < program_.procedures.size(); ++p) {
      const auto& proc = program_.procedures[p];
      bool local_scope = !var.is_global() && proc.name == var.scope;
      for (std::size_t b = 0; b < proc.blocks.size(); ++b)
        for (std::size_t i = 0; i < proc.blocks[b].instructions.size(); ++i) {
          const auto* w = proc.blocks[b].instructions[i].written_variable();
          if (!w || *w != var.name) continue;
          bool writes_global = program_.is_global(*w);
          if ((var.is_global() && writes_global) || (local_scope && !writes_global))
            out.push_back({static_cast<int>(p), static_cast<int>(b), static_cast<int>(i)});
        }
    }
    return out;
  }

  bool in_cycle(int proc, int block) const { return on_cycle(succ_[proc], block); }

  bool articulation(int proc, int block) const { return is_articulation(succ_[proc], block); }

  bool follows_loop(int block, int start) const {
    const auto& s = succ_[entry_];
    if (on_cycle(s, block)) return false;
    for (int u = 0; u < exit_node(entry_); ++u)
      if (on_cycle(s, u) && path_exists(s, u, block)) return true;
    const auto& insts = program_.procedures[entry_].blocks[block].instructions;
    for (int i = 0; i < start; ++i) {
      const auto* c = insts[i].as<ir::Call>();
      if (!c || !program_.find_procedure(c->callee)) continue;
      for (const auto& p : descend({entry_, block, i}))
        if (in_cycle(p.proc, p.block)) return true;
    }
    return false;
  }

  bool post_dominates_all(int block) const {
    const auto& s = succ_[entry_];
    int exit = exit_node(entry_);
    if (!path_exists(s, block, exit)) return false;
    auto sites = entry_call_sites();
    for (const auto& var : hosting_.c_host)
      for (const auto& d : definitions(var)) {
        if (!reachable_from_entry(d)) continue;
        if (d.proc == entry_) {
          if (!post_dominates(s, exit, block, d.block)) return false;
          continue;
        }
        bool represented = false;
        for (const auto& site : sites) {
          if (!descend(site).count(d)) continue;
          represented = true;
          if (!post_dominates(s, exit, block, site.block)) return false;
        }
        if (!represented) return false;
      }
    return true;
  }

  bool definition_free(int block, int start, const VarId& var) const {
    auto reach = explore({entry_, block, start}, true);
    for (const auto& d : definitions(var))
      if (reach.count(d)) return false;
    return true;
  }

  int distance(int block) const { return distances(succ_[entry_], 0)[block]; }

 private:
  const ir::Program& program_;
  int entry_ = 0;
  std::vector<Succ> succ_;
  HostingSet hosting_;
  std::set<Pos> from_entry_;
};

// Loop exits of the cyclic component containing `block`.
inline std::vector<int> loop_exits(const Succ& succ, int exit, int block) {
  std::set<int> out;
  for (int u = 0; u < static_cast<int>(succ.size()); ++u) {
    if (!same_component(succ, u, block)) continue;
    for (int x : succ[u])
      if (x != exit && !same_component(succ, x, block)) out.insert(x);
  }
  return {out.begin(), out.end()};
}

}  // namespace neck::oracle

namespace neck {

// Boundary computed by brute force. Same contract as identify_boundary on
// verdict, boundary and each candidate's fate; throws for programs over
// oracle::kMaxBlocks blocks.
inline BoundaryReport oracle_boundary(const ir::Program& program, const TaintSourceSpec& sources = {}) {
  using namespace oracle;
  using Kind = OriginStep::Kind;
  validate_or_throw(program);
  Model m(program, sources);
  BoundaryReport report;
  report.c_host = m.hosting().c_host;
  for (std::size_t p = 0; p < program.procedures.size(); ++p) {
    const auto& s = m.successors(static_cast<int>(p));
    int exit = m.exit_node(static_cast<int>(p));
    for (int b = 0; b < exit; ++b)
      if (!path_exists(s, b, exit))
        report.warnings.push_back("block " + program.procedures[p].name + "/" + program.procedures[p].blocks[b].label +
                                  " cannot reach the procedure exit");
  }
  if (report.c_host.empty()) return report;

  const int entry = m.entry();
  const auto& entry_proc = program.procedures[entry];
  std::set<std::tuple<int, int, int>> keys;  // (proc, block, start)
  auto push = [&](Candidate c) {
    int p = m.proc_of(c.block.procedure);
    if (keys.insert({p, m.block_of(p, c.block.block), static_cast<int>(c.start_index)}).second)
      report.candidates.push_back(std::move(c));
  };

  for (const auto& hb : m.hosting().v_host) {
    int p = m.proc_of(hb.procedure);
    int b = m.block_of(p, hb.block);
    BlockRef host{hb.procedure, hb.block};
    std::vector<int> blocks;
    std::vector<OriginStep> origin{{Kind::hosting_block, host, {}}};
    if (m.in_cycle(p, b)) {
      blocks = loop_exits(m.successors(p), m.exit_node(p), b);
      origin.push_back({Kind::loop_exit_of, host, {}});
    } else {
      blocks = {b};
    }
    for (int x : blocks) {
      Candidate c{{hb.procedure, program.procedures[p].blocks[x].label}, 0, origin, {}, {}};
      if (!m.articulation(p, x)) {
        c.eliminated_by = Elimination::not_articulation;
      } else if (!m.reachable_from_entry({p, x, 0})) {
        c.eliminated_by = Elimination::unreachable;
      } else if (p != entry) {
        std::map<int, int> last;
        for (const auto& site : m.entry_call_sites())
          if (m.descend(site).count({p, x, 0})) last[site.block] = site.index;
        if (last.empty()) c.eliminated_by = Elimination::unreachable;
        for (const auto& [block, index] : last) {
          const auto& label = entry_proc.blocks[block].label;
          Candidate proxy{{entry_proc.name, label}, static_cast<std::size_t>(index + 1), origin, {}, {}};
          proxy.origin.push_back({Kind::proxy_for, c.block, Location{entry_proc.name, label, static_cast<std::size_t>(index)}});
          if (!m.reachable_from_entry({entry, block, 0}))
            proxy.eliminated_by = Elimination::unreachable;
          else if (!m.articulation(entry, block))
            proxy.eliminated_by = Elimination::not_articulation;
          push(std::move(proxy));
        }
        if (!last.empty()) continue;
      }
      push(std::move(c));
    }
  }

  std::optional<std::tuple<int, int, int>> best;
  std::size_t best_index = 0;
  for (std::size_t k = 0; k < report.candidates.size(); ++k) {
    auto& c = report.candidates[k];
    if (c.eliminated_by) continue;
    int b = m.block_of(entry, c.block.block);
    int start = static_cast<int>(c.start_index);
    int d = m.distance(b);
    if (d != INT_MAX) c.distance = d;
    if (!m.follows_loop(b, start)) {
      c.eliminated_by = Elimination::fails_c1;
      continue;
    }
    if (!m.post_dominates_all(b)) {
      c.eliminated_by = Elimination::fails_c2;
      continue;
    }
    bool free = true;
    for (const auto& var : report.c_host) free = free && m.definition_free(b, start, var);
    if (!free) {
      c.eliminated_by = Elimination::fails_c3;
      continue;
    }
    std::tuple<int, int, int> key{d, b, start};
    if (!best || key < *best) {
      best = key;
      best_index = k;
    }
  }
  if (!best) return report;
  for (std::size_t k = 0; k < report.candidates.size(); ++k)
    if (!report.candidates[k].eliminated_by && k != best_index)
      report.candidates[k].eliminated_by = Elimination::not_closest;
  report.boundary = report.candidates[best_index].block;
  report.boundary_start = report.candidates[best_index].start_index;
  report.verdict = Verdict::single_element_found;
  return report;
}

// Agreement on verdict and boundary location.
inline bool same_outcome(const BoundaryReport& a, const BoundaryReport& b) {
  return a.verdict == b.verdict && a.boundary == b.boundary && a.boundary_start == b.boundary_start;
}

}  // namespace neck
