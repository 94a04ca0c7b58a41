#pragma once

// Forward, flow-sensitive, context-insensitive may-taint over the ICFG, and
// derivation of configuration-hosting blocks/variables from its results.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "neck/graph.hpp"
#include "neck/icfg.hpp"
#include "neck/ir.hpp"

namespace neck {

struct TaintSourceSpec {
  // Tainted parameters of the entry procedure; nullopt means all of them.
  std::optional<std::vector<std::string>> entry_params;
  std::set<std::string> intrinsic_sources{"readcfg"};

  static TaintSourceSpec none() { return {std::vector<std::string>{}, {}}; }
};

namespace taint_detail {

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t n) : words_((n + 63) / 64, 0) {}

  bool test(int i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  void set(int i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(int i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  void assign(int i, bool v) { v ? set(i) : reset(i); }

  bool merge(const Bits& o) {
    bool changed = false;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      auto before = words_[w];
      words_[w] |= o.words_[w];
      changed |= words_[w] != before;
    }
    return changed;
  }
  void mask(const Bits& keep) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= keep.words_[w];
  }
  bool any() const {
    return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
  }
  bool is_subset_of(const Bits& o) const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~o.words_[w]) return false;
    return true;
  }
  bool operator==(const Bits&) const = default;

 private:
  std::vector<std::uint64_t> words_;
};

}  // namespace taint_detail

// Dense numbering of every variable in a program. Each procedure also gets
// a hidden return-value slot.
class VarTable {
 public:
  explicit VarTable(const ir::Program& program) {
    for (const auto& g : program.globals) add(VarId::global(g));
    global_count_ = static_cast<int>(vars_.size());
    for (std::size_t p = 0; p < program.procedures.size(); ++p) {
      const auto& proc = program.procedures[p];
      auto local = [&](const std::string& name) {
        if (!program.is_global(name)) add(VarId::local(proc.name, name));
      };
      for (const auto& param : proc.params) local(param);
      for (const auto& block : proc.blocks)
        for (const auto& inst : block.instructions) {
          if (const auto* w = inst.written_variable()) local(*w);
          inst.for_each_used_variable(local);
        }
      ret_slot_.push_back(static_cast<int>(vars_.size()));
      vars_.push_back(VarId::local(proc.name, "<ret>"));
      hidden_.push_back(static_cast<int>(vars_.size()) - 1);
    }
    owner_.assign(vars_.size(), -1);
    for (std::size_t v = 0; v < vars_.size(); ++v)
      if (!vars_[v].is_global()) owner_[v] = *program.procedure_index(vars_[v].scope);
  }

  std::size_t size() const { return vars_.size(); }
  const VarId& var(int id) const { return vars_[static_cast<std::size_t>(id)]; }
  int ret_slot(int proc) const { return ret_slot_[static_cast<std::size_t>(proc)]; }
  bool is_global(int id) const { return id < global_count_; }
  bool is_hidden(int id) const { return std::find(hidden_.begin(), hidden_.end(), id) != hidden_.end(); }
  // Owning procedure index of a local, -1 for globals.
  int owner(int id) const { return owner_[static_cast<std::size_t>(id)]; }

  std::optional<int> find(const VarId& v) const {
    auto it = index_.find(v.to_string());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> resolve(const ir::Program& program, int proc, const std::string& name) const {
    return find(resolve_variable(program, program.procedures[static_cast<std::size_t>(proc)].name, name));
  }

 private:
  void add(VarId v) {
    auto key = v.to_string();
    if (index_.count(key)) return;
    index_.emplace(key, static_cast<int>(vars_.size()));
    vars_.push_back(std::move(v));
  }

  std::vector<VarId> vars_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> ret_slot_;
  std::vector<int> hidden_;
  std::vector<int> owner_;
  int global_count_ = 0;
};

class TaintResult {
 public:
  using Bits = taint_detail::Bits;

  TaintResult(LocationIndex locations, VarTable vars, std::vector<Bits> before, std::vector<Bits> after,
              std::set<std::string> intrinsic_sources = {})
      : locations_(std::move(locations)),
        vars_(std::move(vars)),
        before_(std::move(before)),
        after_(std::move(after)),
        intrinsic_sources_(std::move(intrinsic_sources)) {}

  bool tainted_before(const Location& loc, const VarId& var) const { return test(before_, loc, var); }
  bool tainted_after(const Location& loc, const VarId& var) const { return test(after_, loc, var); }

  std::vector<VarId> tainted_before(const Location& loc) const { return names(before_[locations_.node_of(loc)]); }
  std::vector<VarId> tainted_after(const Location& loc) const { return names(after_[locations_.node_of(loc)]); }

  // True when no program point carries any taint.
  bool empty() const {
    for (std::size_t n = 0; n < before_.size(); ++n)
      if (before_[n].any() || after_[n].any()) return false;
    return true;
  }

  const VarTable& vars() const { return vars_; }
  const std::set<std::string>& intrinsic_sources() const { return intrinsic_sources_; }
  const Bits& before_node(int node) const { return before_[static_cast<std::size_t>(node)]; }
  const Bits& after_node(int node) const { return after_[static_cast<std::size_t>(node)]; }

 private:
  bool test(const std::vector<Bits>& sets, const Location& loc, const VarId& var) const {
    auto id = vars_.find(var);
    return id && sets[locations_.node_of(loc)].test(*id);
  }
  std::vector<VarId> names(const Bits& bits) const {
    std::vector<VarId> out;
    for (int v = 0; v < static_cast<int>(vars_.size()); ++v)
      if (bits.test(v) && !vars_.is_hidden(v)) out.push_back(vars_.var(v));
    std::sort(out.begin(), out.end());
    return out;
  }

  LocationIndex locations_;
  VarTable vars_;
  std::vector<Bits> before_;
  std::vector<Bits> after_;
  std::set<std::string> intrinsic_sources_;
};

// Least fixpoint of the may-taint equations:
//   * the entry anchor taints the selected entry parameters;
//   * `x = e` taints x iff e mentions a tainted variable, else kills x;
//   * `x = call s(...)` with s an intrinsic source taints x, other
//     intrinsics kill x;
//   * call edges bind tainted actuals to formals and carry globals,
//     return edges carry globals and the callee's return taint to the
//     call's dest, call-to-return edges restore caller locals;
//   * branches, jumps and print/exit are identity.
inline TaintResult taint_analysis(const ir::Program& program, const Icfg& icfg, const TaintSourceSpec& sources) {
  using Bits = taint_detail::Bits;
  VarTable vars(program);
  const std::size_t nv = vars.size();
  const std::size_t nn = icfg.node_count();
  const auto& entry = program.procedures[static_cast<std::size_t>(icfg.entry_proc)];

  Bits seed(nv);
  if (sources.entry_params) {
    for (const auto& p : *sources.entry_params) {
      if (std::find(entry.params.begin(), entry.params.end(), p) == entry.params.end())
        throw Error("taint source '" + p + "' is not a parameter of " + entry.name);
      seed.set(*vars.resolve(program, icfg.entry_proc, p));
    }
  } else {
    for (const auto& p : entry.params) seed.set(*vars.resolve(program, icfg.entry_proc, p));
  }

  Bits globals(nv);
  for (int v = 0; v < static_cast<int>(nv); ++v)
    if (vars.is_global(v)) globals.set(v);
  std::vector<Bits> locals(program.procedures.size(), Bits(nv));
  for (int v = 0; v < static_cast<int>(nv); ++v)
    if (vars.owner(v) >= 0) locals[static_cast<std::size_t>(vars.owner(v))].set(v);

  auto instruction = [&](int node) -> const ir::Instruction& {
    const auto& n = icfg.nodes[static_cast<std::size_t>(node)];
    return program.procedures[n.proc].blocks[n.block].instructions[n.index];
  };
  auto uses_tainted = [&](int proc, const ir::Expr& e, const Bits& in) {
    bool hit = false;
    e.for_each_variable([&](const std::string& name) { hit = hit || in.test(*vars.resolve(program, proc, name)); });
    return hit;
  };

  std::vector<Bits> in(nn, Bits(nv)), out(nn, Bits(nv));

  auto transfer = [&](int node) {
    const auto& n = icfg.nodes[static_cast<std::size_t>(node)];
    Bits result = in[node];
    if (n.kind == IcfgNode::Kind::instruction) {
      const auto& inst = instruction(node);
      if (const auto* a = inst.as<ir::Assign>()) {
        result.assign(*vars.resolve(program, n.proc, a->dest), uses_tainted(n.proc, a->value, in[node]));
      } else if (const auto* c = inst.as<ir::Call>()) {
        if (c->dest && ir::is_intrinsic(c->callee))
          result.assign(*vars.resolve(program, n.proc, *c->dest), sources.intrinsic_sources.count(c->callee) > 0);
      } else if (const auto* r = inst.as<ir::Return>()) {
        result.assign(vars.ret_slot(n.proc), r->value && in[node].test(*vars.resolve(program, n.proc, *r->value)));
      }
    }
    return result;
  };

  // Contribution of edge (from -> to) to in[to].
  auto flow = [&](int from, const IcfgEdge& e) {
    switch (e.kind) {
      case EdgeKind::intra: return out[from];
      case EdgeKind::call_to_return: {
        const auto& n = icfg.nodes[static_cast<std::size_t>(from)];
        Bits result = out[from];
        result.mask(locals[n.proc]);
        if (const auto* c = instruction(from).as<ir::Call>(); c && c->dest)
          result.reset(*vars.resolve(program, n.proc, *c->dest));
        return result;
      }
      case EdgeKind::call: {
        const auto& n = icfg.nodes[static_cast<std::size_t>(from)];
        const auto& call = *instruction(from).as<ir::Call>();
        int callee = icfg.nodes[static_cast<std::size_t>(e.to)].proc;
        Bits result = out[from];
        result.mask(globals);
        const auto& params = program.procedures[callee].params;
        for (std::size_t i = 0; i < params.size() && i < call.args.size(); ++i)
          if (uses_tainted(n.proc, call.args[i], out[from])) result.set(*vars.resolve(program, callee, params[i]));
        return result;
      }
      case EdgeKind::ret: {
        int callee = icfg.nodes[static_cast<std::size_t>(from)].proc;
        const auto& site = icfg.nodes[static_cast<std::size_t>(e.call_site)];
        Bits result = out[from];
        result.mask(globals);
        const auto& call = *instruction(e.call_site).as<ir::Call>();
        if (call.dest && out[from].test(vars.ret_slot(callee)))
          result.set(*vars.resolve(program, site.proc, *call.dest));
        return result;
      }
    }
    return Bits(nv);
  };

  // Points off every valid path from the entry stay empty.
  const auto live = reachable_mask(icfg, icfg.v_en);
  std::deque<int> work;
  std::vector<bool> queued(nn, false);
  for (int v = 0; v < static_cast<int>(nn); ++v)
    if (live[v]) {
      queued[v] = true;
      work.push_back(v);
    }
  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    queued[v] = false;
    Bits next(nv);
    if (v == icfg.v_en) next.merge(seed);
    for (const auto& e : icfg.in[v])
      if (live[e.to]) next.merge(flow(e.to, {v, e.kind, e.call_site}));
    in[v] = std::move(next);
    Bits result = transfer(v);
    if (result == out[v]) continue;
    out[v] = std::move(result);
    for (const auto& e : icfg.out[v])
      if (live[e.to] && !queued[e.to]) {
        queued[e.to] = true;
        work.push_back(e.to);
      }
  }

  // A procedure call's "after" state is the state at its return site.
  std::vector<Bits> after = out;
  for (int v = 0; v < static_cast<int>(nn); ++v)
    for (const auto& e : icfg.out[v])
      if (e.kind == EdgeKind::call_to_return) after[v] = in[e.to];

  return TaintResult(icfg.locations, std::move(vars), std::move(in), std::move(after), sources.intrinsic_sources);
}

inline TaintResult taint_analysis(const ir::Program& program, const TaintSourceSpec& sources) {
  return taint_analysis(program, build_icfg(program), sources);
}

// ---------------------------------------------------------------------------
// Configuration-hosting blocks and variables

struct HostingBlock {
  std::string procedure;
  std::string block;
  // Recorded assignment sites in this block, ascending by index.
  std::vector<Location> assignments;
};

struct HostingSet {
  std::vector<HostingBlock> v_host;  // program order
  std::set<VarId> c_host;

  bool empty() const { return v_host.empty(); }
};

// A local materializing a branch condition: defined once and used only as
// the condition of its own block's branch. Such temporaries are the IR's
// spelling of `if (expr)` and are never configuration-hosting.
inline std::set<std::string> condition_temporaries(const ir::Program& program, const ir::Procedure& proc) {
  std::unordered_map<std::string, int> defs, uses;
  std::unordered_map<std::string, std::size_t> def_block;
  for (std::size_t b = 0; b < proc.blocks.size(); ++b)
    for (const auto& inst : proc.blocks[b].instructions) {
      if (const auto* w = inst.written_variable()) {
        ++defs[*w];
        def_block[*w] = b;
      }
      inst.for_each_used_variable([&](const std::string& name) { ++uses[name]; });
    }
  std::set<std::string> out;
  for (const auto& [name, count] : defs) {
    if (count != 1 || uses[name] != 1 || program.is_global(name)) continue;
    if (std::find(proc.params.begin(), proc.params.end(), name) != proc.params.end()) continue;
    const auto* term = proc.blocks[def_block[name]].terminator();
    const auto* br = term ? term->as<ir::Branch>() : nullptr;
    if (br && br->condition == name) out.insert(name);
  }
  return out;
}

// A block enters V_host when one of its assignments (a) is flow dependent
// on a taint source, or (b) the block is directly control dependent on a
// branch whose condition is tainted; in case (b) every assignment in the
// block is recorded. `cdeps[p]` is the control dependence of procedure p's
// block graph.
inline HostingSet hosting_set(const ir::Program& program, const TaintResult& taint,
                              const std::vector<graph::ControlDependence>& cdeps) {
  HostingSet out;
  for (std::size_t p = 0; p < program.procedures.size(); ++p) {
    const auto& proc = program.procedures[p];
    auto temps = condition_temporaries(program, proc);
    auto var_of = [&](const std::string& name) { return resolve_variable(program, proc.name, name); };
    auto hosts = [&](const std::string* w) { return w && !temps.count(*w); };

    for (std::size_t b = 0; b < proc.blocks.size(); ++b) {
      const auto& block = proc.blocks[b];
      std::set<std::size_t> recorded;

      bool tainted_guard = false;
      for (const auto& dep : cdeps[p].deps[b]) {
        const auto& guard = proc.blocks[static_cast<std::size_t>(dep.branch)];
        const auto* br = guard.instructions.back().as<ir::Branch>();
        if (!br) continue;
        Location at{proc.name, guard.label, guard.instructions.size() - 1};
        if (taint.tainted_before(at, var_of(br->condition))) tainted_guard = true;
      }

      for (std::size_t i = 0; i < block.instructions.size(); ++i) {
        const auto& inst = block.instructions[i];
        const auto* w = inst.written_variable();
        if (!hosts(w)) continue;
        Location at{proc.name, block.label, i};
        bool flow = false;
        if (const auto* a = inst.as<ir::Assign>()) {
          a->value.for_each_variable(
              [&](const std::string& name) { flow = flow || taint.tainted_before(at, var_of(name)); });
        } else if (const auto* c = inst.as<ir::Call>()) {
          // A source call hosts even where no taint flows (dead code).
          flow = taint.intrinsic_sources().count(c->callee) > 0 || taint.tainted_after(at, var_of(*c->dest));
        }
        if (flow || tainted_guard) recorded.insert(i);
      }

      if (recorded.empty()) continue;
      HostingBlock hb{proc.name, block.label, {}};
      for (auto i : recorded) {
        hb.assignments.push_back({proc.name, block.label, i});
        out.c_host.insert(var_of(*block.instructions[i].written_variable()));
      }
      out.v_host.push_back(std::move(hb));
    }
  }
  return out;
}

}  // namespace neck
