#pragma once

// Imperative mini-IR: programs, procedures, basic blocks and instructions,
// plus structural validation and definition-site queries.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace neck {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source position of a parsed construct. Positions are diagnostic metadata
// only, so any two positions compare equal and never affect structural
// equality of IR values.
struct SourcePos {
  int line = 0;
  int column = 0;

  friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

namespace ir {

enum class BinaryOp { add, sub, mul, eq, ne, lt, gt, index };

inline constexpr std::array<std::pair<BinaryOp, std::string_view>, 8> kBinaryOpNames{{
    {BinaryOp::add, "add"},
    {BinaryOp::sub, "sub"},
    {BinaryOp::mul, "mul"},
    {BinaryOp::eq, "eq"},
    {BinaryOp::ne, "ne"},
    {BinaryOp::lt, "lt"},
    {BinaryOp::gt, "gt"},
    {BinaryOp::index, "index"},
}};

inline std::string_view to_string(BinaryOp op) {
  for (const auto& [value, name] : kBinaryOpNames)
    if (value == op) return name;
  return "?";
}

inline std::optional<BinaryOp> binary_op_from_string(std::string_view name) {
  for (const auto& [value, text] : kBinaryOpNames)
    if (text == name) return value;
  return std::nullopt;
}

struct Expr {
  enum class Kind { integer, string, variable, binary };

  Kind kind = Kind::integer;
  std::int64_t integer_value = 0;
  // String literal contents or variable name.
  std::string text;
  BinaryOp op = BinaryOp::add;
  // Exactly two operands when kind == binary.
  std::vector<Expr> operands;

  static Expr integer(std::int64_t v) {
    Expr e;
    e.kind = Kind::integer;
    e.integer_value = v;
    return e;
  }
  static Expr string(std::string s) {
    Expr e;
    e.kind = Kind::string;
    e.text = std::move(s);
    return e;
  }
  static Expr var(std::string name) {
    Expr e;
    e.kind = Kind::variable;
    e.text = std::move(name);
    return e;
  }
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Kind::binary;
    e.op = op;
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
  }

  template <typename Fn>
  void for_each_variable(Fn&& fn) const {
    if (kind == Kind::variable) {
      fn(text);
    } else if (kind == Kind::binary) {
      for (const auto& operand : operands) operand.for_each_variable(fn);
    }
  }

  bool operator==(const Expr&) const = default;
};

struct Assign {
  std::string dest;
  Expr value;
  bool operator==(const Assign&) const = default;
};

struct Call {
  std::string callee;
  std::vector<Expr> args;
  std::optional<std::string> dest;
  bool operator==(const Call&) const = default;
};

struct Branch {
  std::string condition;
  std::string if_true;
  std::string if_false;
  bool operator==(const Branch&) const = default;
};

struct Jump {
  std::string target;
  bool operator==(const Jump&) const = default;
};

struct Return {
  std::optional<std::string> value;
  bool operator==(const Return&) const = default;
};

struct Instruction {
  using Op = std::variant<Assign, Call, Branch, Jump, Return>;
  Op op;
  SourcePos pos;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&op);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(op);
  }
  bool is_terminator() const { return is<Branch>() || is<Jump>() || is<Return>(); }

  // Variable written by Assign or Call-with-dest; nullptr otherwise.
  const std::string* written_variable() const {
    if (const auto* a = as<Assign>()) return &a->dest;
    if (const auto* c = as<Call>(); c && c->dest) return &*c->dest;
    return nullptr;
  }

  template <typename Fn>
  void for_each_used_variable(Fn&& fn) const {
    std::visit(
        [&](const auto& i) {
          using T = std::decay_t<decltype(i)>;
          if constexpr (std::is_same_v<T, Assign>) {
            i.value.for_each_variable(fn);
          } else if constexpr (std::is_same_v<T, Call>) {
            for (const auto& arg : i.args) arg.for_each_variable(fn);
          } else if constexpr (std::is_same_v<T, Branch>) {
            fn(i.condition);
          } else if constexpr (std::is_same_v<T, Return>) {
            if (i.value) fn(*i.value);
          }
        },
        op);
  }

  bool operator==(const Instruction&) const = default;
};

struct BasicBlock {
  std::string label;
  std::vector<Instruction> instructions;
  SourcePos pos;

  const Instruction* terminator() const {
    if (instructions.empty() || !instructions.back().is_terminator()) return nullptr;
    return &instructions.back();
  }

  bool operator==(const BasicBlock&) const = default;
};

struct Procedure {
  std::string name;
  std::vector<std::string> params;
  std::vector<BasicBlock> blocks;
  SourcePos pos;

  const std::string& entry_block() const { return blocks.front().label; }

  std::optional<std::size_t> block_index(std::string_view label) const {
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (blocks[i].label == label) return i;
    return std::nullopt;
  }

  bool operator==(const Procedure&) const = default;
};

struct Program {
  std::vector<std::string> globals;
  std::vector<Procedure> procedures;
  std::string entry_name = "main";

  const Procedure* find_procedure(std::string_view name) const {
    for (const auto& p : procedures)
      if (p.name == name) return &p;
    return nullptr;
  }
  std::optional<std::size_t> procedure_index(std::string_view name) const {
    for (std::size_t i = 0; i < procedures.size(); ++i)
      if (procedures[i].name == name) return i;
    return std::nullopt;
  }
  const Procedure& entry() const {
    if (const auto* p = find_procedure(entry_name)) return *p;
    throw Error("no entry procedure '" + entry_name + "'");
  }
  bool is_global(std::string_view name) const {
    return std::find(globals.begin(), globals.end(), name) != globals.end();
  }

  bool operator==(const Program&) const = default;
};

inline constexpr std::array<std::string_view, 3> kIntrinsics{"readcfg", "print", "exit"};

inline bool is_intrinsic(std::string_view name) {
  return std::find(kIntrinsics.begin(), kIntrinsics.end(), name) != kIntrinsics.end();
}

inline bool calls_exit(const BasicBlock& block) {
  return std::any_of(block.instructions.begin(), block.instructions.end(), [](const Instruction& i) {
    const auto* call = i.as<Call>();
    return call && call->callee == "exit";
  });
}

}  // namespace ir

struct Location {
  std::string procedure;
  std::string block;
  std::size_t index = 0;

  auto operator<=>(const Location&) const = default;

  std::string to_string() const { return procedure + "/" + block + "/" + std::to_string(index); }
};

// A variable: globals carry an empty scope, locals are scoped to their
// procedure.
struct VarId {
  std::string scope;
  std::string name;

  static VarId global(std::string name) { return {{}, std::move(name)}; }
  static VarId local(std::string proc, std::string name) { return {std::move(proc), std::move(name)}; }

  bool is_global() const { return scope.empty(); }
  std::string to_string() const { return is_global() ? name : scope + "::" + name; }

  auto operator<=>(const VarId&) const = default;
};

inline VarId resolve_variable(const ir::Program& program, std::string_view proc, std::string_view name) {
  if (program.is_global(name)) return VarId::global(std::string(name));
  return VarId::local(std::string(proc), std::string(name));
}

struct Diagnostic {
  std::optional<Location> location;
  SourcePos pos;
  std::string message;

  std::string to_string(std::string_view origin = "<memory>") const {
    std::string out(origin);
    if (pos.line > 0) out += ":" + std::to_string(pos.line) + ":" + std::to_string(pos.column);
    out += ": ";
    if (location) out += location->to_string() + ": ";
    return out + message;
  }

  bool operator==(const Diagnostic& o) const { return location == o.location && message == o.message; }
};

namespace ir {

namespace detail {

template <typename Fn>
void for_each_target_label(const Instruction& inst, Fn&& fn) {
  if (const auto* br = inst.as<Branch>()) {
    fn(br->if_true);
    fn(br->if_false);
  } else if (const auto* j = inst.as<Jump>()) {
    fn(j->target);
  }
}

inline void validate_procedure(const Program& program, const Procedure& proc, std::vector<Diagnostic>& out) {
  auto report = [&](std::optional<Location> loc, SourcePos pos, std::string msg) {
    out.push_back({std::move(loc), pos, std::move(msg)});
  };

  if (proc.blocks.empty()) {
    report(std::nullopt, proc.pos, "procedure '" + proc.name + "' has no blocks");
    return;
  }

  std::unordered_set<std::string> seen_params;
  for (const auto& p : proc.params) {
    if (!seen_params.insert(p).second) report(std::nullopt, proc.pos, "duplicate parameter " + p);
    if (program.is_global(p)) report(std::nullopt, proc.pos, "parameter " + p + " shadows a global");
  }

  std::unordered_set<std::string> labels;
  for (const auto& block : proc.blocks) {
    if (!labels.insert(block.label).second)
      report(Location{proc.name, block.label, 0}, block.pos, "duplicate block label " + block.label);
  }

  std::unordered_set<std::string> assigned;
  for (const auto& block : proc.blocks)
    for (const auto& inst : block.instructions)
      if (const auto* w = inst.written_variable()) assigned.insert(*w);

  for (const auto& block : proc.blocks) {
    if (block.instructions.empty()) {
      report(Location{proc.name, block.label, 0}, block.pos, "empty block");
      continue;
    }
    for (std::size_t i = 0; i < block.instructions.size(); ++i) {
      const auto& inst = block.instructions[i];
      Location loc{proc.name, block.label, i};
      bool last = i + 1 == block.instructions.size();
      if (inst.is_terminator() && !last) report(loc, inst.pos, "instruction after terminator");
      if (!inst.is_terminator() && last) report(loc, inst.pos, "missing terminator");

      for_each_target_label(inst, [&](const std::string& target) {
        if (!labels.count(target)) report(loc, inst.pos, "unknown target " + target);
      });

      if (const auto* call = inst.as<Call>()) {
        if (const auto* callee = program.find_procedure(call->callee)) {
          if (callee->params.size() != call->args.size())
            report(loc, inst.pos,
                   "call to " + call->callee + " passes " + std::to_string(call->args.size()) +
                       " arguments, expected " + std::to_string(callee->params.size()));
        } else if (!is_intrinsic(call->callee)) {
          report(loc, inst.pos, "unknown callee " + call->callee);
        }
      }

      std::set<std::string> free_names;
      inst.for_each_used_variable([&](const std::string& name) {
        if (!program.is_global(name) && !seen_params.count(name) && !assigned.count(name))
          free_names.insert(name);
      });
      for (const auto& name : free_names) report(loc, inst.pos, "undeclared variable " + name);
    }
  }
}

}  // namespace detail

// Structural validation. Diagnostics come out in program order, so the
// result is deterministic for a given Program.
inline std::vector<Diagnostic> validate(const Program& program) {
  std::vector<Diagnostic> out;

  std::unordered_set<std::string> globals;
  for (const auto& g : program.globals)
    if (!globals.insert(g).second) out.push_back({std::nullopt, {}, "duplicate global " + g});

  std::unordered_set<std::string> names;
  for (const auto& proc : program.procedures) {
    if (!names.insert(proc.name).second)
      out.push_back({std::nullopt, proc.pos, "duplicate procedure " + proc.name});
    if (is_intrinsic(proc.name))
      out.push_back({std::nullopt, proc.pos, "procedure " + proc.name + " shadows an intrinsic"});
  }
  if (!names.count(program.entry_name)) out.push_back({std::nullopt, {}, "no entry procedure"});

  for (const auto& proc : program.procedures) detail::validate_procedure(program, proc, out);
  return out;
}

inline bool is_declared(const Program& program, const VarId& var) {
  if (var.is_global()) return program.is_global(var.name);
  const auto* proc = program.find_procedure(var.scope);
  if (!proc || program.is_global(var.name)) return false;
  if (std::find(proc->params.begin(), proc->params.end(), var.name) != proc->params.end()) return true;
  for (const auto& block : proc->blocks)
    for (const auto& inst : block.instructions)
      if (const auto* w = inst.written_variable(); w && *w == var.name) return true;
  return false;
}

// Every Assign / Call-with-dest writing `var`, in program order.
inline std::vector<Location> defs_of(const Program& program, const VarId& var) {
  if (!is_declared(program, var)) throw Error("undeclared variable " + var.to_string());
  std::vector<Location> out;
  for (const auto& proc : program.procedures) {
    if (!var.is_global() && proc.name != var.scope) continue;
    for (const auto& block : proc.blocks)
      for (std::size_t i = 0; i < block.instructions.size(); ++i)
        if (const auto* w = block.instructions[i].written_variable(); w && *w == var.name)
          out.push_back({proc.name, block.label, i});
  }
  return out;
}

inline const Instruction& instruction_at(const Program& program, const Location& loc) {
  const auto* proc = program.find_procedure(loc.procedure);
  if (!proc) throw Error("unknown procedure " + loc.procedure);
  auto b = proc->block_index(loc.block);
  if (!b || loc.index >= proc->blocks[*b].instructions.size()) throw Error("no instruction at " + loc.to_string());
  return proc->blocks[*b].instructions[loc.index];
}

}  // namespace ir
}  // namespace neck
