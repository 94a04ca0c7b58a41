#pragma once

// Textual mini-IR (.mir): line-oriented, `#` comments, one instruction per
// line.
//
//   global <name>
//   proc <name>(<p1>, <p2>, ...) {
//   <label>:
//     x = <expr> | call f(a, ...) | x = call f(a, ...)
//     br <var> <then> <else> | jmp <label> | ret | ret <var>
//   }
//
// <expr> is an integer, a double-quoted string, a variable, or
// <op>(<expr>, <expr>) with op in {add, sub, mul, eq, ne, lt, gt, index}.

#include <cctype>
#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "neck/ir.hpp"

namespace neck {

struct SourceText {
  std::string content;
  std::string origin = "<memory>";
};

class ParseError : public Error {
 public:
  ParseError(std::string origin, std::vector<Diagnostic> diagnostics)
      : Error(render(origin, diagnostics)), origin_(std::move(origin)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  const std::string& origin() const { return origin_; }

 private:
  static std::string render(const std::string& origin, const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
      if (!out.empty()) out += '\n';
      out += d.to_string(origin);
    }
    return out;
  }

  std::string origin_;
  std::vector<Diagnostic> diagnostics_;
};

struct ParseOptions {
  std::string entry_name = "main";
};

namespace parser_detail {

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

inline bool is_keyword(std::string_view word) {
  return word == "global" || word == "proc" || word == "call" || word == "br" || word == "jmp" || word == "ret";
}

struct SyntaxError {
  int column;
  std::string message;
};

// Cursor over one line with comments already removed.
class LineCursor {
 public:
  LineCursor(std::string_view text, int line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  int column() const { return static_cast<int>(pos_) + 1; }
  int line() const { return line_; }

  [[noreturn]] void fail(std::string message) const { throw SyntaxError{column(), std::move(message)}; }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool peek_identifier() {
    skip_ws();
    return pos_ < text_.size() && is_ident_start(text_[pos_]);
  }
  std::string identifier(std::string_view what = "identifier") {
    skip_ws();
    if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) fail("expected " + std::string(what));
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }
  std::string name(std::string_view what) {
    int col = (skip_ws(), column());
    auto id = identifier(what);
    if (is_keyword(id)) throw SyntaxError{col, "keyword '" + id + "' cannot be used as " + std::string(what)};
    return id;
  }

  ir::Expr expr() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected expression");
    char c = text_[pos_];
    if (c == '"') return ir::Expr::string(string_literal());
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return ir::Expr::integer(integer());
    int col = column();
    auto id = name("expression");
    if (accept('(')) {
      auto op = ir::binary_op_from_string(id);
      if (!op) throw SyntaxError{col, "unknown operator " + id};
      auto lhs = expr();
      if (!accept(','))
        fail("operator " + id + " takes two operands");
      auto rhs = expr();
      if (!accept(')')) fail("operator " + id + " takes two operands");
      return ir::Expr::binary(*op, std::move(lhs), std::move(rhs));
    }
    return ir::Expr::var(std::move(id));
  }

  std::vector<ir::Expr> argument_list() {
    expect('(');
    std::vector<ir::Expr> args;
    if (accept(')')) return args;
    do {
      args.push_back(expr());
    } while (accept(','));
    expect(')');
    return args;
  }

  std::string rest() const { return std::string(text_.substr(pos_)); }

 private:
  std::int64_t integer() {
    std::size_t start = pos_;
    if (text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed integer literal");
    }
    return value;
  }

  std::string string_literal() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) break;
        char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    if (pos_ >= text_.size()) fail("unterminated string literal");
    ++pos_;
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
};

// Drops a `#` comment that is not inside a string literal.
inline std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

inline ir::Instruction parse_instruction(LineCursor& cur) {
  SourcePos pos{cur.line(), (cur.skip_ws(), cur.column())};
  auto word = cur.identifier("instruction");
  ir::Instruction inst;
  inst.pos = pos;
  if (word == "br") {
    ir::Branch br;
    br.condition = cur.name("branch condition variable");
    br.if_true = cur.name("label");
    br.if_false = cur.name("label");
    inst.op = std::move(br);
  } else if (word == "jmp") {
    inst.op = ir::Jump{cur.name("label")};
  } else if (word == "ret") {
    ir::Return r;
    if (!cur.at_end()) r.value = cur.name("return variable");
    inst.op = std::move(r);
  } else if (word == "call") {
    ir::Call call;
    call.callee = cur.name("callee");
    call.args = cur.argument_list();
    inst.op = std::move(call);
  } else {
    if (is_keyword(word)) cur.fail("unexpected keyword " + word);
    if (!cur.accept('=')) cur.fail("expected '=' after " + word);
    if (cur.peek_identifier()) {
      LineCursor probe = cur;
      if (probe.identifier() == "call") {
        cur = probe;
        ir::Call call;
        call.callee = cur.name("callee");
        call.args = cur.argument_list();
        call.dest = word;
        inst.op = std::move(call);
        if (!cur.at_end()) cur.fail("unexpected text after instruction");
        return inst;
      }
    }
    inst.op = ir::Assign{word, cur.expr()};
  }
  if (!cur.at_end()) cur.fail("unexpected text after instruction");
  return inst;
}

}  // namespace parser_detail

// Parses `.mir` text into a validated Program. Throws ParseError carrying
// either one syntax diagnostic or the validation diagnostics.
inline ir::Program parse(const SourceText& text, const ParseOptions& options = {}) {
  using namespace parser_detail;
  ir::Program program;
  program.entry_name = options.entry_name;

  ir::Procedure* proc = nullptr;
  std::istringstream in(text.content);
  std::string raw;
  int line_no = 0;

  auto syntax = [&](int column, std::string message) {
    Diagnostic d;
    d.pos = {line_no, column};
    d.message = "syntax error: " + std::move(message);
    return ParseError(text.origin, {d});
  };

  try {
    while (std::getline(in, raw)) {
      ++line_no;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      auto body = strip_comment(raw);
      LineCursor cur(body, line_no);
      if (cur.at_end()) continue;

      if (!proc) {
        SourcePos pos{line_no, cur.column()};
        auto word = cur.identifier("'global' or 'proc'");
        if (word == "global") {
          program.globals.push_back(cur.name("global name"));
          if (!cur.at_end()) cur.fail("unexpected text after global declaration");
        } else if (word == "proc") {
          ir::Procedure p;
          p.pos = pos;
          p.name = cur.name("procedure name");
          cur.expect('(');
          if (!cur.accept(')')) {
            do {
              p.params.push_back(cur.name("parameter name"));
            } while (cur.accept(','));
            cur.expect(')');
          }
          cur.expect('{');
          if (!cur.at_end()) cur.fail("unexpected text after '{'");
          program.procedures.push_back(std::move(p));
          proc = &program.procedures.back();
        } else {
          cur.fail("expected 'global' or 'proc', found '" + word + "'");
        }
        continue;
      }

      if (cur.accept('}')) {
        if (!cur.at_end()) cur.fail("unexpected text after '}'");
        proc = nullptr;
        continue;
      }

      // Label line: identifier followed by ':' and nothing else.
      {
        LineCursor probe = cur;
        if (probe.peek_identifier()) {
          int col = probe.column();
          auto id = probe.identifier();
          if (probe.accept(':')) {
            if (is_keyword(id)) throw SyntaxError{col, "keyword '" + id + "' cannot be used as label"};
            if (!probe.at_end()) probe.fail("unexpected text after label");
            ir::BasicBlock block;
            block.label = id;
            block.pos = {line_no, col};
            proc->blocks.push_back(std::move(block));
            continue;
          }
        }
      }

      if (proc->blocks.empty()) cur.fail("instruction before first block label");
      proc->blocks.back().instructions.push_back(parse_instruction(cur));
    }
  } catch (const SyntaxError& e) {
    throw syntax(e.column, e.message);
  }

  if (proc) {
    Diagnostic d;
    d.pos = {line_no, 1};
    d.message = "syntax error: unterminated procedure " + proc->name;
    throw ParseError(text.origin, {d});
  }

  if (auto diags = ir::validate(program); !diags.empty()) throw ParseError(text.origin, std::move(diags));
  return program;
}

namespace parser_detail {

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out + '"';
}

inline std::string render(const ir::Expr& e) {
  switch (e.kind) {
    case ir::Expr::Kind::integer: return std::to_string(e.integer_value);
    case ir::Expr::Kind::string: return quote(e.text);
    case ir::Expr::Kind::variable: return e.text;
    case ir::Expr::Kind::binary:
      return std::string(ir::to_string(e.op)) + "(" + render(e.operands[0]) + ", " + render(e.operands[1]) + ")";
  }
  return {};
}

inline std::string render_call(const ir::Call& c) {
  std::string out = "call " + c.callee + "(";
  for (std::size_t i = 0; i < c.args.size(); ++i) out += (i ? ", " : "") + render(c.args[i]);
  return out + ")";
}

}  // namespace parser_detail

inline std::string render_instruction(const ir::Instruction& inst) {
  using namespace parser_detail;
  return std::visit(
      [](const auto& i) -> std::string {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, ir::Assign>) {
          return i.dest + " = " + render(i.value);
        } else if constexpr (std::is_same_v<T, ir::Call>) {
          return (i.dest ? *i.dest + " = " : std::string()) + render_call(i);
        } else if constexpr (std::is_same_v<T, ir::Branch>) {
          return "br " + i.condition + " " + i.if_true + " " + i.if_false;
        } else if constexpr (std::is_same_v<T, ir::Jump>) {
          return "jmp " + i.target;
        } else {
          return i.value ? "ret " + *i.value : std::string("ret");
        }
      },
      inst.op);
}

// Canonical text for a program. `before_block` may return a line to place
// immediately before a block's label (used for annotation).
template <typename BeforeBlock>
std::string emit_with(const ir::Program& program, BeforeBlock&& before_block) {
  std::string out;
  for (const auto& g : program.globals) out += "global " + g + "\n";
  for (const auto& proc : program.procedures) {
    if (!out.empty()) out += "\n";
    out += "proc " + proc.name + "(";
    for (std::size_t i = 0; i < proc.params.size(); ++i) out += (i ? ", " : "") + proc.params[i];
    out += ") {\n";
    for (const auto& block : proc.blocks) {
      if (auto extra = before_block(proc, block); !extra.empty()) out += extra + "\n";
      out += block.label + ":\n";
      for (const auto& inst : block.instructions) out += "  " + render_instruction(inst) + "\n";
    }
    out += "}\n";
  }
  return out;
}

inline SourceText emit(const ir::Program& program) {
  if (auto diags = ir::validate(program); !diags.empty()) throw ParseError("<memory>", std::move(diags));
  return {emit_with(program, [](const ir::Procedure&, const ir::BasicBlock&) { return std::string(); }), "<memory>"};
}

}  // namespace neck
