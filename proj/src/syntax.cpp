#include "wr/syntax.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace wr {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

namespace {

bool IdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::optional<Value> ToValue(std::string_view digits) {
  Value v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return v;
}

struct Token {
  enum class Kind { kIdent, kInt, kSym, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> Run() {
    std::vector<Token> out;
    while (true) {
      SkipSpace();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (IdentStart(c)) {
        t.kind = Token::Kind::kIdent;
        while (pos_ < text_.size() && IdentChar(text_[pos_])) t.text += Advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Token::Kind::kInt;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          t.text += Advance();
        }
      } else {
        t.kind = Token::Kind::kSym;
        static const char* kTwo[] = {":=", "==", "!=", "&&", "||"};
        bool matched = false;
        for (const char* two : kTwo) {
          if (text_.substr(pos_, 2) == two) {
            t.text = two;
            Advance();
            Advance();
            matched = true;
            break;
          }
        }
        if (!matched) {
          if (std::string_view("(){};+-*<").find(c) == std::string_view::npos) {
            throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
          }
          t.text = std::string(1, Advance());
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char Advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void SkipSpace() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        Advance();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') Advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::map<std::string, BinOp>& Operators() {
  static const std::map<std::string, BinOp> ops = {
      {"+", BinOp::kAdd}, {"-", BinOp::kSub},  {"*", BinOp::kMul},  {"==", BinOp::kEq},
      {"!=", BinOp::kNe}, {"<", BinOp::kLt},   {"&&", BinOp::kAnd}, {"||", BinOp::kOr},
  };
  return ops;
}

bool IsKeyword(const std::string& s) {
  return s == "skip" || s == "if" || s == "else" || s == "while" || s == "acquire" ||
         s == "release";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ExprPtr Expr() {
    const Token& t = Peek();
    if (t.kind == Token::Kind::kInt) return MakeConst(Int(Next().text, t));
    if (t.kind == Token::Kind::kSym && t.text == "-") {
      Token minus = Next();
      const Token& digits = Peek();
      if (digits.kind != Token::Kind::kInt || digits.line != minus.line ||
          digits.col != minus.col + 1) {
        throw ParseError(minus.line, minus.col, "expected a number after '-'");
      }
      return MakeConst(Int("-" + Next().text, minus));
    }
    if (t.kind == Token::Kind::kIdent) {
      if (IsKeyword(t.text)) throw Error(t, "expected an expression, found '" + t.text + "'");
      return MakeVar(Var::Intern(Next().text));
    }
    if (t.kind == Token::Kind::kSym && t.text == "(") {
      Next();
      ExprPtr lhs = Expr();
      const Token& op = Peek();
      auto it = Operators().find(op.text);
      if (op.kind != Token::Kind::kSym || it == Operators().end()) {
        throw Error(op, "expected a binary operator");
      }
      Next();
      ExprPtr rhs = Expr();
      Expect(")");
      return MakeBinary(it->second, std::move(lhs), std::move(rhs));
    }
    throw Error(t, "expected an expression");
  }

  CmdPtr Program(bool nested) {
    std::vector<CmdPtr> stmts;
    while (true) {
      const Token& t = Peek();
      if (nested && t.kind == Token::Kind::kEnd) throw Error(t, "missing '}' before end of input");
      if (t.kind == Token::Kind::kEnd || (t.kind == Token::Kind::kSym && t.text == "}")) break;
      stmts.push_back(Stmt());
    }
    if (stmts.empty()) throw Error(Peek(), nested ? "empty block" : "empty program");
    return MakeBlock(std::move(stmts));
  }

  void ExpectEnd() {
    if (Peek().kind != Token::Kind::kEnd) throw Error(Peek(), "unexpected '" + Peek().text + "'");
  }

 private:
  CmdPtr Stmt() {
    const Token& t = Peek();
    if (t.kind != Token::Kind::kIdent) throw Error(t, "expected a statement");
    if (t.text == "skip") {
      Next();
      Expect(";");
      return MakeSkip();
    }
    if (t.text == "if") {
      Next();
      ExprPtr cond = Expr();
      CmdPtr then_branch = Block();
      const Token& e = Peek();
      if (e.kind != Token::Kind::kIdent || e.text != "else") throw Error(e, "expected 'else'");
      Next();
      CmdPtr else_branch = Block();
      return MakeIf(std::move(cond), std::move(then_branch), std::move(else_branch));
    }
    if (t.text == "while") {
      Next();
      ExprPtr cond = Expr();
      return MakeWhile(std::move(cond), Block());
    }
    if (t.text == "acquire" || t.text == "release") {
      bool acquire = Next().text == "acquire";
      const Token& name = Peek();
      if (name.kind != Token::Kind::kIdent || IsKeyword(name.text)) {
        throw Error(name, "expected a lock name");
      }
      Var lock = Var::Intern(Next().text);
      Expect(";");
      return acquire ? MakeLockAcq(lock) : MakeLockRel(lock);
    }
    if (IsKeyword(t.text)) throw Error(t, "unexpected '" + t.text + "'");
    Var target = Var::Intern(Next().text);
    Expect(":=");
    ExprPtr e = Expr();
    Expect(";");
    return MakeAssign(target, std::move(e));
  }

  CmdPtr Block() {
    Expect("{");
    CmdPtr body = Program(true);
    Expect("}");
    return body;
  }

  Value Int(const std::string& text, const Token& at) {
    auto v = ToValue(text);
    if (!v) throw Error(at, "integer '" + text + "' out of range");
    return *v;
  }

  void Expect(const char* sym) {
    const Token& t = Peek();
    if (t.kind != Token::Kind::kSym || t.text != sym) {
      std::string found = t.kind == Token::Kind::kEnd ? "end of input" : "'" + t.text + "'";
      throw Error(t, std::string("expected '") + sym + "', found " + found);
    }
    Next();
  }

  static ParseError Error(const Token& t, const std::string& msg) {
    return ParseError(t.line, t.col, msg);
  }

  const Token& Peek() const { return tokens_[pos_]; }
  Token Next() {
    Token t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> Words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

std::string_view StripComment(std::string_view line, char mark) {
  std::size_t at = line.find(mark);
  return at == std::string_view::npos ? line : line.substr(0, at);
}

std::optional<Label> LabelWord(std::string_view w) {
  if (w.size() < 2 || w[0] != 'L') return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(w.data() + 1, w.data() + w.size(), v);
  if (ec != std::errc() || ptr != w.data() + w.size() || v > 0xffffffffULL) return std::nullopt;
  return static_cast<Label>(v);
}

std::optional<Reg> RegWord(std::string_view w) {
  if (w.size() < 2 || w[0] != 'r') return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(w.data() + 1, w.data() + w.size(), v);
  if (ec != std::errc() || ptr != w.data() + w.size() || v > 0xffffffffULL) return std::nullopt;
  return static_cast<Reg>(v);
}

bool IdentWord(std::string_view w) {
  if (w.empty() || !IdentStart(w[0])) return false;
  for (char c : w) {
    if (!IdentChar(c)) return false;
  }
  return true;
}

}  // namespace

ExprPtr ParseExpr(std::string_view text) {
  Parser p(Lexer(text).Run());
  ExprPtr e = p.Expr();
  p.ExpectEnd();
  return e;
}

CmdPtr ParseProgram(std::string_view text) {
  Parser p(Lexer(text).Run());
  CmdPtr c = p.Program(false);
  p.ExpectEnd();
  return c;
}

Instruction ParseInstruction(std::string_view line, int line_no) {
  std::vector<std::string_view> w = Words(line);
  auto fail = [&](const std::string& msg) { return ParseError(line_no, 1, msg); };
  if (w.empty()) throw fail("empty instruction");
  Instruction ins;
  std::size_t i = 0;
  if (w[0].back() == ':') {
    auto l = LabelWord(w[0].substr(0, w[0].size() - 1));
    if (!l) throw fail("bad label '" + std::string(w[0]) + "'");
    ins.label = *l;
    ++i;
  }
  if (i >= w.size()) throw fail("missing opcode");
  std::string op(w[i]);
  std::vector<std::string_view> args(w.begin() + static_cast<long>(i) + 1, w.end());
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw fail(op + " takes " + std::to_string(n) + " operand" + (n == 1 ? "" : "s"));
    }
  };
  auto reg = [&](std::string_view s) {
    auto r = RegWord(s);
    if (!r) throw fail("bad register '" + std::string(s) + "'");
    return *r;
  };
  auto label = [&](std::string_view s) {
    auto l = LabelWord(s);
    if (!l) throw fail("bad label '" + std::string(s) + "'");
    return *l;
  };
  auto var = [&](std::string_view s) {
    if (!IdentWord(s)) throw fail("bad variable '" + std::string(s) + "'");
    return Var::Intern(s);
  };
  if (op == "LOAD") {
    need(2);
    ins.body = Instr::Load{reg(args[0]), var(args[1])};
  } else if (op == "STORE") {
    need(2);
    ins.body = Instr::Store{var(args[0]), reg(args[1])};
  } else if (op == "JMP") {
    need(1);
    ins.body = Instr::Jmp{label(args[0])};
  } else if (op == "JZ") {
    need(2);
    ins.body = Instr::Jz{label(args[0]), reg(args[1])};
  } else if (op == "NOP") {
    need(0);
    ins.body = Instr::Nop{};
  } else if (op == "MOVEK") {
    need(2);
    auto v = ToValue(args[1]);
    if (!v) throw fail("bad constant '" + std::string(args[1]) + "'");
    ins.body = Instr::MoveK{reg(args[0]), *v};
  } else if (op == "MOVER") {
    need(2);
    ins.body = Instr::MoveR{reg(args[0]), reg(args[1])};
  } else if (op == "OP") {
    need(3);
    auto it = Operators().find(std::string(args[0]));
    if (it == Operators().end()) throw fail("bad operator '" + std::string(args[0]) + "'");
    ins.body = Instr::Op{it->second, reg(args[1]), reg(args[2])};
  } else if (op == "LOCKACQ") {
    need(1);
    ins.body = Instr::LockAcq{var(args[0])};
  } else if (op == "LOCKREL") {
    need(1);
    ins.body = Instr::LockRel{var(args[0])};
  } else {
    throw fail("unknown opcode '" + op + "'");
  }
  return ins;
}

Program ParseAsm(std::string_view text) {
  Program p;
  int line_no = 0;
  for (std::string_view raw : Lines(text)) {
    ++line_no;
    std::string_view line = StripComment(raw, ';');
    std::vector<std::string_view> w = Words(line);
    if (w.empty()) continue;
    if (p.exit_label) throw ParseError(line_no, 1, "instruction after the exit label");
    if (w.size() == 1 && w[0].back() == ':') {
      auto l = LabelWord(w[0].substr(0, w[0].size() - 1));
      if (!l) throw ParseError(line_no, 1, "bad label '" + std::string(w[0]) + "'");
      p.exit_label = *l;
      continue;
    }
    p.code.push_back(ParseInstruction(line, line_no));
  }
  return p;
}

std::string EmitAsm(const Program& p) {
  std::string out;
  for (const Instruction& i : p.code) out += ToAsm(i) + "\n";
  if (p.exit_label) out += "L" + std::to_string(*p.exit_label) + ":\n";
  return out;
}

namespace {

// Minimal TOML subset: [table], [[array-of-tables]], key = value with
// strings, integers and flat arrays. Several pairs may share a line.
struct TomlValue {
  enum class Kind { kString, kInt, kArray };
  Kind kind = Kind::kString;
  std::string str;
  Value num = 0;
  std::vector<TomlValue> items;
  int line = 0;
};

struct TomlTable {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, TomlValue>> pairs;
};

class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : text_(text) {}

  std::vector<TomlTable> Run() {
    std::vector<TomlTable> tables;
    tables.push_back(TomlTable{"", 1, {}});
    while (true) {
      Skip();
      if (pos_ >= text_.size()) break;
      if (text_[pos_] == '[') {
        bool array = text_.substr(pos_, 2) == "[[";
        pos_ += array ? 2 : 1;
        Skip();
        std::string name = Bare();
        Skip();
        if (text_.substr(pos_, array ? 2 : 1) != (array ? "]]" : "]")) Fail("unterminated table header");
        pos_ += array ? 2 : 1;
        tables.push_back(TomlTable{array ? "[[" + name + "]]" : name, line_, {}});
        continue;
      }
      std::string key = Bare();
      Skip();
      if (pos_ >= text_.size() || text_[pos_] != '=') Fail("expected '=' after '" + key + "'");
      ++pos_;
      Skip();
      tables.back().pairs.emplace_back(key, ValueAt());
    }
    return tables;
  }

 private:
  [[noreturn]] void Fail(const std::string& msg) const {
    throw PolicyError({"line " + std::to_string(line_) + ": " + msg});
  }

  void Skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string Bare() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (IdentChar(text_[pos_]) || text_[pos_] == '.' || text_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) Fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  TomlValue ValueAt() {
    TomlValue v;
    v.line = line_;
    if (pos_ >= text_.size()) Fail("missing value");
    char c = text_[pos_];
    if (c == '"') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') ++pos_;
      if (pos_ >= text_.size() || text_[pos_] != '"') Fail("unterminated string");
      v.kind = TomlValue::Kind::kString;
      v.str = std::string(text_.substr(start, pos_ - start));
      ++pos_;
      return v;
    }
    if (c == '[') {
      ++pos_;
      v.kind = TomlValue::Kind::kArray;
      Skip();
      while (pos_ < text_.size() && text_[pos_] != ']') {
        v.items.push_back(ValueAt());
        Skip();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          Skip();
        } else {
          break;
        }
      }
      if (pos_ >= text_.size() || text_[pos_] != ']') Fail("unterminated array");
      ++pos_;
      return v;
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_++;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      auto n = ToValue(text_.substr(start, pos_ - start));
      if (!n) Fail("bad integer");
      v.kind = TomlValue::Kind::kInt;
      v.num = *n;
      return v;
    }
    Fail("unsupported value");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

Policy ParsePolicy(std::string_view text) {
  std::vector<TomlTable> tables = TomlReader(text).Run();
  Policy policy;
  std::vector<std::string> problems;
  auto where = [](int line) { return "line " + std::to_string(line) + ": "; };

  auto names = [&](const TomlValue& v, const std::string& key) {
    VarSet out;
    if (v.kind != TomlValue::Kind::kArray) {
      problems.push_back(where(v.line) + "'" + key + "' must be an array of names");
      return out;
    }
    for (const TomlValue& item : v.items) {
      if (item.kind != TomlValue::Kind::kString || !IdentWord(item.str)) {
        problems.push_back(where(item.line) + "'" + key + "' holds a value that is not a name");
        continue;
      }
      out.insert(Var::Intern(item.str));
    }
    return out;
  };
  auto name = [&](const TomlValue& v, const std::string& key) -> std::optional<Var> {
    if (v.kind != TomlValue::Kind::kString || !IdentWord(v.str)) {
      problems.push_back(where(v.line) + "'" + key + "' must be a name");
      return std::nullopt;
    }
    return Var::Intern(v.str);
  };

  for (const TomlTable& t : tables) {
    auto unknown_key = [&](const std::string& key, int line) {
      problems.push_back(where(line) + "unknown key '" + key + "' in [" + t.name + "]");
    };
    if (t.name.empty()) {
      for (const auto& [key, v] : t.pairs) unknown_key(key, v.line);
    } else if (t.name == "vars") {
      for (const auto& [key, v] : t.pairs) {
        if (key != "universe") {
          unknown_key(key, v.line);
          continue;
        }
        if (v.kind != TomlValue::Kind::kArray) {
          problems.push_back(where(v.line) + "'universe' must be an array of names");
          continue;
        }
        for (const TomlValue& item : v.items) {
          if (item.kind != TomlValue::Kind::kString || !IdentWord(item.str)) {
            problems.push_back(where(item.line) + "'universe' holds a value that is not a name");
            continue;
          }
          policy.AddVariable(Var::Intern(item.str));
        }
      }
    } else if (t.name.rfind("locks.", 0) == 0 || t.name.rfind("assume.", 0) == 0) {
      bool lock = t.name[0] == 'l';
      std::string owner = t.name.substr(t.name.find('.') + 1);
      if (owner.empty() || (lock && !IdentWord(owner))) {
        problems.push_back(where(t.line) + "bad table name [" + t.name + "]");
        continue;
      }
      VarSet no_write;
      VarSet no_read_write;
      for (const auto& [key, v] : t.pairs) {
        if (key == "no_write") {
          no_write = names(v, key);
        } else if (key == "no_read_write") {
          no_read_write = names(v, key);
        } else {
          unknown_key(key, v.line);
        }
      }
      if (lock) {
        Var k = Var::Intern(owner);
        if (policy.locks.contains(k)) {
          problems.push_back(where(t.line) + "lock '" + owner + "' declared twice");
        }
        policy.locks[k] = LockInterp{std::move(no_write), std::move(no_read_write)};
      } else {
        if (policy.standing.contains(owner)) {
          problems.push_back(where(t.line) + "assumptions for '" + owner + "' declared twice");
        }
        policy.standing[owner] = AsmRec{std::move(no_write), std::move(no_read_write)};
      }
    } else if (t.name == "classification") {
      for (const auto& [key, v] : t.pairs) {
        if (key == "high") {
          VarSet high = names(v, key);
          policy.static_high.insert(high.begin(), high.end());
        } else {
          unknown_key(key, v.line);
        }
      }
    } else if (t.name == "[[classification.dependent]]") {
      DependentClass d;
      bool has_var = false;
      bool has_control = false;
      bool has_low = false;
      for (const auto& [key, v] : t.pairs) {
        if (key == "var") {
          if (auto x = name(v, key)) d.var = *x, has_var = true;
        } else if (key == "control") {
          if (auto x = name(v, key)) d.control = *x, has_control = true;
        } else if (key == "low_when") {
          if (v.kind != TomlValue::Kind::kInt) {
            problems.push_back(where(v.line) + "'low_when' must be an integer");
          } else {
            d.low_when = v.num;
            has_low = true;
          }
        } else {
          unknown_key(key, v.line);
        }
      }
      if (!has_var || !has_control || !has_low) {
        problems.push_back(where(t.line) + "dependent entry needs var, control and low_when");
        continue;
      }
      policy.dependent.push_back(d);
    } else {
      problems.push_back(where(t.line) + "unknown table [" + t.name + "]");
    }
  }

  policy.Index();
  for (std::string& p : ValidatePolicy(policy)) problems.push_back(std::move(p));
  if (!problems.empty()) throw PolicyError(std::move(problems));
  return policy;
}

EnvScript ParseEnvScript(std::string_view text) {
  EnvScript out;
  int line_no = 0;
  for (std::string_view raw : Lines(text)) {
    ++line_no;
    std::vector<std::string_view> w = Words(StripComment(raw, '#'));
    if (w.empty()) continue;
    if (w.size() != 3) throw ParseError(line_no, 1, "expected 'step variable value'");
    std::size_t step = 0;
    auto [ptr, ec] = std::from_chars(w[0].data(), w[0].data() + w[0].size(), step);
    if (ec != std::errc() || ptr != w[0].data() + w[0].size()) {
      throw ParseError(line_no, 1, "bad step '" + std::string(w[0]) + "'");
    }
    if (!IdentWord(w[1])) throw ParseError(line_no, 1, "bad variable '" + std::string(w[1]) + "'");
    auto v = ToValue(w[2]);
    if (!v) throw ParseError(line_no, 1, "bad value '" + std::string(w[2]) + "'");
    out.push_back(EnvWrite{step, Var::Intern(w[1]), *v});
  }
  return out;
}

std::string EmitEnvScript(const EnvScript& script) {
  std::string out;
  for (const EnvWrite& w : script) {
    out += std::to_string(w.step) + " " + w.var.name() + " " + std::to_string(w.value) + "\n";
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> ParseCoupling(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  int line_no = 0;
  for (std::string_view raw : Lines(text)) {
    ++line_no;
    std::vector<std::string_view> w = Words(StripComment(raw, '#'));
    if (w.empty()) continue;
    if (w.size() != 2) throw ParseError(line_no, 1, "expected 'pc pc'");
    std::size_t pcs[2];
    for (int i = 0; i < 2; ++i) {
      auto [ptr, ec] = std::from_chars(w[i].data(), w[i].data() + w[i].size(), pcs[i]);
      if (ec != std::errc() || ptr != w[i].data() + w[i].size()) {
        throw ParseError(line_no, 1, "bad pc '" + std::string(w[i]) + "'");
      }
    }
    out.emplace_back(pcs[0], pcs[1]);
  }
  return out;
}

}  // namespace wr
