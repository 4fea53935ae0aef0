#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wr/checkers.hpp"
#include "wr/compiler.hpp"
#include "wr/policy.hpp"
#include "wr/risc.hpp"
#include "wr/while_lang.hpp"

namespace wr {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Expressions: integers, identifiers, `(e OP e)` with OP in
// + - * == != < && ||. `//` starts a comment in sources.
ExprPtr ParseExpr(std::string_view text);
CmdPtr ParseProgram(std::string_view text);

Instruction ParseInstruction(std::string_view line, int line_no = 1);
// One instruction per line, `[Lnn:] OPCODE operands`. A final line holding
// only `Lnn:` names the exit label. `;` starts a comment.
Program ParseAsm(std::string_view text);
std::string EmitAsm(const Program& p);

// TOML-like policy file; validated before returning. Throws PolicyError with
// every problem found.
Policy ParsePolicy(std::string_view text);

// Lines `step var value`; `#` starts a comment.
EnvScript ParseEnvScript(std::string_view text);
std::string EmitEnvScript(const EnvScript& script);

// Lines `pc pc`; `#` starts a comment.
std::vector<std::pair<std::size_t, std::size_t>> ParseCoupling(std::string_view text);

// Per-instruction compile records as JSON lines, followed by one summary line.
std::string WriteAnnotations(const CompileOutput& out, const CmdPtr& src);
// Rebuilds compiler output from a sidecar; `src` must be the program it was
// produced from so origins can be reattached.
CompileOutput ReadAnnotations(std::string_view text, const CmdPtr& src);

std::string ReadFile(const std::string& path);

}  // namespace wr
