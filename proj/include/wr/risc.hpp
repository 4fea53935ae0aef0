#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wr/core.hpp"
#include "wr/policy.hpp"
#include "wr/step.hpp"

namespace wr {

using Label = std::uint32_t;
using Reg = std::uint32_t;

inline constexpr Reg kDefaultRegisterCount = 16;

struct Instr {
  struct Load {
    Reg reg;
    Var var;
    friend bool operator==(const Load&, const Load&) = default;
  };
  struct Store {
    Var var;
    Reg reg;
    friend bool operator==(const Store&, const Store&) = default;
  };
  struct Jmp {
    Label target;
    friend bool operator==(const Jmp&, const Jmp&) = default;
  };
  struct Jz {
    Label target;
    Reg reg;
    friend bool operator==(const Jz&, const Jz&) = default;
  };
  struct Nop {
    friend bool operator==(const Nop&, const Nop&) = default;
  };
  struct MoveK {
    Reg reg;
    Value value;
    friend bool operator==(const MoveK&, const MoveK&) = default;
  };
  struct MoveR {
    Reg dst;
    Reg src;
    friend bool operator==(const MoveR&, const MoveR&) = default;
  };
  // dst := dst op src
  struct Op {
    BinOp op;
    Reg dst;
    Reg src;
    friend bool operator==(const Op&, const Op&) = default;
  };
  struct LockAcq {
    Var lock;
    friend bool operator==(const LockAcq&, const LockAcq&) = default;
  };
  struct LockRel {
    Var lock;
    friend bool operator==(const LockRel&, const LockRel&) = default;
  };
  using Body = std::variant<Load, Store, Jmp, Jz, Nop, MoveK, MoveR, Op, LockAcq, LockRel>;
};

struct Instruction {
  std::optional<Label> label;
  Instr::Body body;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&body);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(body);
  }

  friend bool operator==(const Instruction&, const Instruction&) = default;
};



struct Program {
  std::vector<Instruction> code;
  // Label that denotes the position one past the last instruction.
  std::optional<Label> exit_label;

  std::size_t size() const { return code.size(); }
  friend bool operator==(const Program&, const Program&) = default;
};

class LinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t ResolveLabel(const Program& p, Label l);

// A program with its label table built once; checked for duplicate labels and
// unresolvable jump targets.
class Image {
 public:
  explicit Image(Program program);

  const Program& program() const { return program_; }
  std::size_t size() const { return program_.code.size(); }
  const Instruction& at(std::size_t pc) const { return program_.code.at(pc); }
  std::size_t Resolve(Label l) const;

 private:
  Program program_;
  boost::container::flat_map<Label, std::size_t> targets_;
};

std::shared_ptr<const Image> Link(Program program);

struct RiscConfig {
  std::size_t pc = 0;
  std::shared_ptr<const Image> image;
  std::vector<Value> regs;
  ModeState mds;
  Memory mem;
};

bool RiscStops(const RiscConfig& cfg);

StepStatus StepRiscInPlace(RiscConfig& cfg, const Policy& policy, Effect* effect = nullptr);

using RiscStep = std::variant<RiscConfig, Blocked, Stopped>;

RiscStep StepRisc(const RiscConfig& cfg, const Policy& policy);

std::vector<Label> JumpTargets(const Program& p);
std::vector<Label> DefinedLabels(const Program& p);
bool Joinable(const Program& p1, const Program& p2);

// `[Lnn: ]OPCODE operands`
std::string ToAsm(const Instruction& i);
std::string ToAsm(const Instr::Body& b);
const char* OpcodeName(const Instr::Body& b);

}  // namespace wr
