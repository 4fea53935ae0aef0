#pragma once

#include <memory>
#include <string>
#include <variant>

#include "wr/core.hpp"
#include "wr/policy.hpp"
#include "wr/step.hpp"

namespace wr {

struct Cmd;
using CmdPtr = std::shared_ptr<const Cmd>;

struct Cmd {
  struct Skip {};
  struct Assign {
    Var var;
    ExprPtr expr;
  };
  struct Seq {
    CmdPtr first;
    CmdPtr second;
  };
  struct If {
    ExprPtr cond;
    CmdPtr then_branch;
    CmdPtr else_branch;
  };
  struct While {
    ExprPtr cond;
    CmdPtr body;
  };
  struct LockAcq {
    Var lock;
  };
  struct LockRel {
    Var lock;
  };
  struct Stop {};

  std::variant<Skip, Assign, Seq, If, While, LockAcq, LockRel, Stop> node;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
};

CmdPtr MakeSkip();
CmdPtr MakeStop();
CmdPtr MakeAssign(Var v, ExprPtr e);
CmdPtr MakeSeq(CmdPtr first, CmdPtr second);
CmdPtr MakeIf(ExprPtr cond, CmdPtr then_branch, CmdPtr else_branch);
CmdPtr MakeWhile(ExprPtr cond, CmdPtr body);
CmdPtr MakeLockAcq(Var lock);
CmdPtr MakeLockRel(Var lock);

// Right-nested sequence of the given commands (at least one).
CmdPtr MakeBlock(std::vector<CmdPtr> cmds);

bool SameCmd(const CmdPtr& a, const CmdPtr& b);
std::size_t HashCmd(const Cmd& c);
std::size_t CmdSize(const Cmd& c);

struct CmdHash {
  std::size_t operator()(const CmdPtr& c) const { return HashCmd(*c); }
};
struct CmdEq {
  bool operator()(const CmdPtr& a, const CmdPtr& b) const { return SameCmd(a, b); }
};

const CmdPtr& LeftmostCmd(const CmdPtr& c);

// Every Cmd node reachable from `c`, including `c`.
void ForEachCmd(const CmdPtr& c, const std::function<void(const CmdPtr&)>& fn);

struct WhileConfig {
  CmdPtr cmd;
  ModeState mds;
  Memory mem;
};

bool WhileStops(const WhileConfig& cfg);

// Steps `cfg` in place. Blocked and Stopped leave it untouched.
StepStatus StepWhileInPlace(WhileConfig& cfg, const Policy& policy, Effect* effect = nullptr);

using WhileStep = std::variant<WhileConfig, Blocked, Stopped>;

WhileStep StepWhile(const WhileConfig& cfg, const Policy& policy);

// Source text in the concrete grammar, one statement per line.
std::string ToSource(const CmdPtr& c, int indent = 0);

// One-line rendering used in traces; Stop prints as `stop`.
std::string ToCompactString(const CmdPtr& c);

// First line of a command, with bodies elided.
std::string ToHeadline(const CmdPtr& c);

}  // namespace wr
