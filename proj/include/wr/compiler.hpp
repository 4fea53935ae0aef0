#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wr/core.hpp"
#include "wr/policy.hpp"
#include "wr/risc.hpp"
#include "wr/while_lang.hpp"

namespace wr {

using RegSet = boost::container::flat_set<Reg>;
using RegRec = boost::container::flat_map<Reg, ExprPtr>;

struct CompRec {
  RegRec regrec;
  AsmRec asmrec;
};

bool SameRegRec(const RegRec& a, const RegRec& b);
bool SameCompRec(const CompRec& a, const CompRec& b);

// Pointwise agreement of the two records.
RegRec MeetRegRec(const RegRec& a, const RegRec& b);

std::string ToString(const RegRec& regrec);

// Which part of a source command an instruction was emitted for. The
// refinement checker uses it to match the abstract program position.
enum class Phase {
  kSkip,
  kAssignExpr,
  kAssignStore,
  kIfExpr,
  kIfJump,
  kWhileHead,
  kWhileExpr,
  kWhileJump,
  kLockAcq,
  kLockRel,
  kEpilogue,
};

const char* PhaseName(Phase p);
std::optional<Phase> PhaseFromName(std::string_view name);

struct AnnotatedInstr {
  Instruction instr;
  // Record in force before the instruction executes.
  CompRec rec;
  Phase phase = Phase::kSkip;
  const Cmd* origin = nullptr;
};

struct CompileOutput {
  std::vector<AnnotatedInstr> code;
  std::optional<Label> exit_label;
  Label next_label = 0;
  CompRec final_rec;
  bool failed = false;
  std::vector<std::string> diagnostics;

  Program ToProgram() const;
  // Record in force at `pc`; final_rec once pc is past the end.
  const CompRec& RecordAt(std::size_t pc) const;
};

struct CompileContext {
  const Policy& policy;
  Reg registers = kDefaultRegisterCount;
};

std::optional<Reg> RegAlloc(const RegRec& regrec, const RegSet& avoid, Reg registers);
std::optional<Reg> RegAllocCached(const RegRec& regrec, const RegSet& avoid, Var v,
                                  Reg registers);

struct ExprCode {
  std::vector<AnnotatedInstr> code;
  Reg result = 0;
  CompRec rec;
  bool failed = false;
  std::vector<std::string> diagnostics;
};

ExprCode CompileExpr(const CompileContext& ctx, const CompRec& rec, const RegSet& avoid,
                     std::optional<Label> entry, const ExprPtr& e,
                     Phase phase = Phase::kAssignExpr, const Cmd* origin = nullptr);

CompileOutput CompileCmd(const CompileContext& ctx, const CompRec& rec,
                         std::optional<Label> entry, Label next_label, const CmdPtr& c);

// Whole-thread compilation from the thread's standing assumptions, an empty
// register record, no entry label and label counter 0.
CompileOutput CompileProgram(const Policy& policy, const CmdPtr& c, const AsmRec& standing = {},
                             Reg registers = kDefaultRegisterCount);

bool NoUnstableExprs(const CmdPtr& c, const CompRec& rec, const Policy& policy,
                     std::vector<std::string>* why = nullptr);
bool CompileCmdInputReqs(const CompRec& rec, std::optional<Label> entry, Label next_label,
                         const CmdPtr& c, const Policy& policy);
bool RegrecStable(const CompRec& rec, const Policy& policy);
bool ConfigConsistent(const CompRec& rec, const std::vector<Value>& regs, const ModeState& mds,
                      const Memory& mem);

}  // namespace wr
