#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wr/core.hpp"

namespace wr {

enum class Level { kLow, kHigh };

const char* LevelName(Level l);

// Value-dependent classification: `var` is Low iff mem(control) == low_when.
struct DependentClass {
  Var var;
  Var control;
  Value low_when = 0;
};

struct LockInterp {
  VarSet no_write;
  VarSet no_read_write;
};

// Pair of variable sets with active AsmNoW / AsmNoRW assumptions.
struct AsmRec {
  VarSet no_write;
  VarSet no_read_write;

  friend bool operator==(const AsmRec&, const AsmRec&) = default;
};

class PolicyError : public std::runtime_error {
 public:
  explicit PolicyError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct Policy {
  // Declaration order is kept for printing; lookups go through `universe`.
  std::vector<Var> variables;
  VarSet universe;
  boost::container::flat_map<Var, LockInterp> locks;
  VarSet static_high;
  std::vector<DependentClass> dependent;
  // Standing assumptions a thread holds from its first step, keyed by thread
  // name. They seed the initial mode state and compile record.
  std::map<std::string, AsmRec> standing;

  // Derived tables; rebuilt by Index().
  VarSet controls;
  boost::container::flat_map<Var, std::size_t> dependent_index;
  boost::container::flat_map<Var, Var> governed_by;

  void AddVariable(Var v);
  void Index();

  bool IsLock(Var v) const { return locks.contains(v); }
  bool IsVariable(Var v) const { return universe.contains(v); }
  std::optional<Var> GoverningLock(Var v) const;
  AsmRec StandingFor(const std::string& thread) const;
};

Level Classify(const Policy& policy, const Memory& mem, Var x);
VarSet Cvars(const Policy& policy, Var x);
const VarSet& ControlVars(const Policy& policy);

// True iff the variable is never High under any memory, is not a control
// variable, is not lock-governed, and is not a lock: an attacker-visible sink.
bool IsLowSink(const Policy& policy, Var x);

bool LowMdsEq(const Policy& policy, const ModeState& mds, const Memory& mem1,
              const Memory& mem2);

// Name of the first variable that breaks low-mds-eq, if any.
std::optional<Var> LowMdsEqWitness(const Policy& policy, const ModeState& mds,
                                   const Memory& mem1, const Memory& mem2);

bool VarStable(const AsmRec& asmrec, const Policy& policy, Var v);

std::vector<std::string> ValidatePolicy(const Policy& policy);

// Guar modes hold every lock-governed variable; Asm modes hold the standing
// assumptions.
ModeState InitialModeState(const Policy& policy, const AsmRec& standing = {});

// Memory with every variable and lock present, all zero.
Memory ZeroMemory(const Policy& policy);

AsmRec AsmOf(const ModeState& mds);

bool HoldsLock(const Policy& policy, const ModeState& mds, const Memory& mem, Var lock);
void ApplyAcquire(const Policy& policy, Var lock, ModeState& mds);
void ApplyRelease(const Policy& policy, Var lock, ModeState& mds);

}  // namespace wr
