#include "wr/policy.hpp"

#include <algorithm>

namespace wr {
namespace {

std::string JoinProblems(const std::vector<std::string>& problems) {
  std::string out;
  for (const auto& p : problems) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

void Unite(VarSet& into, const VarSet& from) { into.insert(from.begin(), from.end()); }

void Subtract(VarSet& from, const VarSet& what) {
  for (Var v : what) from.erase(v);
}

}  // namespace

const char* LevelName(Level l) { return l == Level::kLow ? "Low" : "High"; }

PolicyError::PolicyError(std::vector<std::string> problems)
    : std::runtime_error(JoinProblems(problems)), problems_(std::move(problems)) {}

void Policy::AddVariable(Var v) {
  if (universe.insert(v).second) variables.push_back(v);
}

void Policy::Index() {
  controls.clear();
  dependent_index.clear();
  governed_by.clear();
  for (std::size_t i = 0; i < dependent.size(); ++i) {
    controls.insert(dependent[i].control);
    dependent_index.emplace(dependent[i].var, i);
  }
  for (const auto& [lock, interp] : locks) {
    for (Var v : interp.no_write) governed_by.emplace(v, lock);
    for (Var v : interp.no_read_write) governed_by.emplace(v, lock);
  }
}

std::optional<Var> Policy::GoverningLock(Var v) const {
  auto it = governed_by.find(v);
  if (it == governed_by.end()) return std::nullopt;
  return it->second;
}

AsmRec Policy::StandingFor(const std::string& thread) const {
  auto it = standing.find(thread);
  return it == standing.end() ? AsmRec{} : it->second;
}

Level Classify(const Policy& policy, const Memory& mem, Var x) {
  if (policy.IsLock(x)) return Level::kLow;
  if (!policy.IsVariable(x)) throw PolicyError({"unknown variable '" + x.name() + "'"});
  if (policy.static_high.contains(x)) return Level::kHigh;
  auto it = policy.dependent_index.find(x);
  if (it != policy.dependent_index.end()) {
    const DependentClass& d = policy.dependent[it->second];
    return mem.Get(d.control) == d.low_when ? Level::kLow : Level::kHigh;
  }
  return Level::kLow;
}

VarSet Cvars(const Policy& policy, Var x) {
  VarSet out;
  auto it = policy.dependent_index.find(x);
  if (it != policy.dependent_index.end()) out.insert(policy.dependent[it->second].control);
  return out;
}

const VarSet& ControlVars(const Policy& policy) { return policy.controls; }

bool IsLowSink(const Policy& policy, Var x) {
  return policy.IsVariable(x) && !policy.static_high.contains(x) &&
         !policy.dependent_index.contains(x) && !policy.controls.contains(x) &&
         !policy.governed_by.contains(x);
}

std::optional<Var> LowMdsEqWitness(const Policy& policy, const ModeState& mds,
                                   const Memory& mem1, const Memory& mem2) {
  auto must_agree = [&](Var x) {
    if (policy.controls.contains(x) || policy.IsLock(x)) return true;
    return Classify(policy, mem1, x) == Level::kLow && Readable(mds, x);
  };
  for (Var x : policy.variables) {
    if (must_agree(x) && mem1.Get(x) != mem2.Get(x)) return x;
  }
  for (const auto& [k, interp] : policy.locks) {
    if (mem1.Get(k) != mem2.Get(k)) return k;
  }
  return std::nullopt;
}

bool LowMdsEq(const Policy& policy, const ModeState& mds, const Memory& mem1,
              const Memory& mem2) {
  return !LowMdsEqWitness(policy, mds, mem1, mem2).has_value();
}

bool VarStable(const AsmRec& asmrec, const Policy& policy, Var v) {
  auto covered = [&](Var x) {
    return asmrec.no_write.contains(x) || asmrec.no_read_write.contains(x);
  };
  if (!covered(v)) return false;
  for (Var c : Cvars(policy, v)) {
    if (!covered(c)) return false;
  }
  return true;
}

std::vector<std::string> ValidatePolicy(const Policy& policy) {
  std::vector<std::string> problems;
  auto known = [&](Var v, const std::string& where) {
    if (!policy.IsVariable(v)) {
      problems.push_back(where + ": '" + v.name() + "' is not in the variable universe");
    }
  };

  if (policy.universe.empty()) problems.push_back("empty variable universe");

  for (const auto& [lock, interp] : policy.locks) {
    if (policy.IsVariable(lock)) {
      problems.push_back("lock '" + lock.name() + "' is also declared as a variable");
    }
    for (Var v : interp.no_write) {
      known(v, "lock " + lock.name());
      if (interp.no_read_write.contains(v)) {
        problems.push_back("lock '" + lock.name() + "' lists '" + v.name() +
                           "' as both no_write and no_read_write");
      }
    }
    for (Var v : interp.no_read_write) known(v, "lock " + lock.name());
    for (const auto& [other, other_interp] : policy.locks) {
      if (!(lock < other)) continue;
      for (Var v : interp.no_write) {
        if (other_interp.no_write.contains(v) || other_interp.no_read_write.contains(v)) {
          problems.push_back("'" + v.name() + "' is governed by both '" + lock.name() +
                             "' and '" + other.name() + "'");
        }
      }
      for (Var v : interp.no_read_write) {
        if (other_interp.no_write.contains(v) || other_interp.no_read_write.contains(v)) {
          problems.push_back("'" + v.name() + "' is governed by both '" + lock.name() +
                             "' and '" + other.name() + "'");
        }
      }
    }
    auto same_kind = [&](const VarSet& set, const char* kind) {
      for (Var v : set) {
        for (Var c : Cvars(policy, v)) {
          if (!set.contains(c)) {
            problems.push_back("lock '" + lock.name() + "' governs " + kind + " access to '" +
                               v.name() + "' but not to its control variable '" + c.name() +
                               "'");
          }
        }
      }
    };
    same_kind(interp.no_write, "no_write");
    same_kind(interp.no_read_write, "no_read_write");
  }

  for (Var v : policy.static_high) {
    known(v, "classification.high");
    if (policy.IsLock(v)) problems.push_back("lock '" + v.name() + "' is classified High");
  }

  VarSet seen_dependent;
  for (const DependentClass& d : policy.dependent) {
    if (policy.IsLock(d.var)) {
      problems.push_back("lock '" + d.var.name() + "' has a dependent classification");
    } else {
      known(d.var, "classification.dependent");
    }
    if (policy.IsLock(d.control)) {
      problems.push_back("lock '" + d.control.name() + "' cannot be a control variable");
    } else {
      known(d.control, "classification.dependent control");
    }
    if (!seen_dependent.insert(d.var).second) {
      problems.push_back("'" + d.var.name() + "' has more than one dependent classification");
    }
    if (policy.static_high.contains(d.var)) {
      problems.push_back("'" + d.var.name() + "' is both statically High and dependent");
    }
    if (d.var == d.control) {
      problems.push_back("'" + d.var.name() + "' controls its own classification");
    }
  }
  for (Var c : policy.controls) {
    if (policy.static_high.contains(c) || policy.dependent_index.contains(c)) {
      problems.push_back("control variable '" + c.name() + "' is not always Low");
    }
  }

  for (const auto& [thread, asmrec] : policy.standing) {
    for (const VarSet* set : {&asmrec.no_write, &asmrec.no_read_write}) {
      for (Var v : *set) {
        known(v, "assume." + thread);
        if (policy.governed_by.contains(v)) {
          problems.push_back("assume." + thread + ": '" + v.name() +
                             "' is lock-governed and cannot be assumed permanently");
        }
      }
    }
    for (Var v : asmrec.no_write) {
      if (asmrec.no_read_write.contains(v)) {
        problems.push_back("assume." + thread + ": '" + v.name() + "' listed twice");
      }
    }
  }
  return problems;
}

ModeState InitialModeState(const Policy& policy, const AsmRec& standing) {
  ModeState mds;
  for (const auto& [lock, interp] : policy.locks) {
    Unite(mds[Mode::kGuarNoW], interp.no_write);
    Unite(mds[Mode::kGuarNoRW], interp.no_read_write);
  }
  mds[Mode::kAsmNoW] = standing.no_write;
  mds[Mode::kAsmNoRW] = standing.no_read_write;
  return mds;
}

Memory ZeroMemory(const Policy& policy) {
  Memory mem;
  for (Var v : policy.variables) mem.Set(v, 0);
  for (const auto& [lock, interp] : policy.locks) mem.Set(lock, 0);
  return mem;
}

AsmRec AsmOf(const ModeState& mds) {
  return AsmRec{mds[Mode::kAsmNoW], mds[Mode::kAsmNoRW]};
}

bool HoldsLock(const Policy& policy, const ModeState& mds, const Memory& mem, Var lock) {
  auto it = policy.locks.find(lock);
  if (it == policy.locks.end()) return false;
  if (mem.Get(lock) == 0) return false;
  const LockInterp& interp = it->second;
  return std::includes(mds[Mode::kAsmNoW].begin(), mds[Mode::kAsmNoW].end(),
                       interp.no_write.begin(), interp.no_write.end()) &&
         std::includes(mds[Mode::kAsmNoRW].begin(), mds[Mode::kAsmNoRW].end(),
                       interp.no_read_write.begin(), interp.no_read_write.end());
}

void ApplyAcquire(const Policy& policy, Var lock, ModeState& mds) {
  const LockInterp& interp = policy.locks.at(lock);
  Unite(mds[Mode::kAsmNoW], interp.no_write);
  Unite(mds[Mode::kAsmNoRW], interp.no_read_write);
  Subtract(mds[Mode::kGuarNoW], interp.no_write);
  Subtract(mds[Mode::kGuarNoRW], interp.no_read_write);
}

void ApplyRelease(const Policy& policy, Var lock, ModeState& mds) {
  const LockInterp& interp = policy.locks.at(lock);
  Subtract(mds[Mode::kAsmNoW], interp.no_write);
  Subtract(mds[Mode::kAsmNoRW], interp.no_read_write);
  Unite(mds[Mode::kGuarNoW], interp.no_write);
  Unite(mds[Mode::kGuarNoRW], interp.no_read_write);
}

}  // namespace wr
