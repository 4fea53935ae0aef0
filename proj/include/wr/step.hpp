#pragma once

#include <optional>

#include "wr/core.hpp"

namespace wr {

enum class StepStatus { kStepped, kBlocked, kStopped };

const char* StatusName(StepStatus s);

struct Blocked {};
struct Stopped {};

// Shared-memory footprint of one step, used by the simulator's auditors.
struct Effect {
  enum class Kind { kNone, kRead, kWrite, kBranch, kAcquire, kRelease, kLocal };

  Kind kind = Kind::kNone;
  VarSet reads;
  std::optional<Var> write;
  Value written = 0;
  std::optional<Var> lock;

  void Clear() { *this = Effect{}; }
};

const char* KindName(Effect::Kind k);

}  // namespace wr
