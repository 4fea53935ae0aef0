#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "wr/checkers.hpp"
#include "wr/policy.hpp"
#include "wr/risc.hpp"
#include "wr/while_lang.hpp"

namespace wr {

struct ThreadSpec {
  std::string name;
  std::variant<CmdPtr, std::shared_ptr<const Image>> code;
};

struct SimOptions {
  std::uint64_t seed = 0;
  std::size_t max_steps = 10000;
  Reg registers = kDefaultRegisterCount;
};

struct TraceEvent {
  std::size_t step = 0;
  std::size_t thread = 0;
  Effect effect;
  std::string detail;
};

struct SimTrace {
  std::vector<std::string> threads;
  // Asm sets each thread starts with (its standing assumptions).
  std::vector<AsmRec> initial_asm;
  std::vector<TraceEvent> events;
  std::size_t steps = 0;
  bool deadlock = false;
  bool all_stopped = false;
  Memory final_mem;

  std::vector<std::string> Lines() const;
};

// Interleaves the threads over one shared memory with a seeded round-robin
// scheduler whose quantum is drawn from 1..4.
SimTrace SimRun(const Policy& policy, const std::vector<ThreadSpec>& threads, const Memory& init,
                const SimOptions& opts = {});

// Replays lock events to track each thread's assumptions and reports the
// first access that violates another thread's assumption.
Verdict CheckModeCompatibility(const Policy& policy, const SimTrace& trace);

struct SinkWrite {
  std::size_t thread;
  Var var;
  Value value;

  friend bool operator==(const SinkWrite&, const SinkWrite&) = default;
};

std::vector<SinkWrite> LowSinkTrace(const Policy& policy, const SimTrace& trace);

using Mutation = std::vector<std::pair<Var, Value>>;

// Runs the system on `init` and on `init` with the mutation applied, under the
// same schedule per seed, and compares low-sink write sequences.
Verdict TwoRunNoninterference(const Policy& policy, const std::vector<ThreadSpec>& threads,
                              const Memory& init, const Mutation& mutation,
                              const std::vector<std::uint64_t>& seeds,
                              std::size_t max_steps = 10000);

}  // namespace wr
