#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wr/compiler.hpp"
#include "wr/core.hpp"
#include "wr/policy.hpp"
#include "wr/risc.hpp"
#include "wr/while_lang.hpp"

namespace wr {

// Misuse of a checker: bad precondition, rejected script, resource bound.
class CheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvWrite {
  std::size_t step = 0;
  Var var;
  Value value = 0;

  friend bool operator==(const EnvWrite&, const EnvWrite&) = default;
};
using EnvScript = std::vector<EnvWrite>;

struct Verdict {
  std::string check;
  bool pass = true;
  // Pass only because the step budget ran out before either side stopped.
  bool inconclusive = false;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::string clause;
  std::size_t at_step = 0;
  std::string detail;
  // Most recent configurations, oldest first.
  std::vector<std::string> trace;
  // Environment writes that were applied, replayable as a script.
  EnvScript env;

  void Fail(std::string failed_clause, std::size_t step, std::string why);
  std::string ReportLine() const;
};

enum class PacingFault { kNone, kEpiloguePacedOne };

// Abstract steps matching one concrete step at `at`, given the abstract
// program's current command.
int AbsSteps(const CmdPtr& abs_cmd, const AnnotatedInstr& at, PacingFault fault = PacingFault::kNone);
int AbsSteps(const WhileConfig& abs, const RiscConfig& conc, const CompileOutput& meta,
             PacingFault fault = PacingFault::kNone);

// Position check: does the abstract command sit where instruction `at` expects?
bool PositionMatches(const CmdPtr& abs_cmd, const AnnotatedInstr& at);

struct InitState {
  Memory mem;
  ModeState mds;
  std::vector<Value> regs;
};

InitState MakeInitState(const Policy& policy, const AsmRec& standing, Memory mem,
                        Reg registers = kDefaultRegisterCount);

// Seeded closed-others interference: before each paired step, with the given
// percentage, one writable program variable gets a random value.
struct RandomEnv {
  std::uint64_t seed = 0;
  unsigned percent = 5;
  Value lo = -8;
  Value hi = 8;
};

struct RefinementOptions {
  std::size_t max_steps = 100000;
  EnvScript script;
  std::optional<RandomEnv> random_env;
  PacingFault fault = PacingFault::kNone;
  std::uint64_t seed = 0;
  std::size_t trace_tail = 24;
};

Verdict CheckRefinementRun(const Policy& policy, const CmdPtr& src, const CompileOutput& compiled,
                           const InitState& init, const RefinementOptions& opts = {});

// Variables an environment may write under `mds`: program variables that are
// writable. Locks are never written by the environment.
std::vector<Var> EnvWritable(const Policy& policy, const ModeState& mds);

// True iff (new1, new2) is a globally consistent change of (old1, old2) under
// `mds`: every variable whose value or classification changes is writable and
// the new memories are low-equivalent.
bool IsCgChange(const Policy& policy, const ModeState& mds, const Memory& old1, const Memory& old2,
                const Memory& new1, const Memory& new2);

struct MemPairOptions {
  Value lo = -8;
  Value hi = 8;
  std::map<Var, Value> fixed;
};

// Random pairs of memories that are low-equivalent under `mds`. Lock
// variables start free.
class MemPairGenerator {
 public:
  MemPairGenerator(const Policy& policy, ModeState mds, std::uint64_t seed,
                   MemPairOptions opts = {});
  std::pair<Memory, Memory> Next();

 private:
  const Policy& policy_;
  ModeState mds_;
  MemPairOptions opts_;
  std::mt19937_64 rng_;
};

struct TimingTarget {
  Program program;
  // Annotations and abstract source; without them the pacing clause is skipped.
  const CompileOutput* compiled = nullptr;
  CmdPtr src;
  ModeState mds;
  // pc pairs related by the coupling invariant besides equal pcs.
  std::vector<std::pair<std::size_t, std::size_t>> coupling;
};

struct TimingOptions {
  std::size_t pairs = 100;
  std::size_t max_steps = 10000;
  std::uint64_t seed = 0;
  unsigned probe_percent = 5;
  MemPairOptions mem;
  PacingFault fault = PacingFault::kNone;
  Reg registers = kDefaultRegisterCount;
  std::size_t trace_tail = 24;
};

Verdict CheckDecompSideConditions(const Policy& policy, const TimingTarget& target,
                                  const TimingOptions& opts = {});

struct HighBranchOptions {
  std::size_t pairs = 100;
  std::size_t max_steps = 10000;
  std::uint64_t seed = 0;
  MemPairOptions mem;
};

Verdict CheckNoHighBranching(const Policy& policy, const CmdPtr& src, const ModeState& mds,
                             const HighBranchOptions& opts = {});

struct WhileConfigHash {
  std::size_t operator()(const WhileConfig& c) const;
};
struct WhileConfigEq {
  bool operator()(const WhileConfig& a, const WhileConfig& b) const;
};

std::string CanonicalString(const WhileConfig& c);

// Every memory over `domain` for the program variables; locks are 0.
std::vector<Memory> EnumerateMemories(const Policy& policy, const std::vector<Value>& domain);

// All globally consistent changes of (mem1, mem2) within `domain`, including
// the unchanged pair.
std::vector<std::pair<Memory, Memory>> CgVariants(const Policy& policy, const ModeState& mds,
                                                  const Memory& mem1, const Memory& mem2,
                                                  const std::vector<Value>& domain);

struct BisimOptions {
  std::vector<Value> domain{0, 1};
  std::size_t max_pairs = 500000;
};

struct BisimResult {
  bool ok = false;
  std::vector<WhileConfig> configs;
  // Surviving pairs, as indices into `configs`.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> relation;
  std::optional<std::pair<std::uint32_t, std::uint32_t>> counterexample;
  std::string reason;
  std::size_t explored = 0;

  std::optional<std::uint32_t> Find(const WhileConfig& c) const;
  bool Contains(const WhileConfig& a, const WhileConfig& b) const;
  std::set<std::string> CanonicalPairs() const;
  // Partners of configuration `i` in the relation.
  const std::vector<std::uint32_t>& Partners(std::uint32_t i) const;

  std::unordered_map<WhileConfig, std::uint32_t, WhileConfigHash, WhileConfigEq> index;
  std::vector<std::vector<std::uint32_t>> partners;
};

BisimResult BuildBoundedBisim(const Policy& policy, const CmdPtr& src, const ModeState& mds,
                              const BisimOptions& opts = {});

struct CubeOptions {
  std::vector<Value> domain{0, 1};
  std::size_t max_pairs = 200000;
  PacingFault fault = PacingFault::kNone;
  int max_n = 4;
};

Verdict CheckCube(const BisimResult& bisim, const Policy& policy, const CmdPtr& src,
                  const CompileOutput& compiled, const ModeState& mds,
                  const CubeOptions& opts = {});

}  // namespace wr
