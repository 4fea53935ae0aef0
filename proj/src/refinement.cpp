#include <algorithm>
#include <deque>
#include <sstream>

#include "wr/checkers.hpp"

namespace wr {

void Verdict::Fail(std::string failed_clause, std::size_t step, std::string why) {
  pass = false;
  inconclusive = false;
  clause = std::move(failed_clause);
  at_step = step;
  detail = std::move(why);
}

std::string Verdict::ReportLine() const {
  std::ostringstream out;
  out << (pass ? "PASS" : "FAIL") << " " << check << " seed=" << seed << " steps=" << steps;
  if (!pass) out << " clause=" << clause << " at step=" << at_step;
  if (pass && inconclusive) out << " inconclusive";
  return out.str();
}

int AbsSteps(const CmdPtr& abs_cmd, const AnnotatedInstr& at, PacingFault fault) {
  if (at.phase == Phase::kEpilogue) return fault == PacingFault::kEpiloguePacedOne ? 1 : 0;
  const Instr::Body& b = at.instr.body;
  bool expr_step = std::holds_alternative<Instr::Load>(b) || std::holds_alternative<Instr::Op>(b) ||
                   std::holds_alternative<Instr::MoveK>(b) ||
                   std::holds_alternative<Instr::MoveR>(b);
  if (expr_step) return LeftmostCmd(abs_cmd)->is<Cmd::While>() ? 1 : 0;
  return 1;
}

int AbsSteps(const WhileConfig& abs, const RiscConfig& conc, const CompileOutput& meta,
             PacingFault fault) {
  if (conc.pc >= meta.code.size()) {
    throw CheckError("abs-steps queried at pc " + std::to_string(conc.pc) +
                     " outside the program");
  }
  return AbsSteps(abs.cmd, meta.code[conc.pc], fault);
}

bool PositionMatches(const CmdPtr& abs_cmd, const AnnotatedInstr& at) {
  if (at.phase == Phase::kEpilogue || at.origin == nullptr) return true;
  const Cmd* leftmost = LeftmostCmd(abs_cmd).get();
  switch (at.phase) {
    case Phase::kWhileExpr:
    case Phase::kWhileJump: {
      // The loop has been unrolled to If(e, Seq(body, loop), Stop).
      const auto* unrolled = leftmost->as<Cmd::If>();
      if (!unrolled) return false;
      const auto* seq = unrolled->then_branch->as<Cmd::Seq>();
      return seq && seq->second.get() == at.origin;
    }
    default:
      return leftmost == at.origin;
  }
}

InitState MakeInitState(const Policy& policy, const AsmRec& standing, Memory mem, Reg registers) {
  InitState s;
  s.mem = std::move(mem);
  s.mds = InitialModeState(policy, standing);
  s.regs.assign(registers, 0);
  return s;
}

std::vector<Var> EnvWritable(const Policy& policy, const ModeState& mds) {
  std::vector<Var> out;
  for (Var v : policy.variables) {
    if (Writable(mds, v)) out.push_back(v);
  }
  return out;
}

namespace {

std::string FirstDifference(const Memory& a, const Memory& b) {
  for (const auto& [v, x] : a.entries()) {
    if (!b.Contains(v)) return "'" + v.name() + "' missing on one side";
    Value y = b.Get(v);
    if (x != y) {
      return "'" + v.name() + "' is " + std::to_string(x) + " abstractly, " + std::to_string(y) +
             " concretely";
    }
  }
  return "memories differ in domain";
}

struct TraceEntry {
  std::size_t step;
  std::size_t pc;
  int pace;
  CmdPtr abs;
};

class TraceTail {
 public:
  explicit TraceTail(std::size_t cap) : cap_(cap) {}

  void Push(TraceEntry e) {
    if (cap_ == 0) return;
    if (entries_.size() == cap_) entries_.pop_front();
    entries_.push_back(std::move(e));
  }

  std::vector<std::string> Render(const CompileOutput& compiled) const {
    std::vector<std::string> out;
    for (const TraceEntry& e : entries_) {
      std::ostringstream line;
      line << "step=" << e.step << " pc=" << e.pc;
      if (e.pc < compiled.code.size()) {
        const AnnotatedInstr& a = compiled.code[e.pc];
        line << " instr=\"" << ToAsm(a.instr) << "\" phase=" << PhaseName(a.phase);
      }
      line << " pace=" << e.pace << " abs=\"" << ToHeadline(LeftmostCmd(e.abs)) << "\"";
      out.push_back(line.str());
    }
    return out;
  }

 private:
  std::size_t cap_;
  std::deque<TraceEntry> entries_;
};

}  // namespace

Verdict CheckRefinementRun(const Policy& policy, const CmdPtr& src, const CompileOutput& compiled,
                           const InitState& init, const RefinementOptions& opts) {
  Verdict v;
  v.check = "refinement";
  v.seed = opts.seed;
  if (compiled.failed) throw CheckError("refinement check needs a successful compilation");

  std::shared_ptr<const Image> image;
  try {
    image = Link(compiled.ToProgram());
  } catch (const LinkError& e) {
    throw CheckError(std::string("compiled program does not link: ") + e.what());
  }
  WhileConfig abs{src, init.mds, init.mem};
  RiscConfig conc{0, image, init.regs, init.mds, init.mem};
  if (!ConfigConsistent(compiled.RecordAt(0), conc.regs, conc.mds, conc.mem)) {
    throw CheckError("initial configuration is not consistent with the compile record");
  }

  EnvScript script = opts.script;
  std::stable_sort(script.begin(), script.end(),
                   [](const EnvWrite& a, const EnvWrite& b) { return a.step < b.step; });
  std::size_t next_write = 0;
  std::mt19937_64 rng(opts.random_env ? opts.random_env->seed : 0);
  TraceTail tail(opts.trace_tail);

  auto env_write = [&](std::size_t step, Var x, Value value) {
    abs.mem.Set(x, value);
    conc.mem.Set(x, value);
    v.env.push_back(EnvWrite{step, x, value});
  };

  auto fail = [&](std::string clause, std::size_t step, std::string why) {
    v.Fail(std::move(clause), step, std::move(why));
    v.trace = tail.Render(compiled);
    v.trace.push_back("abs=\"" + ToCompactString(abs.cmd) + "\"");
    v.trace.push_back("abs.mem=" + ToString(abs.mem) + " conc.mem=" + ToString(conc.mem));
    v.trace.push_back("mds=" + ToString(conc.mds));
  };

  for (std::size_t step = 0;; ++step) {
    bool interfered = false;
    for (; next_write < script.size() && script[next_write].step <= step; ++next_write) {
      const EnvWrite& w = script[next_write];
      if (w.step < step) continue;
      if (!policy.IsVariable(w.var) || !Writable(conc.mds, w.var)) {
        throw CheckError("env write to '" + w.var.name() + "' at step " + std::to_string(step) +
                         " targets a variable that is not writable");
      }
      env_write(step, w.var, w.value);
      interfered = true;
    }
    if (opts.random_env && rng() % 100 < opts.random_env->percent) {
      std::vector<Var> targets = EnvWritable(policy, conc.mds);
      if (!targets.empty()) {
        Var x = targets[rng() % targets.size()];
        std::uniform_int_distribution<Value> dist(opts.random_env->lo, opts.random_env->hi);
        env_write(step, x, dist(rng));
        interfered = true;
      }
    }
    if (interfered && !ConfigConsistent(compiled.RecordAt(conc.pc), conc.regs, conc.mds, conc.mem)) {
      fail("closed-others", step, "environment write broke register consistency at pc " +
                                      std::to_string(conc.pc));
      return v;
    }

    if (RiscStops(conc)) {
      if (!WhileStops(abs)) {
        fail("stop-together", step, "concrete program stopped, abstract program has not");
      }
      return v;
    }
    if (step == opts.max_steps) {
      v.inconclusive = true;
      return v;
    }

    const AnnotatedInstr& at = compiled.code[conc.pc];
    int pace = AbsSteps(abs.cmd, at, opts.fault);
    tail.Push(TraceEntry{step, conc.pc, pace, abs.cmd});
    if (!PositionMatches(abs.cmd, at)) {
      fail("position", step, std::string("instruction phase ") + PhaseName(at.phase) +
                                 " does not match abstract command");
      return v;
    }

    StepStatus cs;
    try {
      cs = StepRiscInPlace(conc, policy);
    } catch (const std::exception& e) {
      fail("fault", step, std::string("concrete step failed: ") + e.what());
      return v;
    }
    if (cs == StepStatus::kBlocked) {
      StepStatus as;
      try {
        as = StepWhileInPlace(abs, policy);
      } catch (const std::exception& e) {
        fail("fault", step, std::string("abstract step failed: ") + e.what());
        return v;
      }
      if (as != StepStatus::kBlocked) {
        fail("blocking", step, "concrete program blocked, abstract program did not");
      }
      return v;
    }
    for (int i = 0; i < pace; ++i) {
      StepStatus as;
      try {
        as = StepWhileInPlace(abs, policy);
      } catch (const std::exception& e) {
        fail("fault", step, std::string("abstract step failed: ") + e.what());
        return v;
      }
      if (as != StepStatus::kStepped) {
        fail("pacing", step, std::string("abstract program could not take step ") +
                                 std::to_string(i + 1) + " of " + std::to_string(pace) + " (" +
                                 StatusName(as) + ")");
        return v;
      }
    }
    ++v.steps;

    if (!(abs.mds == conc.mds)) {
      fail("modes-mem", step, "mode states differ: abstract " + ToString(abs.mds) + ", concrete " +
                                  ToString(conc.mds));
      return v;
    }
    if (!(abs.mem == conc.mem)) {
      fail("modes-mem", step, FirstDifference(abs.mem, conc.mem));
      return v;
    }
    if (!ConfigConsistent(compiled.RecordAt(conc.pc), conc.regs, conc.mds, conc.mem)) {
      fail("consistency", step, "registers disagree with the compile record at pc " +
                                    std::to_string(conc.pc));
      return v;
    }
  }
}

}  // namespace wr
