#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "wr/checkers.hpp"

namespace wr {

namespace {

// Variables whose values low-mds-eq forces equal under (mds, mem).
bool MustAgree(const Policy& policy, const ModeState& mds, const Memory& mem, Var v) {
  if (policy.IsLock(v)) return true;
  if (ControlVars(policy).contains(v)) return true;
  return Classify(policy, mem, v) == Level::kLow && Readable(mds, v);
}

}  // namespace

bool IsCgChange(const Policy& policy, const ModeState& mds, const Memory& old1, const Memory& old2,
                const Memory& new1, const Memory& new2) {
  for (const auto& [x, before1] : old1.entries()) {
    bool changed = before1 != new1.Get(x) || old2.Get(x) != new2.Get(x);
    if (!changed && !policy.IsLock(x)) {
      changed = Classify(policy, old1, x) != Classify(policy, new1, x);
    }
    if (changed && (policy.IsLock(x) || !Writable(mds, x))) return false;
  }
  return LowMdsEq(policy, mds, new1, new2);
}

MemPairGenerator::MemPairGenerator(const Policy& policy, ModeState mds, std::uint64_t seed,
                                   MemPairOptions opts)
    : policy_(policy), mds_(std::move(mds)), opts_(std::move(opts)), rng_(seed) {
  if (opts_.lo > opts_.hi) throw CheckError("memory generator range is empty");
  for (const auto& [v, value] : opts_.fixed) {
    if (!policy_.IsVariable(v)) {
      throw CheckError("memory generator fixes unknown variable '" + v.name() + "'");
    }
  }
}

std::pair<Memory, Memory> MemPairGenerator::Next() {
  std::uniform_int_distribution<Value> dist(opts_.lo, opts_.hi);
  Memory mem1 = ZeroMemory(policy_);
  for (Var v : policy_.variables) {
    auto it = opts_.fixed.find(v);
    mem1.Set(v, it != opts_.fixed.end() ? it->second : dist(rng_));
  }
  Memory mem2 = mem1;
  for (Var v : policy_.variables) {
    if (opts_.fixed.contains(v) || MustAgree(policy_, mds_, mem1, v)) continue;
    mem2.Set(v, dist(rng_));
  }
  if (!LowMdsEq(policy_, mds_, mem1, mem2)) {
    throw CheckError("memory generator could not produce a low-equivalent pair");
  }
  return {std::move(mem1), std::move(mem2)};
}

namespace {

struct PairTrace {
  std::size_t pair;
  std::size_t step;
  std::size_t pc1;
  std::size_t pc2;
};

std::string DescribePc(const Image& image, std::size_t pc) {
  if (pc >= image.size()) return "pc=" + std::to_string(pc) + " (stopped)";
  return "pc=" + std::to_string(pc) + " \"" + ToAsm(image.at(pc)) + "\"";
}

}  // namespace

Verdict CheckDecompSideConditions(const Policy& policy, const TimingTarget& target,
                                  const TimingOptions& opts) {
  Verdict v;
  v.check = "timing";
  v.seed = opts.seed;

  std::shared_ptr<const Image> image;
  try {
    image = Link(target.program);
  } catch (const LinkError& e) {
    throw CheckError(std::string("program does not link: ") + e.what());
  }
  const bool paced = target.compiled != nullptr && target.src != nullptr;
  if (paced && target.compiled->code.size() != image->size()) {
    throw CheckError("annotations do not match the program");
  }
  std::set<std::pair<std::size_t, std::size_t>> coupled;
  for (auto [a, b] : target.coupling) {
    coupled.emplace(a, b);
    coupled.emplace(b, a);
  }
  auto related = [&](std::size_t a, std::size_t b) { return a == b || coupled.contains({a, b}); };

  MemPairGenerator gen(policy, target.mds, opts.seed, opts.mem);
  std::mt19937_64 probe_rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<Value> probe_value(opts.mem.lo, opts.mem.hi);
  std::deque<PairTrace> tail;
  std::vector<Value> regs0(opts.registers, 0);

  for (std::size_t p = 0; p < opts.pairs; ++p) {
    auto [m1, m2] = gen.Next();
    RiscConfig c1{0, image, regs0, target.mds, m1};
    RiscConfig c2{0, image, regs0, target.mds, m2};
    WhileConfig a1{target.src, target.mds, m1};
    WhileConfig a2{target.src, target.mds, m2};
    tail.clear();

    auto fail = [&](std::string clause, std::size_t step, std::string why) {
      v.Fail(std::move(clause), step, "pair " + std::to_string(p) + ": " + std::move(why));
      for (const PairTrace& t : tail) {
        v.trace.push_back("pair=" + std::to_string(t.pair) + " step=" + std::to_string(t.step) +
                          " left " + DescribePc(*image, t.pc1) + " right " +
                          DescribePc(*image, t.pc2));
      }
      v.trace.push_back("left.mem=" + ToString(c1.mem));
      v.trace.push_back("right.mem=" + ToString(c2.mem));
      return v;
    };

    for (std::size_t step = 0; step < opts.max_steps; ++step) {
      bool s1 = RiscStops(c1);
      bool s2 = RiscStops(c2);
      if (s1 != s2) {
        return fail("stopping", step, std::string(s1 ? "left" : "right") + " stopped, " +
                                          (s1 ? "right" : "left") + " did not");
      }
      if (s1) break;
      if (tail.size() == opts.trace_tail) tail.pop_front();
      if (opts.trace_tail > 0) tail.push_back(PairTrace{p, step, c1.pc, c2.pc});

      int n1 = 0;
      int n2 = 0;
      if (paced) {
        n1 = AbsSteps(a1.cmd, target.compiled->code[c1.pc], opts.fault);
        n2 = AbsSteps(a2.cmd, target.compiled->code[c2.pc], opts.fault);
        if (n1 != n2) {
          return fail("pacing", step, "abs-steps " + std::to_string(n1) + " vs " + std::to_string(n2));
        }
      }

      StepStatus st1;
      StepStatus st2;
      try {
        st1 = StepRiscInPlace(c1, policy);
        st2 = StepRiscInPlace(c2, policy);
      } catch (const std::exception& e) {
        return fail("fault", step, e.what());
      }
      if ((st1 == StepStatus::kBlocked) != (st2 == StepStatus::kBlocked)) {
        return fail("stopping", step, "one side blocked, the other stepped");
      }
      if (st1 == StepStatus::kBlocked) break;
      ++v.steps;

      if (paced) {
        try {
          for (int i = 0; i < n1; ++i) {
            if (StepWhileInPlace(a1, policy) != StepStatus::kStepped) throw CheckError("left");
          }
          for (int i = 0; i < n2; ++i) {
            if (StepWhileInPlace(a2, policy) != StepStatus::kStepped) throw CheckError("right");
          }
        } catch (const std::exception& e) {
          return fail("pacing", step, std::string("abstract side could not follow: ") + e.what());
        }
      }

      if (!related(c1.pc, c2.pc)) {
        return fail("coupling", step, "pc divergence: " + std::to_string(c1.pc) + " vs " +
                                          std::to_string(c2.pc));
      }
      if (!(c1.mds == c2.mds)) {
        return fail("modes", step, "mode states differ: " + ToString(c1.mds) + " vs " +
                                       ToString(c2.mds));
      }

      if (opts.probe_percent > 0 && probe_rng() % 100 < opts.probe_percent) {
        std::vector<Var> targets = EnvWritable(policy, c1.mds);
        if (!targets.empty()) {
          Var x = targets[probe_rng() % targets.size()];
          Value v1 = probe_value(probe_rng);
          Value v2 = MustAgree(policy, c1.mds, c1.mem, x) ? v1 : probe_value(probe_rng);
          Memory n1m = c1.mem;
          Memory n2m = c2.mem;
          n1m.Set(x, v1);
          n2m.Set(x, v2);
          if (IsCgChange(policy, c1.mds, c1.mem, c2.mem, n1m, n2m)) {
            c1.mem = n1m;
            c2.mem = n2m;
            if (paced) {
              a1.mem = std::move(n1m);
              a2.mem = std::move(n2m);
            }
          }
        }
      }
    }
  }
  return v;
}

Verdict CheckNoHighBranching(const Policy& policy, const CmdPtr& src, const ModeState& mds,
                             const HighBranchOptions& opts) {
  Verdict v;
  v.check = "high-branching";
  v.seed = opts.seed;
  MemPairGenerator gen(policy, mds, opts.seed, opts.mem);

  for (std::size_t p = 0; p < opts.pairs; ++p) {
    auto [m1, m2] = gen.Next();
    WhileConfig a1{src, mds, m1};
    WhileConfig a2{src, mds, m2};
    auto fail = [&](std::string clause, std::size_t step, std::string why) {
      v.Fail(std::move(clause), step, "pair " + std::to_string(p) + ": " + std::move(why));
      v.trace.push_back("left=\"" + ToHeadline(LeftmostCmd(a1.cmd)) + "\" mem=" + ToString(a1.mem));
      v.trace.push_back("right=\"" + ToHeadline(LeftmostCmd(a2.cmd)) + "\" mem=" + ToString(a2.mem));
      return v;
    };
    for (std::size_t step = 0; step < opts.max_steps; ++step) {
      if (!SameCmd(a1.cmd, a2.cmd)) return fail("same-command", step, "commands diverged");
      if (WhileStops(a1)) break;
      if (const auto* branch = LeftmostCmd(a1.cmd)->as<Cmd::If>()) {
        try {
          Value e1 = Eval(a1.mem, *branch->cond);
          Value e2 = Eval(a2.mem, *branch->cond);
          if (Truthy(e1) != Truthy(e2)) {
            return fail("high-branch", step, "condition " + ToString(*branch->cond) +
                                                 " evaluates to " + std::to_string(e1) + " and " +
                                                 std::to_string(e2));
          }
        } catch (const EvalError& e) {
          return fail("fault", step, e.what());
        }
      }
      StepStatus s1;
      StepStatus s2;
      try {
        s1 = StepWhileInPlace(a1, policy);
        s2 = StepWhileInPlace(a2, policy);
      } catch (const std::exception& e) {
        return fail("fault", step, e.what());
      }
      if (s1 != s2) return fail("stopping", step, "sides disagree on blocking");
      if (s1 == StepStatus::kBlocked) break;
      ++v.steps;
    }
  }
  return v;
}

}  // namespace wr
