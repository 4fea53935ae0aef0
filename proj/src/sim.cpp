#include "wr/sim.hpp"

#include <algorithm>
#include <random>

namespace wr {

std::vector<std::string> SimTrace::Lines() const {
  std::vector<std::string> out;
  out.reserve(events.size() + 1);
  for (const TraceEvent& e : events) {
    out.push_back(std::to_string(e.step) + " " + threads[e.thread] + " " + KindName(e.effect.kind) +
                  " " + e.detail);
  }
  if (deadlock) out.push_back(std::to_string(steps) + " - deadlock all threads blocked");
  return out;
}

namespace {

struct Local {
  std::variant<WhileConfig, RiscConfig> cfg;
  bool stopped = false;
};

bool Overlaps(const VarSet& a, const VarSet& b) {
  return std::any_of(a.begin(), a.end(), [&](Var v) { return b.contains(v); });
}

VarSet Assumed(const AsmRec& r) {
  VarSet out = r.no_write;
  out.insert(r.no_read_write.begin(), r.no_read_write.end());
  return out;
}

}  // namespace

SimTrace SimRun(const Policy& policy, const std::vector<ThreadSpec>& threads, const Memory& init,
                const SimOptions& opts) {
  SimTrace trace;
  std::vector<Local> locals;
  for (const ThreadSpec& t : threads) {
    AsmRec standing = policy.StandingFor(t.name);
    for (const AsmRec& other : trace.initial_asm) {
      if (Overlaps(Assumed(standing), Assumed(other))) {
        throw CheckError("threads start with overlapping assumptions");
      }
    }
    trace.threads.push_back(t.name);
    trace.initial_asm.push_back(standing);
    ModeState mds = InitialModeState(policy, standing);
    if (const auto* cmd = std::get_if<CmdPtr>(&t.code)) {
      locals.push_back(Local{WhileConfig{*cmd, mds, Memory{}}});
    } else {
      const auto& image = std::get<std::shared_ptr<const Image>>(t.code);
      locals.push_back(Local{RiscConfig{0, image, std::vector<Value>(opts.registers, 0), mds, Memory{}}});
    }
  }
  if (locals.empty()) throw CheckError("simulation needs at least one thread");

  Memory mem = init;
  std::mt19937_64 rng(opts.seed);
  std::size_t current = 0;
  std::size_t idle_turns = 0;

  auto step_thread = [&](std::size_t t) {
    Local& local = locals[t];
    TraceEvent event;
    event.step = trace.steps;
    event.thread = t;
    StepStatus status;
    if (auto* w = std::get_if<WhileConfig>(&local.cfg)) {
      event.detail = ToHeadline(LeftmostCmd(w->cmd));
      std::swap(w->mem, mem);
      try {
        status = StepWhileInPlace(*w, policy, &event.effect);
      } catch (...) {
        std::swap(w->mem, mem);
        throw;
      }
      std::swap(w->mem, mem);
      local.stopped = status == StepStatus::kStopped || WhileStops(*w);
    } else {
      auto& r = std::get<RiscConfig>(local.cfg);
      event.detail = RiscStops(r) ? "stop" : ToAsm(r.image->at(r.pc));
      std::swap(r.mem, mem);
      try {
        status = StepRiscInPlace(r, policy, &event.effect);
      } catch (...) {
        std::swap(r.mem, mem);
        throw;
      }
      std::swap(r.mem, mem);
      local.stopped = status == StepStatus::kStopped || RiscStops(r);
    }
    if (status == StepStatus::kStepped) {
      if (event.effect.write) {
        event.detail += " -> " + event.effect.write->name() + "=" + std::to_string(event.effect.written);
      }
      trace.events.push_back(std::move(event));
      ++trace.steps;
    }
    return status;
  };

  while (trace.steps < opts.max_steps) {
    if (std::all_of(locals.begin(), locals.end(), [](const Local& l) { return l.stopped; })) {
      trace.all_stopped = true;
      break;
    }
    std::size_t t = current;
    current = (current + 1) % locals.size();
    unsigned quantum = 1 + static_cast<unsigned>(rng() % 4);
    if (locals[t].stopped) continue;
    bool progressed = false;
    for (unsigned q = 0; q < quantum && trace.steps < opts.max_steps; ++q) {
      StepStatus s = step_thread(t);
      if (s != StepStatus::kStepped) break;
      progressed = true;
      if (locals[t].stopped) break;
    }
    idle_turns = progressed ? 0 : idle_turns + 1;
    if (idle_turns > locals.size()) {
      trace.deadlock = true;
      break;
    }
  }
  trace.final_mem = std::move(mem);
  return trace;
}

Verdict CheckModeCompatibility(const Policy& policy, const SimTrace& trace) {
  Verdict v;
  v.check = "mode-compatibility";
  std::vector<AsmRec> asm_sets = trace.initial_asm;
  for (const TraceEvent& e : trace.events) {
    ++v.steps;
    const std::string& who = trace.threads[e.thread];
    for (std::size_t u = 0; u < asm_sets.size(); ++u) {
      if (u == e.thread) continue;
      const AsmRec& theirs = asm_sets[u];
      for (Var r : e.effect.reads) {
        if (theirs.no_read_write.contains(r)) {
          v.Fail("read", e.step, who + " reads '" + r.name() + "' while " + trace.threads[u] +
                                     " assumes no reads");
          v.trace.push_back(std::to_string(e.step) + " " + who + " " + e.detail);
          return v;
        }
      }
      if (e.effect.write) {
        Var x = *e.effect.write;
        if (theirs.no_write.contains(x) || theirs.no_read_write.contains(x)) {
          v.Fail("write", e.step, who + " writes '" + x.name() + "' while " + trace.threads[u] +
                                      " assumes no writes");
          v.trace.push_back(std::to_string(e.step) + " " + who + " " + e.detail);
          return v;
        }
      }
    }
    if (e.effect.lock) {
      auto it = policy.locks.find(*e.effect.lock);
      if (it == policy.locks.end()) continue;
      AsmRec& mine = asm_sets[e.thread];
      if (e.effect.kind == Effect::Kind::kAcquire) {
        mine.no_write.insert(it->second.no_write.begin(), it->second.no_write.end());
        mine.no_read_write.insert(it->second.no_read_write.begin(), it->second.no_read_write.end());
      } else if (e.effect.kind == Effect::Kind::kRelease) {
        for (Var x : it->second.no_write) mine.no_write.erase(x);
        for (Var x : it->second.no_read_write) mine.no_read_write.erase(x);
      }
    }
  }
  return v;
}

std::vector<SinkWrite> LowSinkTrace(const Policy& policy, const SimTrace& trace) {
  std::vector<SinkWrite> out;
  for (const TraceEvent& e : trace.events) {
    if (e.effect.write && IsLowSink(policy, *e.effect.write)) {
      out.push_back(SinkWrite{e.thread, *e.effect.write, e.effect.written});
    }
  }
  return out;
}

Verdict TwoRunNoninterference(const Policy& policy, const std::vector<ThreadSpec>& threads,
                              const Memory& init, const Mutation& mutation,
                              const std::vector<std::uint64_t>& seeds, std::size_t max_steps) {
  Verdict v;
  v.check = "two-run";
  Memory mutated = init;
  for (const auto& [x, value] : mutation) {
    if (!policy.IsVariable(x) || Classify(policy, init, x) != Level::kHigh) {
      throw CheckError("mutation of '" + x.name() + "' touches data that is not High");
    }
    mutated.Set(x, value);
  }
  for (std::uint64_t seed : seeds) {
    SimOptions opts;
    opts.seed = seed;
    opts.max_steps = max_steps;
    SimTrace base = SimRun(policy, threads, init, opts);
    SimTrace other = SimRun(policy, threads, mutated, opts);
    v.steps += base.steps;
    std::vector<SinkWrite> a = LowSinkTrace(policy, base);
    std::vector<SinkWrite> b = LowSinkTrace(policy, other);
    std::size_t n = std::min(a.size(), b.size());
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(a[i] == b[i])) {
        first = i;
        break;
      }
    }
    if (first < n || a.size() != b.size()) {
      v.seed = seed;
      std::string why = "low-sink traces differ at write " + std::to_string(first);
      if (first < n) {
        why += ": " + a[first].var.name() + "=" + std::to_string(a[first].value) + " vs " +
               b[first].var.name() + "=" + std::to_string(b[first].value);
      } else {
        why += ": one run writes more (" + std::to_string(a.size()) + " vs " +
               std::to_string(b.size()) + ")";
      }
      v.Fail("low-sink", first, why);
      return v;
    }
  }
  return v;
}

}  // namespace wr
