#include "wr/risc.hpp"

#include <algorithm>
#include <sstream>

namespace wr {

std::size_t ResolveLabel(const Program& p, Label l) {
  for (std::size_t i = 0; i < p.code.size(); ++i) {
    if (p.code[i].label == l) return i;
  }
  if (p.exit_label == l) return p.code.size();
  throw LinkError("unknown label L" + std::to_string(l));
}

Image::Image(Program program) : program_(std::move(program)) {
  for (std::size_t i = 0; i < program_.code.size(); ++i) {
    if (auto l = program_.code[i].label) {
      if (!targets_.emplace(*l, i).second) {
        throw LinkError("duplicate label L" + std::to_string(*l));
      }
    }
  }
  if (program_.exit_label && !targets_.emplace(*program_.exit_label, program_.code.size()).second) {
    throw LinkError("exit label L" + std::to_string(*program_.exit_label) +
                    " also labels an instruction");
  }
  for (Label t : JumpTargets(program_)) Resolve(t);
}

std::size_t Image::Resolve(Label l) const {
  auto it = targets_.find(l);
  if (it == targets_.end()) throw LinkError("unknown label L" + std::to_string(l));
  return it->second;
}

std::shared_ptr<const Image> Link(Program program) {
  return std::make_shared<const Image>(std::move(program));
}

bool RiscStops(const RiscConfig& cfg) { return cfg.pc >= cfg.image->size(); }

namespace {

Value& RegAt(RiscConfig& cfg, Reg r) {
  if (r >= cfg.regs.size()) {
    throw ConfigError("register r" + std::to_string(r) + " out of range (" +
                      std::to_string(cfg.regs.size()) + " registers)");
  }
  return cfg.regs[r];
}

}  // namespace

StepStatus StepRiscInPlace(RiscConfig& cfg, const Policy& policy, Effect* effect) {
  if (effect) effect->Clear();
  if (RiscStops(cfg)) return StepStatus::kStopped;
  const Instruction& ins = cfg.image->at(cfg.pc);
  auto note = [&](Effect::Kind k) {
    if (effect) effect->kind = k;
  };
  return std::visit(
      Overloaded{
          [&](const Instr::Load& x) {
            Value v = cfg.mem.Get(x.var);
            RegAt(cfg, x.reg) = v;
            if (effect) {
              effect->kind = Effect::Kind::kRead;
              effect->reads.insert(x.var);
            }
            ++cfg.pc;
            return StepStatus::kStepped;
          },
          [&](const Instr::Store& x) {
            if (!cfg.mem.Contains(x.var)) {
              throw EvalError("store to unknown variable '" + x.var.name() + "'");
            }
            Value v = RegAt(cfg, x.reg);
            cfg.mem.Set(x.var, v);
            if (effect) {
              effect->kind = Effect::Kind::kWrite;
              effect->write = x.var;
              effect->written = v;
            }
            ++cfg.pc;
            return StepStatus::kStepped;
          },
          [&](const Instr::Jmp& x) {
            note(Effect::Kind::kLocal);
            cfg.pc = cfg.image->Resolve(x.target);
            return StepStatus::kStepped;
          },
          [&](const Instr::Jz& x) {
            note(Effect::Kind::kLocal);
            std::size_t target = cfg.image->Resolve(x.target);
            cfg.pc = RegAt(cfg, x.reg) == 0 ? target : cfg.pc + 1;
            return StepStatus::kStepped;
          },
          [&](const Instr::Nop&) {
            note(Effect::Kind::kLocal);
            ++cfg.pc;
            return StepStatus::kStepped;
          },
          [&](const Instr::MoveK& x) {
            note(Effect::Kind::kLocal);
            RegAt(cfg, x.reg) = x.value;
            ++cfg.pc;
            return StepStatus::kStepped;
          },
          [&](const Instr::MoveR& x) {
            note(Effect::Kind::kLocal);
            Value v = RegAt(cfg, x.src);
            RegAt(cfg, x.dst) = v;
            ++cfg.pc;
            return StepStatus::kStepped;
          },
          [&](const Instr::Op& x) {
            note(Effect::Kind::kLocal);
            Value b = RegAt(cfg, x.src);
            Value& a = RegAt(cfg, x.dst);
            a = Apply(x.op, a, b);
            ++cfg.pc;
            return StepStatus::kStepped;
          },
          [&](const Instr::LockAcq& x) {
            if (!policy.IsLock(x.lock)) {
              throw DisciplineError("'" + x.lock.name() + "' is not a lock");
            }
            if (cfg.mem.Get(x.lock) != 0) return StepStatus::kBlocked;
            cfg.mem.Set(x.lock, 1);
            ApplyAcquire(policy, x.lock, cfg.mds);
            if (effect) {
              effect->kind = Effect::Kind::kAcquire;
              effect->lock = x.lock;
            }
            ++cfg.pc;
            return StepStatus::kStepped;
          },
          [&](const Instr::LockRel& x) {
            if (!HoldsLock(policy, cfg.mds, cfg.mem, x.lock)) {
              throw DisciplineError("release of lock '" + x.lock.name() + "' that is not held");
            }
            cfg.mem.Set(x.lock, 0);
            ApplyRelease(policy, x.lock, cfg.mds);
            if (effect) {
              effect->kind = Effect::Kind::kRelease;
              effect->lock = x.lock;
            }
            ++cfg.pc;
            return StepStatus::kStepped;
          },
      },
      ins.body);
}

RiscStep StepRisc(const RiscConfig& cfg, const Policy& policy) {
  RiscConfig next = cfg;
  switch (StepRiscInPlace(next, policy)) {
    case StepStatus::kStepped: return next;
    case StepStatus::kBlocked: return Blocked{};
    case StepStatus::kStopped: return Stopped{};
  }
  return Stopped{};
}

std::vector<Label> JumpTargets(const Program& p) {
  std::vector<Label> out;
  for (const Instruction& i : p.code) {
    if (const auto* j = i.as<Instr::Jmp>()) out.push_back(j->target);
    if (const auto* j = i.as<Instr::Jz>()) out.push_back(j->target);
  }
  return out;
}

std::vector<Label> DefinedLabels(const Program& p) {
  std::vector<Label> out;
  for (const Instruction& i : p.code) {
    if (i.label) out.push_back(*i.label);
  }
  return out;
}

bool Joinable(const Program& p1, const Program& p2) {
  std::vector<Label> own = DefinedLabels(p1);
  auto in_p1 = [&](Label l) { return std::find(own.begin(), own.end(), l) != own.end(); };
  std::optional<Label> first_of_p2 = p2.code.empty() ? std::nullopt : p2.code.front().label;
  for (Label t : JumpTargets(p1)) {
    if (!in_p1(t) && first_of_p2 != t) return false;
  }
  for (Label t : JumpTargets(p2)) {
    if (in_p1(t)) return false;
  }
  return true;
}

const char* OpcodeName(const Instr::Body& b) {
  return std::visit(Overloaded{
                        [](const Instr::Load&) { return "LOAD"; },
                        [](const Instr::Store&) { return "STORE"; },
                        [](const Instr::Jmp&) { return "JMP"; },
                        [](const Instr::Jz&) { return "JZ"; },
                        [](const Instr::Nop&) { return "NOP"; },
                        [](const Instr::MoveK&) { return "MOVEK"; },
                        [](const Instr::MoveR&) { return "MOVER"; },
                        [](const Instr::Op&) { return "OP"; },
                        [](const Instr::LockAcq&) { return "LOCKACQ"; },
                        [](const Instr::LockRel&) { return "LOCKREL"; },
                    },
                    b);
}

std::string ToAsm(const Instr::Body& b) {
  auto reg = [](Reg r) { return "r" + std::to_string(r); };
  auto lab = [](Label l) { return "L" + std::to_string(l); };
  std::string op = OpcodeName(b);
  return std::visit(
      Overloaded{
          [&](const Instr::Load& x) { return op + " " + reg(x.reg) + " " + x.var.name(); },
          [&](const Instr::Store& x) { return op + " " + x.var.name() + " " + reg(x.reg); },
          [&](const Instr::Jmp& x) { return op + " " + lab(x.target); },
          [&](const Instr::Jz& x) { return op + " " + lab(x.target) + " " + reg(x.reg); },
          [&](const Instr::Nop&) { return op; },
          [&](const Instr::MoveK& x) { return op + " " + reg(x.reg) + " " + std::to_string(x.value); },
          [&](const Instr::MoveR& x) { return op + " " + reg(x.dst) + " " + reg(x.src); },
          [&](const Instr::Op& x) {
            return op + " " + Symbol(x.op) + " " + reg(x.dst) + " " + reg(x.src);
          },
          [&](const Instr::LockAcq& x) { return op + " " + x.lock.name(); },
          [&](const Instr::LockRel& x) { return op + " " + x.lock.name(); },
      },
      b);
}

std::string ToAsm(const Instruction& i) {
  std::string body = ToAsm(i.body);
  if (!i.label) return body;
  return "L" + std::to_string(*i.label) + ": " + body;
}

}  // namespace wr
