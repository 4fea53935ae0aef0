#include "wr/while_lang.hpp"

#include <sstream>

namespace wr {

const char* StatusName(StepStatus s) {
  switch (s) {
    case StepStatus::kStepped: return "stepped";
    case StepStatus::kBlocked: return "blocked";
    case StepStatus::kStopped: return "stopped";
  }
  return "?";
}

const char* KindName(Effect::Kind k) {
  switch (k) {
    case Effect::Kind::kNone: return "none";
    case Effect::Kind::kRead: return "read";
    case Effect::Kind::kWrite: return "write";
    case Effect::Kind::kBranch: return "branch";
    case Effect::Kind::kAcquire: return "acquire";
    case Effect::Kind::kRelease: return "release";
    case Effect::Kind::kLocal: return "local";
  }
  return "?";
}

namespace {

template <class T>
CmdPtr Make(T node) {
  return std::make_shared<const Cmd>(Cmd{std::move(node)});
}

}  // namespace

CmdPtr MakeSkip() { return Make(Cmd::Skip{}); }

CmdPtr MakeStop() {
  static const CmdPtr stop = Make(Cmd::Stop{});
  return stop;
}

CmdPtr MakeAssign(Var v, ExprPtr e) { return Make(Cmd::Assign{v, std::move(e)}); }
CmdPtr MakeSeq(CmdPtr first, CmdPtr second) {
  return Make(Cmd::Seq{std::move(first), std::move(second)});
}
CmdPtr MakeIf(ExprPtr cond, CmdPtr then_branch, CmdPtr else_branch) {
  return Make(Cmd::If{std::move(cond), std::move(then_branch), std::move(else_branch)});
}
CmdPtr MakeWhile(ExprPtr cond, CmdPtr body) {
  return Make(Cmd::While{std::move(cond), std::move(body)});
}
CmdPtr MakeLockAcq(Var lock) { return Make(Cmd::LockAcq{lock}); }
CmdPtr MakeLockRel(Var lock) { return Make(Cmd::LockRel{lock}); }

CmdPtr MakeBlock(std::vector<CmdPtr> cmds) {
  if (cmds.empty()) throw std::invalid_argument("empty block");
  CmdPtr out = cmds.back();
  for (auto it = cmds.rbegin() + 1; it != cmds.rend(); ++it) out = MakeSeq(*it, out);
  return out;
}

bool SameCmd(const CmdPtr& a, const CmdPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->node.index() != b->node.index()) return false;
  return std::visit(
      Overloaded{
          [](const Cmd::Skip&) { return true; },
          [](const Cmd::Stop&) { return true; },
          [&](const Cmd::Assign& x) {
            const auto& y = *b->as<Cmd::Assign>();
            return x.var == y.var && SameExpr(x.expr, y.expr);
          },
          [&](const Cmd::Seq& x) {
            const auto& y = *b->as<Cmd::Seq>();
            return SameCmd(x.first, y.first) && SameCmd(x.second, y.second);
          },
          [&](const Cmd::If& x) {
            const auto& y = *b->as<Cmd::If>();
            return SameExpr(x.cond, y.cond) && SameCmd(x.then_branch, y.then_branch) &&
                   SameCmd(x.else_branch, y.else_branch);
          },
          [&](const Cmd::While& x) {
            const auto& y = *b->as<Cmd::While>();
            return SameExpr(x.cond, y.cond) && SameCmd(x.body, y.body);
          },
          [&](const Cmd::LockAcq& x) { return x.lock == b->as<Cmd::LockAcq>()->lock; },
          [&](const Cmd::LockRel& x) { return x.lock == b->as<Cmd::LockRel>()->lock; },
      },
      a->node);
}

std::size_t HashCmd(const Cmd& c) {
  auto mix = [](std::size_t h, std::size_t x) { return h * 1000003 ^ x; };
  std::size_t tag = c.node.index() + 17;
  return std::visit(
      Overloaded{
          [&](const Cmd::Skip&) { return tag; },
          [&](const Cmd::Stop&) { return tag; },
          [&](const Cmd::Assign& x) { return mix(mix(tag, x.var.id()), HashExpr(*x.expr)); },
          [&](const Cmd::Seq& x) {
            return mix(mix(tag, HashCmd(*x.first)), HashCmd(*x.second));
          },
          [&](const Cmd::If& x) {
            return mix(mix(mix(tag, HashExpr(*x.cond)), HashCmd(*x.then_branch)),
                       HashCmd(*x.else_branch));
          },
          [&](const Cmd::While& x) { return mix(mix(tag, HashExpr(*x.cond)), HashCmd(*x.body)); },
          [&](const Cmd::LockAcq& x) { return mix(tag, x.lock.id()); },
          [&](const Cmd::LockRel& x) { return mix(tag, x.lock.id()); },
      },
      c.node);
}

std::size_t CmdSize(const Cmd& c) {
  return std::visit(Overloaded{
                        [](const Cmd::Seq& x) { return 1 + CmdSize(*x.first) + CmdSize(*x.second); },
                        [](const Cmd::If& x) {
                          return 1 + CmdSize(*x.then_branch) + CmdSize(*x.else_branch);
                        },
                        [](const Cmd::While& x) { return 1 + CmdSize(*x.body); },
                        [](const auto&) { return std::size_t{1}; },
                    },
                    c.node);
}

const CmdPtr& LeftmostCmd(const CmdPtr& c) {
  const CmdPtr* cur = &c;
  while (const auto* seq = (*cur)->as<Cmd::Seq>()) cur = &seq->first;
  return *cur;
}

void ForEachCmd(const CmdPtr& c, const std::function<void(const CmdPtr&)>& fn) {
  fn(c);
  std::visit(Overloaded{
                 [&](const Cmd::Seq& x) {
                   ForEachCmd(x.first, fn);
                   ForEachCmd(x.second, fn);
                 },
                 [&](const Cmd::If& x) {
                   ForEachCmd(x.then_branch, fn);
                   ForEachCmd(x.else_branch, fn);
                 },
                 [&](const Cmd::While& x) { ForEachCmd(x.body, fn); },
                 [](const auto&) {},
             },
             c->node);
}

bool WhileStops(const WhileConfig& cfg) { return cfg.cmd->is<Cmd::Stop>(); }

namespace {

class Stepper {
 public:
  Stepper(const Policy& policy, ModeState& mds, Memory& mem, Effect* effect)
      : policy_(policy), mds_(mds), mem_(mem), effect_(effect) {}

  StepStatus Step(const CmdPtr& c, CmdPtr& out) {
    return std::visit(
        Overloaded{
            [&](const Cmd::Skip&) {
              Note(Effect::Kind::kLocal);
              out = MakeStop();
              return StepStatus::kStepped;
            },
            [&](const Cmd::Stop&) { return StepStatus::kStopped; },
            [&](const Cmd::Assign& x) {
              if (!mem_.Contains(x.var)) {
                throw EvalError("assignment to unknown variable '" + x.var.name() + "'");
              }
              Value v = Eval(mem_, *x.expr);
              mem_.Set(x.var, v);
              if (effect_) {
                effect_->kind = Effect::Kind::kWrite;
                effect_->reads = ExprVars(*x.expr);
                effect_->write = x.var;
                effect_->written = v;
              }
              out = MakeStop();
              return StepStatus::kStepped;
            },
            [&](const Cmd::Seq& x) {
              if (x.first->is<Cmd::Stop>()) return Step(x.second, out);
              CmdPtr first;
              StepStatus s = Step(x.first, first);
              if (s != StepStatus::kStepped) return s;
              out = first->is<Cmd::Stop>() ? x.second : MakeSeq(std::move(first), x.second);
              return s;
            },
            [&](const Cmd::If& x) {
              Value v = Eval(mem_, *x.cond);
              if (effect_) {
                effect_->kind = Effect::Kind::kBranch;
                effect_->reads = ExprVars(*x.cond);
              }
              out = Truthy(v) ? x.then_branch : x.else_branch;
              return StepStatus::kStepped;
            },
            [&](const Cmd::While& x) {
              Note(Effect::Kind::kLocal);
              out = MakeIf(x.cond, MakeSeq(x.body, c), MakeStop());
              return StepStatus::kStepped;
            },
            [&](const Cmd::LockAcq& x) {
              if (!policy_.IsLock(x.lock)) {
                throw DisciplineError("'" + x.lock.name() + "' is not a lock");
              }
              if (mem_.Get(x.lock) != 0) return StepStatus::kBlocked;
              mem_.Set(x.lock, 1);
              ApplyAcquire(policy_, x.lock, mds_);
              if (effect_) {
                effect_->kind = Effect::Kind::kAcquire;
                effect_->lock = x.lock;
              }
              out = MakeStop();
              return StepStatus::kStepped;
            },
            [&](const Cmd::LockRel& x) {
              if (!HoldsLock(policy_, mds_, mem_, x.lock)) {
                throw DisciplineError("release of lock '" + x.lock.name() + "' that is not held");
              }
              mem_.Set(x.lock, 0);
              ApplyRelease(policy_, x.lock, mds_);
              if (effect_) {
                effect_->kind = Effect::Kind::kRelease;
                effect_->lock = x.lock;
              }
              out = MakeStop();
              return StepStatus::kStepped;
            },
        },
        c->node);
  }

 private:
  void Note(Effect::Kind k) {
    if (effect_) effect_->kind = k;
  }

  const Policy& policy_;
  ModeState& mds_;
  Memory& mem_;
  Effect* effect_;
};

}  // namespace

StepStatus StepWhileInPlace(WhileConfig& cfg, const Policy& policy, Effect* effect) {
  if (effect) effect->Clear();
  // Every failure path (Blocked, Stopped, thrown errors) is detected before
  // any mutation, so cfg is only changed by a completed step.
  CmdPtr next;
  Stepper stepper(policy, cfg.mds, cfg.mem, effect);
  StepStatus s = stepper.Step(cfg.cmd, next);
  if (s == StepStatus::kStepped) cfg.cmd = std::move(next);
  return s;
}

WhileStep StepWhile(const WhileConfig& cfg, const Policy& policy) {
  WhileConfig next = cfg;
  switch (StepWhileInPlace(next, policy)) {
    case StepStatus::kStepped: return next;
    case StepStatus::kBlocked: return Blocked{};
    case StepStatus::kStopped: return Stopped{};
  }
  return Stopped{};
}

namespace {

void Emit(std::ostringstream& out, const CmdPtr& c, int indent) {
  std::string pad(indent * 2, ' ');
  std::visit(Overloaded{
                 [&](const Cmd::Skip&) { out << pad << "skip;\n"; },
                 [&](const Cmd::Stop&) { out << pad << "stop;\n"; },
                 [&](const Cmd::Assign& x) {
                   out << pad << x.var.name() << " := " << ToString(*x.expr) << ";\n";
                 },
                 [&](const Cmd::Seq& x) {
                   Emit(out, x.first, indent);
                   Emit(out, x.second, indent);
                 },
                 [&](const Cmd::If& x) {
                   out << pad << "if " << ToString(*x.cond) << " {\n";
                   Emit(out, x.then_branch, indent + 1);
                   out << pad << "} else {\n";
                   Emit(out, x.else_branch, indent + 1);
                   out << pad << "}\n";
                 },
                 [&](const Cmd::While& x) {
                   out << pad << "while " << ToString(*x.cond) << " {\n";
                   Emit(out, x.body, indent + 1);
                   out << pad << "}\n";
                 },
                 [&](const Cmd::LockAcq& x) { out << pad << "acquire " << x.lock.name() << ";\n"; },
                 [&](const Cmd::LockRel& x) { out << pad << "release " << x.lock.name() << ";\n"; },
             },
             c->node);
}

}  // namespace

std::string ToSource(const CmdPtr& c, int indent) {
  std::ostringstream out;
  Emit(out, c, indent);
  return out.str();
}

std::string ToCompactString(const CmdPtr& c) {
  std::string s = ToSource(c);
  std::string out;
  bool space = false;
  for (char ch : s) {
    if (ch == '\n' || ch == ' ') {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += ch;
  }
  return out;
}

}  // namespace wr

namespace wr {

std::string ToHeadline(const CmdPtr& c) {
  return std::visit(Overloaded{
                        [](const Cmd::Skip&) -> std::string { return "skip;"; },
                        [](const Cmd::Stop&) -> std::string { return "stop;"; },
                        [](const Cmd::Assign& x) {
                          return x.var.name() + " := " + ToString(*x.expr) + ";";
                        },
                        [](const Cmd::Seq& x) { return ToHeadline(x.first) + " ..."; },
                        [](const Cmd::If& x) { return "if " + ToString(*x.cond) + " {...}"; },
                        [](const Cmd::While& x) { return "while " + ToString(*x.cond) + " {...}"; },
                        [](const Cmd::LockAcq& x) { return "acquire " + x.lock.name() + ";"; },
                        [](const Cmd::LockRel& x) { return "release " + x.lock.name() + ";"; },
                    },
                    c->node);
}

}  // namespace wr
