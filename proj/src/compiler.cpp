#include "wr/compiler.hpp"

#include <algorithm>
#include <sstream>

namespace wr {

bool SameRegRec(const RegRec& a, const RegRec& b) {
  if (a.size() != b.size()) return false;
  auto it = b.begin();
  for (const auto& [r, e] : a) {
    if (it->first != r || !SameExpr(e, it->second)) return false;
    ++it;
  }
  return true;
}

bool SameCompRec(const CompRec& a, const CompRec& b) {
  return a.asmrec == b.asmrec && SameRegRec(a.regrec, b.regrec);
}

RegRec MeetRegRec(const RegRec& a, const RegRec& b) {
  RegRec out;
  for (const auto& [r, e] : a) {
    auto it = b.find(r);
    if (it != b.end() && SameExpr(e, it->second)) out.emplace(r, e);
  }
  return out;
}

std::string ToString(const RegRec& regrec) {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (const auto& [r, e] : regrec) {
    if (!first) out << ", ";
    first = false;
    out << "r" << r << "->" << ToString(*e);
  }
  out << "}";
  return out.str();
}

const char* PhaseName(Phase p) {
  switch (p) {
    case Phase::kSkip: return "skip";
    case Phase::kAssignExpr: return "assign_expr";
    case Phase::kAssignStore: return "assign_store";
    case Phase::kIfExpr: return "if_expr";
    case Phase::kIfJump: return "if_jump";
    case Phase::kWhileHead: return "while_head";
    case Phase::kWhileExpr: return "while_expr";
    case Phase::kWhileJump: return "while_jump";
    case Phase::kLockAcq: return "lock_acq";
    case Phase::kLockRel: return "lock_rel";
    case Phase::kEpilogue: return "epilogue";
  }
  return "?";
}

std::optional<Phase> PhaseFromName(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(Phase::kEpilogue); ++i) {
    auto p = static_cast<Phase>(i);
    if (name == PhaseName(p)) return p;
  }
  return std::nullopt;
}

Program CompileOutput::ToProgram() const {
  Program p;
  p.code.reserve(code.size());
  for (const AnnotatedInstr& a : code) p.code.push_back(a.instr);
  p.exit_label = exit_label;
  return p;
}

const CompRec& CompileOutput::RecordAt(std::size_t pc) const {
  return pc < code.size() ? code[pc].rec : final_rec;
}

std::optional<Reg> RegAlloc(const RegRec& regrec, const RegSet& avoid, Reg registers) {
  for (Reg r = 0; r < registers; ++r) {
    if (!avoid.contains(r) && !regrec.contains(r)) return r;
  }
  for (Reg r = 0; r < registers; ++r) {
    if (!avoid.contains(r)) return r;
  }
  return std::nullopt;
}

std::optional<Reg> RegAllocCached(const RegRec& regrec, const RegSet& avoid, Var v,
                                  Reg registers) {
  for (const auto& [r, e] : regrec) {
    if (r >= registers || avoid.contains(r)) continue;
    const auto* load = std::get_if<Expr::Load>(&e->node);
    if (load && load->var == v) return r;
  }
  return std::nullopt;
}

namespace {

void Unite(VarSet& into, const VarSet& from) { into.insert(from.begin(), from.end()); }

bool Covers(const VarSet& big, const VarSet& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

std::optional<std::string> ReadProblem(const Policy& policy, const AsmRec& asmrec,
                                       const Expr& e) {
  for (Var v : ExprVars(e)) {
    if (policy.IsLock(v)) return "lock '" + v.name() + "' used as a value";
    if (!policy.IsVariable(v)) return "unknown variable '" + v.name() + "'";
    if (VarStable(asmrec, policy, v)) continue;
    if (auto lock = policy.GoverningLock(v)) {
      return "data race: read of '" + v.name() + "' without holding '" + lock->name() + "'";
    }
    for (Var c : Cvars(policy, v)) {
      if (!VarStable(asmrec, policy, c)) {
        return "data race: read of '" + v.name() + "' while its control variable '" + c.name() +
               "' is not stable";
      }
    }
    return "data race: read of '" + v.name() +
           "', which no held lock or standing assumption keeps stable";
  }
  return std::nullopt;
}

std::optional<std::string> WriteProblem(const Policy& policy, const AsmRec& asmrec, Var v) {
  if (policy.IsLock(v)) return "assignment to lock '" + v.name() + "'";
  if (!policy.IsVariable(v)) return "assignment to unknown variable '" + v.name() + "'";
  if (auto lock = policy.GoverningLock(v)) {
    if (!VarStable(asmrec, policy, v)) {
      return "data race: write to '" + v.name() + "' without holding '" + lock->name() + "'";
    }
  }
  return std::nullopt;
}

std::optional<std::string> AcquireProblem(const Policy& policy, const AsmRec& asmrec, Var k) {
  auto it = policy.locks.find(k);
  if (it == policy.locks.end()) return "'" + k.name() + "' is not a lock";
  const LockInterp& interp = it->second;
  bool empty = interp.no_write.empty() && interp.no_read_write.empty();
  if (!empty && Covers(asmrec.no_write, interp.no_write) &&
      Covers(asmrec.no_read_write, interp.no_read_write)) {
    return "lock '" + k.name() + "' acquired while already held";
  }
  return std::nullopt;
}

std::optional<std::string> ReleaseProblem(const Policy& policy, const AsmRec& asmrec, Var k) {
  auto it = policy.locks.find(k);
  if (it == policy.locks.end()) return "'" + k.name() + "' is not a lock";
  const LockInterp& interp = it->second;
  if (!Covers(asmrec.no_write, interp.no_write) ||
      !Covers(asmrec.no_read_write, interp.no_read_write)) {
    return "release of lock '" + k.name() + "' that is not held";
  }
  return std::nullopt;
}

AsmRec AfterAcquire(const Policy& policy, AsmRec asmrec, Var k) {
  const LockInterp& interp = policy.locks.at(k);
  Unite(asmrec.no_write, interp.no_write);
  Unite(asmrec.no_read_write, interp.no_read_write);
  return asmrec;
}

AsmRec AfterRelease(const Policy& policy, AsmRec asmrec, Var k) {
  const LockInterp& interp = policy.locks.at(k);
  for (Var v : interp.no_write) asmrec.no_write.erase(v);
  for (Var v : interp.no_read_write) asmrec.no_read_write.erase(v);
  return asmrec;
}

RegRec KeepStable(const RegRec& regrec, const AsmRec& asmrec, const Policy& policy) {
  RegRec out;
  for (const auto& [r, e] : regrec) {
    bool stable = true;
    for (Var v : ExprVars(*e)) stable = stable && VarStable(asmrec, policy, v);
    if (stable) out.emplace(r, e);
  }
  return out;
}

void Emit(std::vector<AnnotatedInstr>& code, std::optional<Label>& entry, Instr::Body body,
          const CompRec& rec, Phase phase, const Cmd* origin) {
  code.push_back(AnnotatedInstr{Instruction{entry, std::move(body)}, rec, phase, origin});
  entry.reset();
}

class ExprCompiler {
 public:
  ExprCompiler(const CompileContext& ctx, ExprCode& out, std::optional<Label> entry, Phase phase,
               const Cmd* origin)
      : ctx_(ctx), out_(out), entry_(entry), phase_(phase), origin_(origin) {}

  Reg Compile(const ExprPtr& e, const RegSet& avoid) {
    if (out_.failed) return 0;
    return std::visit(
        Overloaded{
            [&](const Expr::Const& x) {
              auto r = Alloc(avoid);
              if (!r) return Reg{0};
              Put(Instr::MoveK{*r, x.value});
              out_.rec.regrec.insert_or_assign(*r, e);
              return *r;
            },
            [&](const Expr::Load& x) {
              RegRec& regrec = out_.rec.regrec;
              if (auto cached = RegAllocCached(regrec, avoid, x.var, ctx_.registers)) {
                return *cached;
              }
              // A register we must not disturb may still hold v; copy it
              // rather than loading v a second time.
              std::optional<Reg> held;
              for (const auto& [r, held_e] : regrec) {
                const auto* load = std::get_if<Expr::Load>(&held_e->node);
                if (load && load->var == x.var) {
                  held = r;
                  break;
                }
              }
              auto r = Alloc(avoid);
              if (!r) return Reg{0};
              if (held) {
                Put(Instr::MoveR{*r, *held});
              } else {
                Put(Instr::Load{*r, x.var});
              }
              regrec.insert_or_assign(*r, e);
              return *r;
            },
            [&](const Expr::Binary& x) {
              Reg left = Compile(x.lhs, avoid);
              if (out_.failed) return Reg{0};
              RegSet avoid_right = avoid;
              avoid_right.insert(left);
              Reg right = Compile(x.rhs, avoid_right);
              if (out_.failed) return Reg{0};
              Put(Instr::Op{x.op, left, right});
              out_.rec.regrec.insert_or_assign(left, e);
              return left;
            },
        },
        e->node);
  }

  std::optional<Label> entry() const { return entry_; }

 private:
  std::optional<Reg> Alloc(const RegSet& avoid) {
    auto r = RegAlloc(out_.rec.regrec, avoid, ctx_.registers);
    if (!r) {
      out_.failed = true;
      out_.diagnostics.push_back("register exhaustion: expression needs more than " +
                                 std::to_string(ctx_.registers) + " registers");
    }
    return r;
  }

  void Put(Instr::Body body) { Emit(out_.code, entry_, std::move(body), out_.rec, phase_, origin_); }

  const CompileContext& ctx_;
  ExprCode& out_;
  std::optional<Label> entry_;
  Phase phase_;
  const Cmd* origin_;
};

void Append(std::vector<AnnotatedInstr>& into, std::vector<AnnotatedInstr>&& from) {
  into.insert(into.end(), std::make_move_iterator(from.begin()),
              std::make_move_iterator(from.end()));
}

void Fail(CompileOutput& out, std::string why) {
  out.failed = true;
  out.diagnostics.push_back(std::move(why));
}

void Absorb(CompileOutput& out, CompileOutput&& part) {
  Append(out.code, std::move(part.code));
  out.failed = out.failed || part.failed;
  for (auto& d : part.diagnostics) out.diagnostics.push_back(std::move(d));
}

}  // namespace

ExprCode CompileExpr(const CompileContext& ctx, const CompRec& rec, const RegSet& avoid,
                     std::optional<Label> entry, const ExprPtr& e, Phase phase,
                     const Cmd* origin) {
  ExprCode out;
  out.rec = rec;
  ExprCompiler compiler(ctx, out, entry, phase, origin);
  out.result = compiler.Compile(e, avoid);
  return out;
}

CompileOutput CompileCmd(const CompileContext& ctx, const CompRec& rec,
                         std::optional<Label> entry, Label next_label, const CmdPtr& c) {
  const Policy& policy = ctx.policy;
  CompileOutput out;
  out.next_label = next_label;
  out.final_rec = rec;
  const Cmd* origin = c.get();

  auto expr_into = [&](const ExprPtr& e, const CompRec& from, std::optional<Label> label,
                       Phase phase) {
    if (auto problem = ReadProblem(policy, from.asmrec, *e)) Fail(out, *problem);
    ExprCode ec = CompileExpr(ctx, from, {}, label, e, phase, origin);
    if (ec.failed) {
      out.failed = true;
      for (auto& d : ec.diagnostics) out.diagnostics.push_back(std::move(d));
    }
    return ec;
  };

  std::visit(
      Overloaded{
          [&](const Cmd::Skip&) { Emit(out.code, entry, Instr::Nop{}, rec, Phase::kSkip, origin); },
          [&](const Cmd::Stop&) { Fail(out, "stop cannot be compiled"); },
          [&](const Cmd::Assign& x) {
            if (auto problem = WriteProblem(policy, rec.asmrec, x.var)) Fail(out, *problem);
            ExprCode ec = expr_into(x.expr, rec, entry, Phase::kAssignExpr);
            std::optional<Label> store_label = ec.code.empty() ? entry : std::nullopt;
            Append(out.code, std::move(ec.code));
            Emit(out.code, store_label, Instr::Store{x.var, ec.result}, ec.rec,
                 Phase::kAssignStore, origin);
            CompRec after = ec.rec;
            RegRec kept;
            for (const auto& [r, e] : after.regrec) {
              if (!Mentions(*e, x.var)) kept.emplace(r, e);
            }
            if (VarStable(after.asmrec, policy, x.var)) kept.insert_or_assign(ec.result, MakeVar(x.var));
            after.regrec = std::move(kept);
            out.final_rec = std::move(after);
          },
          [&](const Cmd::Seq& x) {
            CompileOutput first = CompileCmd(ctx, rec, entry, next_label, x.first);
            CompileOutput second =
                CompileCmd(ctx, first.final_rec, first.exit_label, first.next_label, x.second);
            out.exit_label = second.exit_label;
            out.next_label = second.next_label;
            out.final_rec = second.final_rec;
            Absorb(out, std::move(first));
            Absorb(out, std::move(second));
          },
          [&](const Cmd::If& x) {
            ExprCode ec = expr_into(x.cond, rec, entry, Phase::kIfExpr);
            std::optional<Label> jz_label = ec.code.empty() ? entry : std::nullopt;
            Label br = next_label;
            Label ex = next_label + 1;
            const CompRec& c1 = ec.rec;
            Append(out.code, std::move(ec.code));
            Emit(out.code, jz_label, Instr::Jz{br, ec.result}, c1, Phase::kIfJump, origin);
            CompileOutput then_out = CompileCmd(ctx, c1, std::nullopt, next_label + 2, x.then_branch);
            CompileOutput else_out = CompileCmd(ctx, c1, br, then_out.next_label, x.else_branch);
            std::optional<Label> then_exit = then_out.exit_label;
            std::optional<Label> else_exit = else_out.exit_label;
            CompRec then_rec = then_out.final_rec;
            CompRec else_rec = else_out.final_rec;
            out.next_label = else_out.next_label;
            Absorb(out, std::move(then_out));
            Emit(out.code, then_exit, Instr::Jmp{ex}, then_rec, Phase::kEpilogue, origin);
            Absorb(out, std::move(else_out));
            Emit(out.code, else_exit, Instr::Nop{}, else_rec, Phase::kEpilogue, origin);
            if (!(then_rec.asmrec == else_rec.asmrec)) {
              Fail(out, "branches of 'if " + ToString(*x.cond) + "' act inconsistently on locks");
            }
            out.final_rec = CompRec{MeetRegRec(then_rec.regrec, else_rec.regrec), then_rec.asmrec};
            out.exit_label = ex;
          },
          [&](const Cmd::While& x) {
            Label nl = next_label;
            Label header = entry ? *entry : nl++;
            Label ex = nl++;
            CompRec flushed{RegRec{}, rec.asmrec};
            ExprCode ec = expr_into(x.cond, flushed, header, Phase::kWhileExpr);
            if (!ec.code.empty()) ec.code.front().phase = Phase::kWhileHead;
            CompRec c1 = ec.rec;
            Append(out.code, std::move(ec.code));
            std::optional<Label> none;
            Emit(out.code, none, Instr::Jz{ex, ec.result}, c1, Phase::kWhileJump, origin);
            CompileOutput body = CompileCmd(ctx, c1, std::nullopt, nl, x.body);
            std::optional<Label> body_exit = body.exit_label;
            CompRec body_rec = body.final_rec;
            out.next_label = body.next_label;
            Absorb(out, std::move(body));
            Emit(out.code, body_exit, Instr::Jmp{header}, body_rec, Phase::kEpilogue, origin);
            if (!(body_rec.asmrec == rec.asmrec)) {
              Fail(out, "body of 'while " + ToString(*x.cond) + "' does not restore the lock state");
            }
            out.final_rec = c1;
            out.exit_label = ex;
          },
          [&](const Cmd::LockAcq& x) {
            if (auto problem = AcquireProblem(policy, rec.asmrec, x.lock)) {
              Fail(out, *problem);
              Emit(out.code, entry, Instr::LockAcq{x.lock}, rec, Phase::kLockAcq, origin);
              return;
            }
            Emit(out.code, entry, Instr::LockAcq{x.lock}, rec, Phase::kLockAcq, origin);
            out.final_rec = CompRec{rec.regrec, AfterAcquire(policy, rec.asmrec, x.lock)};
          },
          [&](const Cmd::LockRel& x) {
            if (auto problem = ReleaseProblem(policy, rec.asmrec, x.lock)) {
              Fail(out, *problem);
              Emit(out.code, entry, Instr::LockRel{x.lock}, rec, Phase::kLockRel, origin);
              return;
            }
            AsmRec released = AfterRelease(policy, rec.asmrec, x.lock);
            RegRec kept = KeepStable(rec.regrec, released, policy);
            Emit(out.code, entry, Instr::LockRel{x.lock}, CompRec{kept, rec.asmrec}, Phase::kLockRel,
                 origin);
            out.final_rec = CompRec{std::move(kept), std::move(released)};
          },
      },
      c->node);
  return out;
}

CompileOutput CompileProgram(const Policy& policy, const CmdPtr& c, const AsmRec& standing,
                             Reg registers) {
  CompileContext ctx{policy, registers};
  CompRec start{RegRec{}, standing};
  return CompileCmd(ctx, start, std::nullopt, 0, c);
}

namespace {

bool CheckStatic(const CmdPtr& c, AsmRec& asmrec, const Policy& policy,
                 std::vector<std::string>* why) {
  auto bad = [&](const std::string& msg) {
    if (why) why->push_back(msg);
    return false;
  };
  return std::visit(
      Overloaded{
          [&](const Cmd::Skip&) { return true; },
          [&](const Cmd::Stop&) { return true; },
          [&](const Cmd::Assign& x) {
            bool ok = true;
            if (auto p = ReadProblem(policy, asmrec, *x.expr)) ok = bad(*p);
            if (auto p = WriteProblem(policy, asmrec, x.var)) ok = bad(*p);
            return ok;
          },
          [&](const Cmd::Seq& x) {
            bool a = CheckStatic(x.first, asmrec, policy, why);
            bool b = CheckStatic(x.second, asmrec, policy, why);
            return a && b;
          },
          [&](const Cmd::If& x) {
            bool ok = true;
            if (auto p = ReadProblem(policy, asmrec, *x.cond)) ok = bad(*p);
            AsmRec then_asm = asmrec;
            AsmRec else_asm = asmrec;
            ok = CheckStatic(x.then_branch, then_asm, policy, why) && ok;
            ok = CheckStatic(x.else_branch, else_asm, policy, why) && ok;
            if (!(then_asm == else_asm)) {
              ok = bad("branches of 'if " + ToString(*x.cond) + "' act inconsistently on locks");
            }
            asmrec = then_asm;
            return ok;
          },
          [&](const Cmd::While& x) {
            bool ok = true;
            if (auto p = ReadProblem(policy, asmrec, *x.cond)) ok = bad(*p);
            AsmRec body_asm = asmrec;
            ok = CheckStatic(x.body, body_asm, policy, why) && ok;
            if (!(body_asm == asmrec)) {
              ok = bad("body of 'while " + ToString(*x.cond) + "' does not restore the lock state");
            }
            return ok;
          },
          [&](const Cmd::LockAcq& x) {
            if (auto p = AcquireProblem(policy, asmrec, x.lock)) return bad(*p);
            asmrec = AfterAcquire(policy, asmrec, x.lock);
            return true;
          },
          [&](const Cmd::LockRel& x) {
            if (auto p = ReleaseProblem(policy, asmrec, x.lock)) return bad(*p);
            asmrec = AfterRelease(policy, asmrec, x.lock);
            return true;
          },
      },
      c->node);
}

bool ContainsStop(const CmdPtr& c) {
  bool found = false;
  ForEachCmd(c, [&](const CmdPtr& n) { found = found || n->is<Cmd::Stop>(); });
  return found;
}

}  // namespace

bool NoUnstableExprs(const CmdPtr& c, const CompRec& rec, const Policy& policy,
                     std::vector<std::string>* why) {
  AsmRec asmrec = rec.asmrec;
  return CheckStatic(c, asmrec, policy, why);
}

bool CompileCmdInputReqs(const CompRec& rec, std::optional<Label> entry, Label next_label,
                         const CmdPtr& c, const Policy& policy) {
  if (ContainsStop(c)) return false;
  if (entry && *entry >= next_label) return false;
  return NoUnstableExprs(c, rec, policy) && RegrecStable(rec, policy);
}

bool RegrecStable(const CompRec& rec, const Policy& policy) {
  for (const auto& [r, e] : rec.regrec) {
    for (Var v : ExprVars(*e)) {
      if (!VarStable(rec.asmrec, policy, v)) return false;
    }
  }
  return true;
}

bool ConfigConsistent(const CompRec& rec, const std::vector<Value>& regs, const ModeState& mds,
                      const Memory& mem) {
  if (rec.asmrec.no_write != mds[Mode::kAsmNoW]) return false;
  if (rec.asmrec.no_read_write != mds[Mode::kAsmNoRW]) return false;
  for (const auto& [r, e] : rec.regrec) {
    if (r >= regs.size()) return false;
    try {
      if (regs[r] != Eval(mem, *e)) return false;
    } catch (const EvalError&) {
      return false;
    }
  }
  return true;
}

}  // namespace wr
