#include "wr/core.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace wr {
namespace {

class SymbolTable {
 public:
  SymbolTable() { names_.emplace_back(); }

  std::uint32_t Intern(std::string_view name) {
    {
      std::shared_lock lock(mu_);
      auto it = ids_.find(std::string(name));
      if (it != ids_.end()) return it->second;
    }
    std::unique_lock lock(mu_);
    auto [it, inserted] = ids_.try_emplace(std::string(name), 0);
    if (inserted) {
      names_.emplace_back(name);
      it->second = static_cast<std::uint32_t>(names_.size() - 1);
    }
    return it->second;
  }

  const std::string& Name(std::uint32_t id) {
    std::shared_lock lock(mu_);
    return names_.at(id);
  }

 private:
  std::shared_mutex mu_;
  std::deque<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

SymbolTable& Symbols() {
  static SymbolTable table;
  return table;
}

std::uint64_t Wrap(std::int64_t v) { return static_cast<std::uint64_t>(v); }

}  // namespace

Var Var::Intern(std::string_view name) { return Var(Symbols().Intern(name)); }

const std::string& Var::name() const { return Symbols().Name(id_); }

std::vector<Var> SortedByName(const VarSet& vars) {
  std::vector<Var> out(vars.begin(), vars.end());
  std::sort(out.begin(), out.end(),
            [](Var a, Var b) { return a.name() < b.name(); });
  return out;
}

Value Memory::Get(Var v) const {
  auto it = map_.find(v);
  if (it == map_.end()) throw EvalError("unknown variable '" + v.name() + "'");
  return it->second;
}

std::string ToString(const Memory& mem) {
  std::vector<std::pair<std::string, Value>> items;
  for (const auto& [v, x] : mem.entries()) items.emplace_back(v.name(), x);
  std::sort(items.begin(), items.end());
  std::ostringstream out;
  out << "{";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << ",";
    out << items[i].first << "=" << items[i].second;
  }
  out << "}";
  return out.str();
}

const char* Symbol(BinOp op) {
  switch (op) {
    case BinOp::kAdd: return "+";
    case BinOp::kSub: return "-";
    case BinOp::kMul: return "*";
    case BinOp::kEq: return "==";
    case BinOp::kNe: return "!=";
    case BinOp::kLt: return "<";
    case BinOp::kAnd: return "&&";
    case BinOp::kOr: return "||";
  }
  return "?";
}

Value Apply(BinOp op, Value a, Value b) {
  switch (op) {
    case BinOp::kAdd: return static_cast<Value>(Wrap(a) + Wrap(b));
    case BinOp::kSub: return static_cast<Value>(Wrap(a) - Wrap(b));
    case BinOp::kMul: return static_cast<Value>(Wrap(a) * Wrap(b));
    case BinOp::kEq: return a == b ? 1 : 0;
    case BinOp::kNe: return a != b ? 1 : 0;
    case BinOp::kLt: return a < b ? 1 : 0;
    case BinOp::kAnd: return (Truthy(a) && Truthy(b)) ? 1 : 0;
    case BinOp::kOr: return (Truthy(a) || Truthy(b)) ? 1 : 0;
  }
  return 0;
}

ExprPtr MakeConst(Value v) { return std::make_shared<const Expr>(Expr{Expr::Const{v}}); }
ExprPtr MakeVar(Var v) { return std::make_shared<const Expr>(Expr{Expr::Load{v}}); }
ExprPtr MakeVar(std::string_view name) { return MakeVar(Var::Intern(name)); }
ExprPtr MakeBinary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(
      Expr{Expr::Binary{op, std::move(lhs), std::move(rhs)}});
}

bool SameExpr(const Expr& a, const Expr& b) {
  if (&a == &b) return true;
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      Overloaded{
          [&](const Expr::Const& x) { return x.value == std::get<Expr::Const>(b.node).value; },
          [&](const Expr::Load& x) { return x.var == std::get<Expr::Load>(b.node).var; },
          [&](const Expr::Binary& x) {
            const auto& y = std::get<Expr::Binary>(b.node);
            return x.op == y.op && SameExpr(x.lhs, y.lhs) && SameExpr(x.rhs, y.rhs);
          },
      },
      a.node);
}

bool SameExpr(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return SameExpr(*a, *b);
}

std::size_t HashExpr(const Expr& e) {
  return std::visit(
      Overloaded{
          [](const Expr::Const& x) { return std::hash<Value>{}(x.value) * 31 + 1; },
          [](const Expr::Load& x) { return std::size_t{x.var.id()} * 131 + 2; },
          [](const Expr::Binary& x) {
            std::size_t h = static_cast<std::size_t>(x.op) + 3;
            h = h * 1000003 ^ HashExpr(*x.lhs);
            h = h * 1000003 ^ HashExpr(*x.rhs);
            return h;
          },
      },
      e.node);
}

Value Eval(const Memory& mem, const Expr& e) {
  return std::visit(
      Overloaded{
          [](const Expr::Const& x) { return x.value; },
          [&](const Expr::Load& x) { return mem.Get(x.var); },
          [&](const Expr::Binary& x) {
            Value a = Eval(mem, *x.lhs);
            Value b = Eval(mem, *x.rhs);
            return Apply(x.op, a, b);
          },
      },
      e.node);
}

namespace {
void CollectVars(const Expr& e, VarSet& out) {
  std::visit(Overloaded{
                 [](const Expr::Const&) {},
                 [&](const Expr::Load& x) { out.insert(x.var); },
                 [&](const Expr::Binary& x) {
                   CollectVars(*x.lhs, out);
                   CollectVars(*x.rhs, out);
                 },
             },
             e.node);
}
}  // namespace

VarSet ExprVars(const Expr& e) {
  VarSet out;
  CollectVars(e, out);
  return out;
}

int Depth(const Expr& e) {
  if (const auto* b = std::get_if<Expr::Binary>(&e.node)) {
    return 1 + std::max(Depth(*b->lhs), Depth(*b->rhs));
  }
  return 1;
}

bool Mentions(const Expr& e, Var v) {
  return std::visit(Overloaded{
                        [](const Expr::Const&) { return false; },
                        [&](const Expr::Load& x) { return x.var == v; },
                        [&](const Expr::Binary& x) {
                          return Mentions(*x.lhs, v) || Mentions(*x.rhs, v);
                        },
                    },
                    e.node);
}

std::string ToString(const Expr& e) {
  return std::visit(Overloaded{
                        [](const Expr::Const& x) { return std::to_string(x.value); },
                        [](const Expr::Load& x) { return x.var.name(); },
                        [](const Expr::Binary& x) {
                          return "(" + ToString(*x.lhs) + " " + Symbol(x.op) + " " +
                                 ToString(*x.rhs) + ")";
                        },
                    },
                    e.node);
}

const char* ModeName(Mode m) {
  switch (m) {
    case Mode::kAsmNoW: return "AsmNoW";
    case Mode::kAsmNoRW: return "AsmNoRW";
    case Mode::kGuarNoW: return "GuarNoW";
    case Mode::kGuarNoRW: return "GuarNoRW";
  }
  return "?";
}

std::string ToString(const ModeState& mds) {
  std::ostringstream out;
  for (int i = 0; i < 4; ++i) {
    if (i) out << " ";
    out << ModeName(static_cast<Mode>(i)) << "={";
    bool first = true;
    for (Var v : SortedByName(mds.sets[i])) {
      if (!first) out << ",";
      first = false;
      out << v.name();
    }
    out << "}";
  }
  return out.str();
}

bool Readable(const ModeState& mds, Var x) { return !mds[Mode::kAsmNoRW].contains(x); }

bool Writable(const ModeState& mds, Var x) {
  return !mds[Mode::kAsmNoW].contains(x) && !mds[Mode::kAsmNoRW].contains(x);
}

}  // namespace wr
