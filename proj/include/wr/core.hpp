#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <boost/container/flat_map.hpp>
#include <boost/container/flat_set.hpp>

namespace wr {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using Value = std::int64_t;

inline bool Truthy(Value v) { return v != 0; }

// Interned identifier. Program variables and lock variables share one
// namespace; the policy decides which names are locks.
class Var {
 public:
  Var() = default;

  static Var Intern(std::string_view name);

  const std::string& name() const;
  std::uint32_t id() const { return id_; }
  bool valid() const { return id_ != 0; }

  friend bool operator==(Var a, Var b) { return a.id_ == b.id_; }
  friend std::strong_ordering operator<=>(Var a, Var b) { return a.id_ <=> b.id_; }

 private:
  explicit Var(std::uint32_t id) : id_(id) {}
  std::uint32_t id_ = 0;
};

using VarSet = boost::container::flat_set<Var>;

// Sorted by name rather than by intern order, for stable output.
std::vector<Var> SortedByName(const VarSet& vars);

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DisciplineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Memory {
 public:
  using Map = boost::container::flat_map<Var, Value>;

  Memory() = default;

  bool Contains(Var v) const { return map_.contains(v); }
  Value Get(Var v) const;
  void Set(Var v, Value value) { map_.insert_or_assign(v, value); }
  std::size_t size() const { return map_.size(); }
  const Map& entries() const { return map_; }

  friend bool operator==(const Memory&, const Memory&) = default;

 private:
  Map map_;
};

std::string ToString(const Memory& mem);

enum class BinOp { kAdd, kSub, kMul, kEq, kNe, kLt, kAnd, kOr };

const char* Symbol(BinOp op);
Value Apply(BinOp op, Value a, Value b);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  struct Const {
    Value value;
  };
  struct Load {
    Var var;
  };
  struct Binary {
    BinOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };
  std::variant<Const, Load, Binary> node;
};

ExprPtr MakeConst(Value v);
ExprPtr MakeVar(Var v);
ExprPtr MakeVar(std::string_view name);
ExprPtr MakeBinary(BinOp op, ExprPtr lhs, ExprPtr rhs);

bool SameExpr(const Expr& a, const Expr& b);
bool SameExpr(const ExprPtr& a, const ExprPtr& b);
std::size_t HashExpr(const Expr& e);

Value Eval(const Memory& mem, const Expr& e);
VarSet ExprVars(const Expr& e);
int Depth(const Expr& e);
bool Mentions(const Expr& e, Var v);

// Concrete syntax: integers, identifiers, fully parenthesized binary ops.
std::string ToString(const Expr& e);

enum class Mode { kAsmNoW = 0, kAsmNoRW = 1, kGuarNoW = 2, kGuarNoRW = 3 };

const char* ModeName(Mode m);

struct ModeState {
  std::array<VarSet, 4> sets;

  VarSet& operator[](Mode m) { return sets[static_cast<int>(m)]; }
  const VarSet& operator[](Mode m) const { return sets[static_cast<int>(m)]; }

  friend bool operator==(const ModeState&, const ModeState&) = default;
};

std::string ToString(const ModeState& mds);

bool Readable(const ModeState& mds, Var x);
bool Writable(const ModeState& mds, Var x);

}  // namespace wr

template <>
struct std::hash<wr::Var> {
  std::size_t operator()(wr::Var v) const noexcept { return v.id(); }
};
