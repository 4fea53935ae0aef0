#include <gtest/gtest.h>

#include <algorithm>

#include "support/gen.hpp"
#include "wr/policy.hpp"

namespace wr {
namespace {

using testing::Rng;

Var V(const char* n) { return Var::Intern(n); }

const Policy& Worker() {
  static const Policy p = ParsePolicy(testing::Fixture("worker.pol"));
  return p;
}

bool Mentions(const std::vector<std::string>& problems, const std::string& needle) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

std::vector<std::string> Problems(const std::string& text) {
  try {
    ParsePolicy(text);
  } catch (const PolicyError& e) {
    return e.problems();
  }
  return {};
}

TEST(Classify, DependsOnDomain) {
  Memory m = ZeroMemory(Worker());
  EXPECT_EQ(Classify(Worker(), m, V("source")), Level::kLow);
  m.Set(V("domain"), 1);
  EXPECT_EQ(Classify(Worker(), m, V("source")), Level::kHigh);
  EXPECT_EQ(Classify(Worker(), m, V("high_sink")), Level::kHigh);
  m.Set(V("domain"), 0);
  EXPECT_EQ(Classify(Worker(), m, V("high_sink")), Level::kHigh);
  EXPECT_EQ(Classify(Worker(), m, V("source_lock")), Level::kLow);
}

TEST(Classify, UnknownVariable) {
  EXPECT_THROW(Classify(Worker(), ZeroMemory(Worker()), V("nowhere")), PolicyError);
}

TEST(Cvars, WorkerPolicy) {
  EXPECT_EQ(Cvars(Worker(), V("source")), VarSet{V("domain")});
  EXPECT_TRUE(Cvars(Worker(), V("workspace")).empty());
  EXPECT_EQ(ControlVars(Worker()), VarSet{V("domain")});
}

TEST(LowMdsEq, Examples) {
  const Policy& p = Worker();
  ModeState mds = InitialModeState(p);
  Memory m = ZeroMemory(p);
  EXPECT_TRUE(LowMdsEq(p, mds, m, m));
  Memory high = m;
  high.Set(V("high_sink"), 9);
  EXPECT_TRUE(LowMdsEq(p, mds, m, high));
  Memory dom = m;
  dom.Set(V("domain"), 1);
  EXPECT_FALSE(LowMdsEq(p, mds, m, dom));
  EXPECT_EQ(LowMdsEqWitness(p, mds, m, dom), V("domain"));
}

TEST(LowMdsEq, UnreadableLowIsExempt) {
  const Policy& p = Worker();
  ModeState mds = InitialModeState(p);
  Memory a = ZeroMemory(p);
  Memory b = a;
  b.Set(V("workspace"), 5);
  EXPECT_FALSE(LowMdsEq(p, mds, a, b));
  mds[Mode::kAsmNoRW].insert(V("workspace"));
  EXPECT_TRUE(LowMdsEq(p, mds, a, b));
}

TEST(VarStable, Examples) {
  const Policy& p = Worker();
  AsmRec held{{V("source"), V("domain")}, {}};
  EXPECT_TRUE(VarStable(held, p, V("source")));
  EXPECT_FALSE(VarStable(AsmRec{}, p, V("source")));
  EXPECT_FALSE(VarStable(AsmRec{{V("source")}, {}}, p, V("source")));
}

TEST(Validate, WorkerPolicyIsClean) {
  EXPECT_TRUE(ValidatePolicy(Worker()).empty());
  EXPECT_TRUE(ValidatePolicy(testing::GenPolicy()).empty());
  EXPECT_TRUE(ValidatePolicy(ParsePolicy(testing::Fixture("cddc.pol"))).empty());
}

TEST(Validate, LockAsControlVariable) {
  auto problems = Problems(R"(
[vars]
universe = ["s"]
[locks.k]
no_write = []
no_read_write = []
[[classification.dependent]]
var = "s"
control = "k"
low_when = 0
)");
  EXPECT_TRUE(Mentions(problems, "cannot be a control variable"));
}

TEST(Validate, ControlVariableMustBeGovernedAlike) {
  auto problems = Problems(R"(
[vars]
universe = ["s", "d"]
[locks.k]
no_write = ["s"]
no_read_write = []
[[classification.dependent]]
var = "s"
control = "d"
low_when = 0
)");
  EXPECT_TRUE(Mentions(problems, "governs"));
}

TEST(Validate, EmptyFile) { EXPECT_TRUE(Mentions(Problems(""), "empty variable universe")); }

TEST(Validate, ReportsEveryProblem) {
  auto problems = Problems(R"(
[vars]
universe = ["a", "b"]
[locks.k]
no_write = ["a"]
no_read_write = ["a"]
[locks.m]
no_write = ["b"]
no_read_write = []
[locks.n]
no_write = ["b"]
no_read_write = []
[classification]
high = ["k", "zz"]
)");
  EXPECT_TRUE(Mentions(problems, "'zz' is not in the variable universe"));
  EXPECT_TRUE(Mentions(problems, "classified High"));
  EXPECT_TRUE(Mentions(problems, "governed by both"));
  EXPECT_GE(problems.size(), 4u);
}

TEST(InitialModes, GuarHoldsGovernedVariables) {
  const Policy& p = Worker();
  ModeState mds = InitialModeState(p, p.StandingFor("worker"));
  EXPECT_TRUE(mds[Mode::kGuarNoW].contains(V("source")));
  EXPECT_TRUE(mds[Mode::kGuarNoRW].contains(V("workspace")));
  EXPECT_TRUE(mds[Mode::kAsmNoW].contains(V("suspended")));
  EXPECT_TRUE(mds[Mode::kAsmNoRW].empty());
}

// Property tests over random memories of the gen policy.
TEST(PolicyProperty, LowMdsEqIsAnEquivalence) {
  Rng rng(41);
  const Policy& p = testing::GenPolicy();
  for (int n = 0; n < 400; ++n) {
    ModeState mds = InitialModeState(p, p.StandingFor(testing::kGenThread));
    if (testing::Chance(rng, 50)) ApplyAcquire(p, V("k1"), mds);
    if (testing::Chance(rng, 50)) ApplyAcquire(p, V("k2"), mds);
    // Small domain so that equivalent triples are common.
    Memory a = testing::RandomMemory(rng, p, 0, 1);
    Memory b = testing::RandomMemory(rng, p, 0, 1);
    Memory c = testing::RandomMemory(rng, p, 0, 1);
    EXPECT_TRUE(LowMdsEq(p, mds, a, a));
    EXPECT_EQ(LowMdsEq(p, mds, a, b), LowMdsEq(p, mds, b, a));
    if (LowMdsEq(p, mds, a, b) && LowMdsEq(p, mds, b, c)) EXPECT_TRUE(LowMdsEq(p, mds, a, c));
  }
}

TEST(PolicyProperty, ClassifyDependsOnlyOnControls) {
  Rng rng(42);
  const Policy& p = testing::GenPolicy();
  for (int n = 0; n < 300; ++n) {
    Memory m = testing::RandomMemory(rng, p, -2, 2);
    Memory changed = m;
    for (Var v : p.variables) {
      if (!p.controls.contains(v)) changed.Set(v, testing::Uniform(rng, -9, 9));
    }
    for (Var v : p.variables) EXPECT_EQ(Classify(p, m, v), Classify(p, changed, v));
  }
}

TEST(PolicyProperty, VarStableIsMonotone) {
  Rng rng(43);
  const Policy& p = testing::GenPolicy();
  std::vector<Var> vars = p.variables;
  for (int n = 0; n < 300; ++n) {
    AsmRec small;
    for (Var v : vars) {
      if (testing::Chance(rng, 30)) small.no_write.insert(v);
      else if (testing::Chance(rng, 20)) small.no_read_write.insert(v);
    }
    AsmRec big = small;
    for (Var v : vars) {
      if (testing::Chance(rng, 30)) big.no_write.insert(v);
      if (testing::Chance(rng, 10)) big.no_read_write.insert(v);
    }
    for (Var v : vars) {
      if (VarStable(small, p, v)) EXPECT_TRUE(VarStable(big, p, v));
    }
  }
}

}  // namespace
}  // namespace wr
