#include <gtest/gtest.h>

#include "support/gen.hpp"
#include "wr/checkers.hpp"

namespace wr {
namespace {

using testing::CompiledThread;
using testing::Rng;

Var V(const char* n) { return Var::Intern(n); }

struct Instance {
  Policy policy;
  CompiledThread thread;
};

Instance Load(const char* pol, const char* src, const char* thread) {
  Policy p = ParsePolicy(testing::Fixture(pol));
  CompiledThread t = testing::CompileThread(p, ParseProgram(testing::Fixture(src)), thread);
  return Instance{std::move(p), std::move(t)};
}

const Instance& Kernel() {
  static const Instance k = Load("kernel.pol", "kernel.w", "kernel");
  return k;
}

TEST(EnumerateMemories, CoversTheDomain) {
  const Policy& p = Kernel().policy;
  auto mems = EnumerateMemories(p, {0, 1});
  EXPECT_EQ(mems.size(), 8u);
  for (const Memory& m : mems) EXPECT_EQ(m.Get(V("k")), 0);
  EXPECT_THROW(BuildBoundedBisim(p, Kernel().thread.src, Kernel().thread.mds, BisimOptions{{}}),
               CheckError);
}

TEST(CgVariants, IncludeTheUnchangedPair) {
  const Policy& p = Kernel().policy;
  ModeState mds = Kernel().thread.mds;
  Memory m = ZeroMemory(p);
  auto variants = CgVariants(p, mds, m, m, {0, 1});
  ASSERT_FALSE(variants.empty());
  bool unchanged = false;
  for (const auto& [a, b] : variants) {
    unchanged = unchanged || (a == m && b == m);
    EXPECT_TRUE(IsCgChange(p, mds, m, m, a, b));
  }
  EXPECT_TRUE(unchanged);
}

TEST(Bisim, LeakyProgramHasCounterexample) {
  Instance leaky = Load("leaky.pol", "leaky.w", "leaky");
  BisimResult r = BuildBoundedBisim(leaky.policy, leaky.thread.src, leaky.thread.mds);
  EXPECT_FALSE(r.ok);
  ASSERT_TRUE(r.counterexample.has_value());
  const WhileConfig& a = r.configs[r.counterexample->first];
  const WhileConfig& b = r.configs[r.counterexample->second];
  EXPECT_TRUE(LowMdsEq(leaky.policy, a.mds, a.mem, b.mem));
  EXPECT_NE(a.mem.Get(V("h")), b.mem.Get(V("h")));
  EXPECT_FALSE(r.reason.empty());
}

TEST(Bisim, KernelMatchesOracle) {
  const Instance& k = Kernel();
  BisimResult r = BuildBoundedBisim(k.policy, k.thread.src, k.thread.mds);
  ASSERT_TRUE(r.ok) << r.reason;
  EXPECT_EQ(r.CanonicalPairs(), testing::OracleBisim(k.policy, k.thread.src, k.thread.mds, {0, 1}));
}

TEST(Bisim, RelationIsSymmetricAndLowEquivalent) {
  const Instance& k = Kernel();
  BisimResult r = BuildBoundedBisim(k.policy, k.thread.src, k.thread.mds);
  ASSERT_TRUE(r.ok);
  for (auto [i, j] : r.relation) {
    EXPECT_TRUE(r.Contains(r.configs[j], r.configs[i]));
    EXPECT_TRUE(r.configs[i].mds == r.configs[j].mds);
    EXPECT_TRUE(LowMdsEq(k.policy, r.configs[i].mds, r.configs[i].mem, r.configs[j].mem));
  }
}

TEST(Bisim, LowOnlyProgramRelatesEqualConfigurations) {
  Policy p = ParsePolicy("[vars]\nuniverse = [\"x\"]\n");
  CmdPtr c = ParseProgram("x := (x == 0); x := (x == 0);");
  BisimResult r = BuildBoundedBisim(p, c, InitialModeState(p));
  ASSERT_TRUE(r.ok);
  for (auto [i, j] : r.relation) {
    EXPECT_TRUE(SameCmd(r.configs[i].cmd, r.configs[j].cmd));
    EXPECT_EQ(r.configs[i].mem, r.configs[j].mem);
  }
  EXPECT_EQ(r.CanonicalPairs(), testing::OracleBisim(p, c, InitialModeState(p), {0, 1}));
}

TEST(Bisim, SkipRelatesEveryLowEquivalentStart) {
  Policy p = ParsePolicy("[vars]\nuniverse = [\"x\", \"h\"]\n[classification]\nhigh = [\"h\"]\n");
  ModeState mds = InitialModeState(p);
  BisimResult r = BuildBoundedBisim(p, MakeSkip(), mds);
  ASSERT_TRUE(r.ok);
  for (const Memory& a : EnumerateMemories(p, {0, 1})) {
    for (const Memory& b : EnumerateMemories(p, {0, 1})) {
      if (!LowMdsEq(p, mds, a, b)) continue;
      EXPECT_TRUE(r.Contains(WhileConfig{MakeSkip(), mds, a}, WhileConfig{MakeSkip(), mds, b}));
    }
  }
}

TEST(Bisim, StateBoundIsAResourceError) {
  const Instance& k = Kernel();
  BisimOptions tight;
  tight.max_pairs = 3;
  EXPECT_THROW(BuildBoundedBisim(k.policy, k.thread.src, k.thread.mds, tight), CheckError);
}

TEST(Bisim, TinyInstancesMatchOracle) {
  Rng rng(81);
  int compared = 0;
  for (int n = 0; n < 25; ++n) {
    testing::TinyInstance inst = testing::RandomTiny(rng, n);
    ModeState mds = InitialModeState(inst.policy, inst.policy.StandingFor(inst.thread));
    BisimResult r = BuildBoundedBisim(inst.policy, inst.src, mds);
    auto oracle = testing::OracleBisim(inst.policy, inst.src, mds, {0, 1});
    if (r.ok) {
      EXPECT_EQ(r.CanonicalPairs(), oracle) << ToSource(inst.src);
      ++compared;
    }
  }
  EXPECT_GT(compared, 10);
}

TEST(Cube, KernelPasses) {
  const Instance& k = Kernel();
  BisimResult b = BuildBoundedBisim(k.policy, k.thread.src, k.thread.mds);
  ASSERT_TRUE(b.ok);
  Verdict v = CheckCube(b, k.policy, k.thread.src, k.thread.out, k.thread.mds);
  EXPECT_TRUE(v.pass) << v.detail;
  EXPECT_EQ(v.check, "cube");
}

TEST(Cube, EpiloguePacingFaultFailsWithTheDecomposedCheck) {
  Policy p = ParsePolicy(testing::Fixture("kernel.pol"));
  CompiledThread t = testing::CompileThread(
      p, ParseProgram("acquire k; if a { b := 1; } else { b := 0; } release k;"), "kernel");
  ASSERT_FALSE(t.out.failed);
  BisimResult b = BuildBoundedBisim(p, t.src, t.mds);
  ASSERT_TRUE(b.ok) << b.reason;
  EXPECT_TRUE(CheckCube(b, p, t.src, t.out, t.mds).pass);
  CubeOptions faulty;
  faulty.fault = PacingFault::kEpiloguePacedOne;
  EXPECT_FALSE(CheckCube(b, p, t.src, t.out, t.mds, faulty).pass);
  TimingOptions timing;
  timing.fault = PacingFault::kEpiloguePacedOne;
  EXPECT_FALSE(CheckDecompSideConditions(p, testing::TargetFor(t), timing).pass);
}

TEST(Cube, SkipPassesVacuously) {
  Policy p = ParsePolicy("[vars]\nuniverse = [\"x\"]\n");
  CompiledThread t = testing::CompileThread(p, MakeSkip(), "t");
  BisimResult b = BuildBoundedBisim(p, t.src, t.mds);
  ASSERT_TRUE(b.ok);
  EXPECT_TRUE(CheckCube(b, p, t.src, t.out, t.mds).pass);
}

}  // namespace
}  // namespace wr
