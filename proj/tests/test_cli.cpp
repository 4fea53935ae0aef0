#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/gen.hpp"

namespace wr {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path Scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("wrc_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Wrc(const std::string& args) {
  fs::path out = Scratch() / "stdout";
  fs::path err = Scratch() / "stderr";
  std::string cmd = std::string(WRC_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = Slurp(out);
  o.err = Slurp(err);
  return o;
}

std::string F(const std::string& name) { return testing::FixturePath(name); }

bool Has(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

TEST(Cli, CompileWorker) {
  fs::path asm_out = Scratch() / "worker.s";
  fs::path ann = Scratch() / "worker.ann";
  Outcome o = Wrc("compile " + F("worker.w") + " --policy " + F("worker.pol") + " -o " +
                  asm_out.string() + " --annotations " + ann.string());
  ASSERT_EQ(o.code, 0) << o.err;
  Program p = ParseAsm(Slurp(asm_out));
  EXPECT_EQ(p.code.size(), 28u);
  CmdPtr src = ParseProgram(testing::Fixture("worker.w"));
  CompileOutput back = ReadAnnotations(Slurp(ann), src);
  EXPECT_EQ(back.ToProgram(), p);
}

TEST(Cli, CompileToStdout) {
  Outcome o = Wrc("compile " + F("kernel.w") + " --policy " + F("kernel.pol"));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(Has(o.out, "LOCKACQ k"));
}

TEST(Cli, RacyFixturesFailToCompile) {
  for (const char* f : {"racy_write.w", "racy_read.w", "racy_branch.w"}) {
    Outcome o = Wrc("compile " + F(f) + " --policy " + F("worker.pol") + " --thread-name worker");
    EXPECT_EQ(o.code, 1) << f;
    EXPECT_TRUE(Has(o.err, "error:")) << o.err;
  }
  Outcome o = Wrc("compile " + F("racy_write.w") + " --policy " + F("worker.pol") +
                  " --thread-name worker");
  EXPECT_TRUE(Has(o.err, "data race: write to 'source' without holding 'source_lock'"));
}

TEST(Cli, RunPrintsFinalMemory) {
  Outcome o = Wrc("run " + F("kernel.w") + " --policy " + F("kernel.pol") + " --set a=0");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(Has(o.out, "stopped after 4 steps"));
  EXPECT_TRUE(Has(o.out, "memory {a=0,b=1,h=0,k=0}")) << o.out;
}

TEST(Cli, CheckRefinementWithScript) {
  Outcome o = Wrc("check refinement " + F("worker.w") + " --policy " + F("worker.pol") +
                  " --env-script " + F("worker.env") + " --max-steps 5000");
  EXPECT_EQ(o.code, 0) << o.out << o.err;
  EXPECT_TRUE(Has(o.out, "PASS refinement seed=0 steps=5000 inconclusive")) << o.out;
}

TEST(Cli, TimingNegativeFixture) {
  Outcome o = Wrc("check timing " + F("leaky.s") + " --policy " + F("leaky.pol"));
  EXPECT_EQ(o.code, 1);
  EXPECT_TRUE(Has(o.out, "FAIL timing")) << o.out;
  EXPECT_TRUE(Has(o.out, "clause=coupling"));
  EXPECT_TRUE(Has(o.out, "pc divergence"));
}

TEST(Cli, TimingPaddedAndUnpadded) {
  Outcome padded = Wrc("check timing " + F("fig3_padded.s") + " --policy " + F("fig3.pol") +
                       " --coupling " + F("fig3_padded.coupling"));
  EXPECT_EQ(padded.code, 0) << padded.out;
  Outcome unpadded = Wrc("check timing " + F("fig3_unpadded.s") + " --policy " + F("fig3.pol") +
                         " --coupling " + F("fig3_unpadded.coupling"));
  EXPECT_EQ(unpadded.code, 1) << unpadded.out;
}

TEST(Cli, HighBranchingAndBisim) {
  EXPECT_EQ(Wrc("check high-branching " + F("fig3a.w") + " --policy " + F("fig3.pol")).code, 1);
  EXPECT_EQ(Wrc("check high-branching " + F("worker.w") + " --policy " + F("worker.pol")).code, 0);
  EXPECT_EQ(Wrc("check bisim " + F("leaky.w") + " --policy " + F("leaky.pol")).code, 1);
  Outcome k = Wrc("check bisim " + F("kernel.w") + " --policy " + F("kernel.pol") +
                  " --thread-name kernel");
  EXPECT_EQ(k.code, 0) << k.out;
  EXPECT_TRUE(Has(k.out, "PASS bisim"));
  EXPECT_EQ(Wrc("check cube " + F("kernel.w") + " --policy " + F("kernel.pol")).code, 0);
}

TEST(Cli, Simulate) {
  std::string sys = " --policy " + F("worker.pol") + " --thread " + F("worker.w") + " --thread " +
                    F("toggler.w");
  Outcome trace = Wrc("simulate" + sys + " --max-steps 30");
  EXPECT_EQ(trace.code, 0) << trace.err;
  EXPECT_TRUE(Has(trace.out, "worker acquire acquire workspace_lock;")) << trace.out;
  Outcome two = Wrc("simulate" + sys + " --two-run --set domain=1 --set source=3 --mutate source=-4 --seeds 20");
  EXPECT_EQ(two.code, 0) << two.out << two.err;
  std::string leaky = " --policy " + F("worker.pol") + " --thread " + F("leaky_low_sink.w") +
                      " --thread " + F("toggler.w");
  Outcome bad = Wrc("simulate" + leaky + " --two-run --set domain=1 --set source=3 --mutate source=-4 --seeds 20");
  EXPECT_EQ(bad.code, 1) << bad.out << bad.err;
  EXPECT_TRUE(Has(bad.out, "clause=low-sink"));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(Wrc("").code, 2);
  EXPECT_EQ(Wrc("frobnicate").code, 2);
  EXPECT_EQ(Wrc("compile " + F("worker.w")).code, 2);
  EXPECT_EQ(Wrc("compile missing.w --policy " + F("worker.pol")).code, 2);
  EXPECT_EQ(Wrc("check refinement " + F("leaky.s") + " --policy " + F("leaky.pol")).code, 2);
}

TEST(Cli, BadInputsExitTwo) {
  fs::path pol = Scratch() / "bad.pol";
  std::ofstream(pol) << "[vars]\nuniverse = []\n";
  Outcome o = Wrc("compile " + F("worker.w") + " --policy " + pol.string());
  EXPECT_EQ(o.code, 2);
  EXPECT_TRUE(Has(o.err, "empty variable universe")) << o.err;
  fs::path src = Scratch() / "bad.w";
  std::ofstream(src) << "x := 1;\nif x {\n";
  Outcome p = Wrc("compile " + src.string() + " --policy " + F("worker.pol"));
  EXPECT_EQ(p.code, 2);
  EXPECT_TRUE(Has(p.err, ":3:")) << p.err;
}

}  // namespace
}  // namespace wr
