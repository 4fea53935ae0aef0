#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "wr/checkers.hpp"
#include "wr/compiler.hpp"
#include "wr/sim.hpp"
#include "wr/syntax.hpp"

namespace {

using namespace wr;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

bool IsAsm(const std::string& path) { return std::filesystem::path(path).extension() == ".s"; }

std::string Stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

// A parse error located in a named file.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Parse>
auto FromFile(const std::string& path, Parse parse) {
  std::string text = ReadFile(path);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw FileError(path + ":" + e.what());
  }
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

// `var=value` pairs from the command line.
Memory Assignments(const Policy& policy, const std::vector<std::string>& items, Memory mem) {
  for (const std::string& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw std::runtime_error("expected var=value, got '" + item + "'");
    Var v = Var::Intern(item.substr(0, eq));
    if (!policy.IsVariable(v)) throw std::runtime_error("'" + v.name() + "' is not in the universe");
    mem.Set(v, std::stoll(item.substr(eq + 1)));
  }
  return mem;
}

void PrintVerdict(const Verdict& v) {
  std::cout << v.ReportLine() << "\n";
  if (!v.pass) {
    std::cout << "  " << v.detail << "\n";
    for (const std::string& line : v.trace) std::cout << "  | " << line << "\n";
    if (!v.env.empty()) {
      std::cout << "  env script:\n";
      std::istringstream script(EmitEnvScript(v.env));
      for (std::string line; std::getline(script, line);) std::cout << "  > " << line << "\n";
    }
  }
}

struct Common {
  std::string policy_path;
  std::string thread;
};

int Compile(const std::string& src_path, const Common& c, const std::string& out_path,
            const std::string& ann_path) {
  Policy policy = ParsePolicy(ReadFile(c.policy_path));
  CmdPtr src = FromFile(src_path, [](std::string_view t) { return ParseProgram(t); });
  std::string thread = c.thread.empty() ? Stem(src_path) : c.thread;
  CompileOutput out = CompileProgram(policy, src, policy.StandingFor(thread));
  if (out.failed) {
    for (const std::string& d : out.diagnostics) std::cerr << src_path << ": error: " << d << "\n";
    return kFail;
  }
  std::string asm_text = EmitAsm(out.ToProgram());
  if (out_path.empty() || out_path == "-") {
    std::cout << asm_text;
  } else {
    WriteFile(out_path, asm_text);
  }
  if (!ann_path.empty()) WriteFile(ann_path, WriteAnnotations(out, src));
  return kOk;
}

int Run(const std::string& path, const Common& c, const std::vector<std::string>& sets,
        std::size_t max_steps) {
  Policy policy = ParsePolicy(ReadFile(c.policy_path));
  std::string thread = c.thread.empty() ? Stem(path) : c.thread;
  ThreadSpec spec{thread, {}};
  if (IsAsm(path)) {
    spec.code = Link(FromFile(path, [](std::string_view t) { return ParseAsm(t); }));
  } else {
    spec.code = FromFile(path, [](std::string_view t) { return ParseProgram(t); });
  }
  SimOptions opts;
  opts.max_steps = max_steps;
  SimTrace trace = SimRun(policy, {spec}, Assignments(policy, sets, ZeroMemory(policy)), opts);
  for (const std::string& line : trace.Lines()) std::cout << line << "\n";
  std::cout << (trace.all_stopped ? "stopped" : trace.deadlock ? "blocked" : "step limit")
            << " after " << trace.steps << " steps\n";
  std::cout << "memory " << ToString(trace.final_mem) << "\n";
  return trace.deadlock ? kFail : kOk;
}

struct CheckArgs {
  std::string kind;
  std::string path;
  std::uint64_t seed = 0;
  std::size_t pairs = 100;
  std::size_t max_steps = 10000;
  std::string env_script;
  std::string coupling;
  std::string annotations;
  std::vector<std::string> sets;
  unsigned env_percent = 5;
  std::vector<Value> domain{0, 1};
};

int Check(const CheckArgs& a, const Common& c) {
  Policy policy = ParsePolicy(ReadFile(c.policy_path));
  std::string thread = c.thread.empty() ? Stem(a.path) : c.thread;
  AsmRec standing = policy.StandingFor(thread);
  ModeState mds = InitialModeState(policy, standing);

  if (a.kind == "timing" && IsAsm(a.path)) {
    TimingTarget target;
    target.program = FromFile(a.path, [](std::string_view t) { return ParseAsm(t); });
    target.mds = mds;
    if (!a.coupling.empty()) {
      target.coupling = FromFile(a.coupling, [](std::string_view t) { return ParseCoupling(t); });
    }
    TimingOptions opts;
    opts.pairs = a.pairs;
    opts.max_steps = a.max_steps;
    opts.seed = a.seed;
    Verdict v = CheckDecompSideConditions(policy, target, opts);
    PrintVerdict(v);
    return v.pass ? kOk : kFail;
  }
  if (IsAsm(a.path)) throw CLI::ValidationError("check " + a.kind, "needs a While source");

  CmdPtr src = FromFile(a.path, [](std::string_view t) { return ParseProgram(t); });
  if (a.kind == "high-branching") {
    HighBranchOptions opts;
    opts.pairs = a.pairs;
    opts.max_steps = a.max_steps;
    opts.seed = a.seed;
    Verdict v = CheckNoHighBranching(policy, src, mds, opts);
    PrintVerdict(v);
    return v.pass ? kOk : kFail;
  }
  if (a.kind == "bisim") {
    BisimOptions opts;
    opts.domain = a.domain;
    BisimResult r = BuildBoundedBisim(policy, src, mds, opts);
    std::cout << (r.ok ? "PASS" : "FAIL") << " bisim configs=" << r.configs.size()
              << " pairs=" << r.relation.size() << " explored=" << r.explored << "\n";
    if (!r.ok) {
      std::cout << "  " << r.reason << "\n";
      if (r.counterexample) {
        std::cout << "  | " << CanonicalString(r.configs[r.counterexample->first]) << "\n";
        std::cout << "  | " << CanonicalString(r.configs[r.counterexample->second]) << "\n";
      }
    }
    return r.ok ? kOk : kFail;
  }

  CompileOutput compiled;
  if (!a.annotations.empty()) {
    compiled = FromFile(a.annotations, [&](std::string_view t) { return ReadAnnotations(t, src); });
  } else {
    compiled = CompileProgram(policy, src, standing);
  }
  if (compiled.failed) {
    for (const std::string& d : compiled.diagnostics) std::cerr << a.path << ": error: " << d << "\n";
    return kFail;
  }

  if (a.kind == "refinement") {
    RefinementOptions opts;
    opts.max_steps = a.max_steps;
    opts.seed = a.seed;
    if (!a.env_script.empty()) {
      opts.script = FromFile(a.env_script, [](std::string_view t) { return ParseEnvScript(t); });
    } else if (a.env_percent > 0) {
      opts.random_env = RandomEnv{a.seed, a.env_percent};
    }
    InitState init =
        MakeInitState(policy, standing, Assignments(policy, a.sets, ZeroMemory(policy)));
    Verdict v = CheckRefinementRun(policy, src, compiled, init, opts);
    PrintVerdict(v);
    return v.pass ? kOk : kFail;
  }
  if (a.kind == "timing") {
    TimingTarget target;
    target.program = compiled.ToProgram();
    target.compiled = &compiled;
    target.src = src;
    target.mds = mds;
    if (!a.coupling.empty()) {
      target.coupling = FromFile(a.coupling, [](std::string_view t) { return ParseCoupling(t); });
    }
    TimingOptions opts;
    opts.pairs = a.pairs;
    opts.max_steps = a.max_steps;
    opts.seed = a.seed;
    Verdict v = CheckDecompSideConditions(policy, target, opts);
    PrintVerdict(v);
    return v.pass ? kOk : kFail;
  }
  // cube
  BisimOptions bopts;
  bopts.domain = a.domain;
  BisimResult bisim = BuildBoundedBisim(policy, src, mds, bopts);
  if (!bisim.ok) {
    std::cout << "FAIL cube bisim: " << bisim.reason << "\n";
    return kFail;
  }
  CubeOptions copts;
  copts.domain = a.domain;
  Verdict v = CheckCube(bisim, policy, src, compiled, mds, copts);
  PrintVerdict(v);
  return v.pass ? kOk : kFail;
}

struct SimArgs {
  std::vector<std::string> threads;
  std::uint64_t seed = 0;
  std::size_t max_steps = 10000;
  bool two_run = false;
  std::vector<std::string> mutate;
  std::vector<std::string> sets;
  std::size_t seeds = 100;
};

int Simulate(const SimArgs& a, const Common& c) {
  Policy policy = ParsePolicy(ReadFile(c.policy_path));
  std::vector<ThreadSpec> specs;
  for (const std::string& path : a.threads) {
    ThreadSpec spec{Stem(path), {}};
    if (IsAsm(path)) {
      spec.code = Link(FromFile(path, [](std::string_view t) { return ParseAsm(t); }));
    } else {
      spec.code = FromFile(path, [](std::string_view t) { return ParseProgram(t); });
    }
    specs.push_back(std::move(spec));
  }
  Memory init = Assignments(policy, a.sets, ZeroMemory(policy));

  if (a.two_run) {
    Mutation mutation;
    Memory mutated = Assignments(policy, a.mutate, Memory{});
    for (const auto& [v, x] : mutated.entries()) mutation.emplace_back(v, x);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < a.seeds; ++i) seeds.push_back(a.seed + i);
    Verdict v = TwoRunNoninterference(policy, specs, init, mutation, seeds, a.max_steps);
    PrintVerdict(v);
    return v.pass ? kOk : kFail;
  }

  SimOptions opts;
  opts.seed = a.seed;
  opts.max_steps = a.max_steps;
  SimTrace trace = SimRun(policy, specs, init, opts);
  for (const std::string& line : trace.Lines()) std::cout << line << "\n";
  Verdict v = CheckModeCompatibility(policy, trace);
  v.seed = a.seed;
  PrintVerdict(v);
  return v.pass && !trace.deadlock ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wrc: compiler and checkers for the While/RISC toolchain"};
  app.require_subcommand(1);
  Common common;
  auto add_policy = [&](CLI::App* sub) {
    sub->add_option("--policy", common.policy_path, "policy file")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--thread-name", common.thread, "thread name for standing assumptions");
  };

  std::string src_path;
  std::string out_path;
  std::string ann_path;
  auto* compile = app.add_subcommand("compile", "compile a While program to assembly");
  compile->add_option("src", src_path)->required()->check(CLI::ExistingFile);
  compile->add_option("-o", out_path, "output assembly (stdout if omitted)");
  compile->add_option("--annotations", ann_path, "write per-instruction records as JSON lines");
  add_policy(compile);

  std::vector<std::string> run_sets;
  std::size_t run_steps = 10000;
  auto* run = app.add_subcommand("run", "interpret a While program or assembly file");
  run->add_option("src", src_path)->required()->check(CLI::ExistingFile);
  run->add_option("--set", run_sets, "initial value var=value");
  run->add_option("--max-steps", run_steps);
  add_policy(run);

  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "run one of the checkers");
  check->add_option("kind", check_args.kind)
      ->required()
      ->check(CLI::IsMember({"refinement", "timing", "high-branching", "bisim", "cube"}));
  check->add_option("src", check_args.path)->required()->check(CLI::ExistingFile);
  check->add_option("--seed", check_args.seed);
  check->add_option("--pairs", check_args.pairs, "memory pairs for timing checks");
  check->add_option("--max-steps", check_args.max_steps);
  check->add_option("--env-script", check_args.env_script, "closed-others interference script")
      ->check(CLI::ExistingFile);
  check->add_option("--env-percent", check_args.env_percent,
                    "random interference rate when no script is given");
  check->add_option("--coupling", check_args.coupling, "extra coupled pc pairs")
      ->check(CLI::ExistingFile);
  check->add_option("--annotations", check_args.annotations, "reuse a compiled sidecar")
      ->check(CLI::ExistingFile);
  check->add_option("--set", check_args.sets, "initial value var=value");
  check->add_option("--domain", check_args.domain, "value domain for bisim and cube");
  add_policy(check);

  SimArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "interleave several threads");
  simulate->add_option("--thread", sim_args.threads, "thread source (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim_args.seed);
  simulate->add_option("--max-steps", sim_args.max_steps);
  simulate->add_flag("--two-run", sim_args.two_run, "compare low-sink traces under mutation");
  simulate->add_option("--mutate", sim_args.mutate, "High input change var=value");
  simulate->add_option("--seeds", sim_args.seeds, "schedules for --two-run");
  simulate->add_option("--set", sim_args.sets, "initial value var=value");
  add_policy(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*compile) return Compile(src_path, common, out_path, ann_path);
    if (*run) return Run(src_path, common, run_sets, run_steps);
    if (*check) return Check(check_args, common);
    if (*simulate) return Simulate(sim_args, common);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FileError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const PolicyError& e) {
    std::cerr << "policy error:\n";
    for (const std::string& p : e.problems()) std::cerr << "  " << p << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
