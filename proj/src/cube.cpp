#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "hashing.hpp"
#include "wr/checkers.hpp"

namespace wr {

namespace {

struct ConcKey {
  std::size_t pc;
  std::vector<Value> regs;
  ModeState mds;
  Memory mem;

  friend bool operator==(const ConcKey&, const ConcKey&) = default;
};

struct ConcKeyHash {
  std::size_t operator()(const ConcKey& k) const {
    std::size_t h = k.pc;
    detail::HashCombine(h, detail::HashRegs(k.regs));
    detail::HashCombine(h, detail::HashModes(k.mds));
    detail::HashCombine(h, detail::HashMemory(k.mem));
    return h;
  }
};

ConcKey KeyOf(const RiscConfig& c) { return ConcKey{c.pc, c.regs, c.mds, c.mem}; }

// The refinement relation realized as the pairs co-reached by paced
// co-execution plus closed-others environment writes.
class DynamicRelation {
 public:
  DynamicRelation(const Policy& policy, const CompileOutput& compiled,
                  std::shared_ptr<const Image> image, const CubeOptions& opts)
      : policy_(policy), compiled_(compiled), image_(std::move(image)), opts_(opts) {}

  std::uint32_t Abs(const WhileConfig& c) {
    auto it = abs_index_.find(c);
    if (it != abs_index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(abs_.size());
    abs_.push_back(c);
    abs_index_.emplace(c, id);
    by_abs_.emplace_back();
    return id;
  }

  std::uint32_t Conc(const RiscConfig& c) {
    ConcKey key = KeyOf(c);
    auto it = conc_index_.find(key);
    if (it != conc_index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(conc_.size());
    conc_.push_back(c);
    conc_index_.emplace(std::move(key), id);
    return id;
  }

  void Add(const WhileConfig& a, const RiscConfig& c) {
    std::uint32_t ai = Abs(a);
    std::uint32_t ci = Conc(c);
    std::uint64_t key = (static_cast<std::uint64_t>(ai) << 32) | ci;
    if (!pairs_.insert(key).second) return;
    if (pairs_.size() > opts_.max_pairs) {
      throw CheckError("cube state bound of " + std::to_string(opts_.max_pairs) + " pairs exceeded");
    }
    by_abs_[ai].push_back(ci);
    list_.emplace_back(ai, ci);
    frontier_.emplace_back(ai, ci);
  }

  void Explore() {
    while (!frontier_.empty()) {
      auto [ai, ci] = frontier_.front();
      frontier_.pop_front();
      WhileConfig a = abs_[ai];
      RiscConfig c = conc_[ci];

      for (Var x : EnvWritable(policy_, c.mds)) {
        for (Value d : opts_.domain) {
          if (c.mem.Get(x) == d) continue;
          Memory changed = c.mem;
          changed.Set(x, d);
          if (!IsCgChange(policy_, c.mds, c.mem, c.mem, changed, changed)) continue;
          WhileConfig a2 = a;
          RiscConfig c2 = c;
          a2.mem = changed;
          c2.mem = std::move(changed);
          Add(a2, c2);
        }
      }

      if (RiscStops(c)) continue;
      int pace = AbsSteps(a.cmd, compiled_.code[c.pc], opts_.fault);
      try {
        if (StepRiscInPlace(c, policy_) != StepStatus::kStepped) continue;
        bool followed = true;
        for (int i = 0; i < pace && followed; ++i) {
          followed = StepWhileInPlace(a, policy_) == StepStatus::kStepped;
        }
        if (!followed) continue;
      } catch (const std::exception&) {
        continue;
      }
      Add(a, c);
    }
  }

  bool Contains(const WhileConfig& a, const RiscConfig& c) const {
    auto ai = abs_index_.find(a);
    if (ai == abs_index_.end()) return false;
    auto ci = conc_index_.find(KeyOf(c));
    if (ci == conc_index_.end()) return false;
    return pairs_.contains((static_cast<std::uint64_t>(ai->second) << 32) | ci->second);
  }

  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& list() const { return list_; }
  const WhileConfig& abs(std::uint32_t i) const { return abs_[i]; }
  const RiscConfig& conc(std::uint32_t i) const { return conc_[i]; }
  const std::vector<std::uint32_t>& ConcOf(const WhileConfig& a) const {
    static const std::vector<std::uint32_t> kNone;
    auto it = abs_index_.find(a);
    return it == abs_index_.end() ? kNone : by_abs_[it->second];
  }

 private:
  const Policy& policy_;
  const CompileOutput& compiled_;
  std::shared_ptr<const Image> image_;
  const CubeOptions& opts_;
  std::vector<WhileConfig> abs_;
  std::unordered_map<WhileConfig, std::uint32_t, WhileConfigHash, WhileConfigEq> abs_index_;
  std::vector<RiscConfig> conc_;
  std::unordered_map<ConcKey, std::uint32_t, ConcKeyHash> conc_index_;
  std::unordered_set<std::uint64_t> pairs_;
  std::vector<std::vector<std::uint32_t>> by_abs_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> list_;
  std::deque<std::pair<std::uint32_t, std::uint32_t>> frontier_;
};

std::optional<WhileConfig> StepN(WhileConfig c, int n, const Policy& policy) {
  try {
    for (int i = 0; i < n; ++i) {
      if (StepWhileInPlace(c, policy) != StepStatus::kStepped) return std::nullopt;
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return c;
}

std::optional<RiscConfig> StepOnce(RiscConfig c, const Policy& policy) {
  try {
    if (StepRiscInPlace(c, policy) != StepStatus::kStepped) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return c;
}

}  // namespace

Verdict CheckCube(const BisimResult& bisim, const Policy& policy, const CmdPtr& src,
                  const CompileOutput& compiled, const ModeState& mds, const CubeOptions& opts) {
  Verdict v;
  v.check = "cube";
  if (compiled.failed) throw CheckError("cube check needs a successful compilation");
  std::shared_ptr<const Image> image;
  try {
    image = Link(compiled.ToProgram());
  } catch (const LinkError& e) {
    throw CheckError(std::string("compiled program does not link: ") + e.what());
  }

  DynamicRelation rel(policy, compiled, image, opts);
  std::vector<Value> regs0(kDefaultRegisterCount, 0);
  for (const Memory& m : EnumerateMemories(policy, opts.domain)) {
    rel.Add(WhileConfig{src, mds, m}, RiscConfig{0, image, regs0, mds, m});
  }
  rel.Explore();

  auto describe = [&](const WhileConfig& a, const RiscConfig& c) {
    return "abs=\"" + ToCompactString(a.cmd) + "\" pc=" + std::to_string(c.pc) +
           " mem=" + ToString(c.mem);
  };

  std::size_t index = 0;
  for (auto [ai, ci] : rel.list()) {
    const WhileConfig& a1 = rel.abs(ai);
    const RiscConfig& c1 = rel.conc(ci);
    ++v.steps;
    if (!(a1.mds == c1.mds) || !(a1.mem == c1.mem)) {
      v.Fail("modes-mem", index, "related configurations disagree on memory or modes");
      v.trace.push_back(describe(a1, c1));
      return v;
    }
    ++index;
  }

  index = 0;
  for (auto [ai, ci] : rel.list()) {
    const WhileConfig& a1 = rel.abs(ai);
    const RiscConfig& c1 = rel.conc(ci);
    std::size_t at = index++;
    if (RiscStops(c1)) continue;
    std::optional<RiscConfig> c1n = StepOnce(c1, policy);
    if (!c1n) continue;

    auto b1 = bisim.Find(a1);
    const std::vector<std::uint32_t>& partners =
        b1 ? bisim.Partners(*b1) : std::vector<std::uint32_t>{};
    std::string last_problem = "no abstract successor related to the concrete step";
    bool found = false;
    for (int n = 0; n <= opts.max_n && !found; ++n) {
      std::optional<WhileConfig> a1n = StepN(a1, n, policy);
      if (!a1n || !rel.Contains(*a1n, *c1n)) continue;
      bool all = true;
      for (std::uint32_t bi : partners) {
        const WhileConfig& a2 = bisim.configs[bi];
        if (!(a2.mds == a1.mds)) continue;
        std::optional<WhileConfig> a2n = StepN(a2, n, policy);
        if (!a2n || !(a2n->mds == a1n->mds)) continue;
        for (std::uint32_t cj : rel.ConcOf(a2)) {
          const RiscConfig& c2 = rel.conc(cj);
          if (c2.pc != c1.pc || !(c2.mds == c1.mds)) continue;
          std::optional<RiscConfig> c2n = StepOnce(c2, policy);
          bool ok = c2n && c2n->mds == c1n->mds && c2n->pc == c1n->pc && rel.Contains(*a2n, *c2n);
          if (!ok) {
            all = false;
            last_problem = "n=" + std::to_string(n) + ": partner " + describe(a2, c2) +
                           " cannot close the cube";
            break;
          }
        }
        if (!all) break;
      }
      found = all;
    }
    if (!found) {
      v.Fail("cube", at, last_problem);
      v.trace.push_back(describe(a1, c1));
      return v;
    }
  }
  return v;
}

}  // namespace wr
