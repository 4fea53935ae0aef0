#include <algorithm>
#include <deque>
#include <limits>

#include "hashing.hpp"
#include "wr/checkers.hpp"

namespace wr {

std::size_t WhileConfigHash::operator()(const WhileConfig& c) const {
  std::size_t h = HashCmd(*c.cmd);
  detail::HashCombine(h, detail::HashModes(c.mds));
  detail::HashCombine(h, detail::HashMemory(c.mem));
  return h;
}

bool WhileConfigEq::operator()(const WhileConfig& a, const WhileConfig& b) const {
  return a.mem == b.mem && a.mds == b.mds && SameCmd(a.cmd, b.cmd);
}

std::string CanonicalString(const WhileConfig& c) {
  return ToCompactString(c.cmd) + " | " + ToString(c.mds) + " | " + ToString(c.mem);
}

std::vector<Memory> EnumerateMemories(const Policy& policy, const std::vector<Value>& domain) {
  if (domain.empty()) throw CheckError("value domain is empty");
  std::vector<Memory> out{ZeroMemory(policy)};
  for (Var v : policy.variables) {
    std::vector<Memory> next;
    next.reserve(out.size() * domain.size());
    for (const Memory& m : out) {
      for (Value x : domain) {
        Memory copy = m;
        copy.Set(v, x);
        next.push_back(std::move(copy));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<std::pair<Memory, Memory>> CgVariants(const Policy& policy, const ModeState& mds,
                                                  const Memory& mem1, const Memory& mem2,
                                                  const std::vector<Value>& domain) {
  std::vector<Var> targets = EnvWritable(policy, mds);
  std::vector<Memory> side1{mem1};
  std::vector<Memory> side2{mem2};
  for (Var x : targets) {
    std::vector<Memory> next1;
    std::vector<Memory> next2;
    for (Value d : domain) {
      for (const Memory& m : side1) {
        Memory copy = m;
        copy.Set(x, d);
        next1.push_back(std::move(copy));
      }
      for (const Memory& m : side2) {
        Memory copy = m;
        copy.Set(x, d);
        next2.push_back(std::move(copy));
      }
    }
    side1 = std::move(next1);
    side2 = std::move(next2);
  }
  std::vector<std::pair<Memory, Memory>> out;
  for (const Memory& n1 : side1) {
    for (const Memory& n2 : side2) {
      if (IsCgChange(policy, mds, mem1, mem2, n1, n2)) out.emplace_back(n1, n2);
    }
  }
  return out;
}

std::optional<std::uint32_t> BisimResult::Find(const WhileConfig& c) const {
  auto it = index.find(c);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::uint32_t>& BisimResult::Partners(std::uint32_t i) const {
  static const std::vector<std::uint32_t> kNone;
  return i < partners.size() ? partners[i] : kNone;
}

bool BisimResult::Contains(const WhileConfig& a, const WhileConfig& b) const {
  auto ia = Find(a);
  auto ib = Find(b);
  if (!ia || !ib) return false;
  const auto& p = Partners(*ia);
  return std::find(p.begin(), p.end(), *ib) != p.end();
}

std::set<std::string> BisimResult::CanonicalPairs() const {
  std::set<std::string> out;
  for (auto [a, b] : relation) {
    out.insert(CanonicalString(configs[a]) + " ~ " + CanonicalString(configs[b]));
  }
  return out;
}

namespace {

constexpr std::uint32_t kNoPair = std::numeric_limits<std::uint32_t>::max();

struct PairNode {
  std::uint32_t a;
  std::uint32_t b;
  std::uint32_t sym = kNoPair;
  // Lockstep successor when the left side can step.
  std::uint32_t succ = kNoPair;
  bool base_ok = true;
  bool unmatched = false;
  std::vector<std::uint32_t> cg;
  std::vector<std::uint32_t> preds;
  bool alive = true;
  std::string reason;
};

class BisimBuilder {
 public:
  BisimBuilder(const Policy& policy, const BisimOptions& opts, BisimResult& out)
      : policy_(policy), opts_(opts), out_(out) {}

  std::uint32_t Config(WhileConfig c) {
    auto it = out_.index.find(c);
    if (it != out_.index.end()) return it->second;
    auto id = static_cast<std::uint32_t>(out_.configs.size());
    out_.configs.push_back(c);
    out_.index.emplace(std::move(c), id);
    return id;
  }

  std::uint32_t Pair(std::uint32_t a, std::uint32_t b) {
    std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    auto it = pair_index_.find(key);
    if (it != pair_index_.end()) return it->second;
    if (nodes_.size() >= opts_.max_pairs) {
      throw CheckError("bisimulation state bound of " + std::to_string(opts_.max_pairs) +
                       " pairs exceeded");
    }
    auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(PairNode{a, b});
    pair_index_.emplace(key, id);
    frontier_.push_back(id);
    return id;
  }

  void Explore() {
    while (!frontier_.empty()) {
      std::uint32_t p = frontier_.front();
      frontier_.pop_front();
      Expand(p);
    }
  }

  void Fixpoint() {
    std::deque<std::uint32_t> work;
    for (std::uint32_t p = 0; p < nodes_.size(); ++p) work.push_back(p);
    std::vector<char> queued(nodes_.size(), 1);
    while (!work.empty()) {
      std::uint32_t p = work.front();
      work.pop_front();
      queued[p] = 0;
      PairNode& n = nodes_[p];
      if (!n.alive) continue;
      std::string why = Violation(n);
      if (why.empty()) continue;
      n.alive = false;
      n.reason = std::move(why);
      eviction_order_.push_back(p);
      for (std::uint32_t q : n.preds) {
        if (!queued[q] && nodes_[q].alive) {
          queued[q] = 1;
          work.push_back(q);
        }
      }
    }
  }

  std::vector<PairNode>& nodes() { return nodes_; }
  const std::vector<std::uint32_t>& eviction_order() const { return eviction_order_; }

 private:
  static StepStatus TryStep(WhileConfig& c, const Policy& policy) {
    try {
      return StepWhileInPlace(c, policy);
    } catch (const std::exception&) {
      // A faulting configuration has no successor.
      return StepStatus::kStopped;
    }
  }

  void Link(std::uint32_t from, std::uint32_t to) { nodes_[to].preds.push_back(from); }

  void Expand(std::uint32_t p) {
    std::uint32_t a = nodes_[p].a;
    std::uint32_t b = nodes_[p].b;
    std::uint32_t sym = Pair(b, a);
    nodes_[p].sym = sym;
    Link(p, sym);

    WhileConfig left = out_.configs[a];
    WhileConfig right = out_.configs[b];
    if (!(left.mds == right.mds)) {
      nodes_[p].base_ok = false;
      nodes_[p].reason = "mode states differ";
      return;
    }
    if (auto w = LowMdsEqWitness(policy_, left.mds, left.mem, right.mem)) {
      nodes_[p].base_ok = false;
      nodes_[p].reason = "not low-equivalent: '" + w->name() + "' differs";
      return;
    }

    for (auto& [n1, n2] : CgVariants(policy_, left.mds, left.mem, right.mem, opts_.domain)) {
      if (n1 == left.mem && n2 == right.mem) continue;
      std::uint32_t q = Pair(Config(WhileConfig{left.cmd, left.mds, std::move(n1)}),
                             Config(WhileConfig{right.cmd, right.mds, std::move(n2)}));
      nodes_[p].cg.push_back(q);
      Link(p, q);
    }

    if (TryStep(left, policy_) != StepStatus::kStepped) return;
    if (TryStep(right, policy_) != StepStatus::kStepped) {
      nodes_[p].unmatched = true;
      return;
    }
    std::uint32_t s = Pair(Config(std::move(left)), Config(std::move(right)));
    nodes_[p].succ = s;
    Link(p, s);
  }

  std::string Violation(const PairNode& n) const {
    if (!n.base_ok) return n.reason.empty() ? "not low-equivalent" : n.reason;
    if (n.unmatched) return "step not matched: right side cannot step";
    if (n.succ != kNoPair) {
      const PairNode& s = nodes_[n.succ];
      if (!s.alive) return "successor evicted (" + s.reason + ")";
    }
    if (n.sym != kNoPair && !nodes_[n.sym].alive) return "symmetric pair evicted";
    for (std::uint32_t q : n.cg) {
      if (!nodes_[q].alive) return "globally consistent change leaves the relation (" + nodes_[q].reason + ")";
    }
    return {};
  }

  const Policy& policy_;
  const BisimOptions& opts_;
  BisimResult& out_;
  std::vector<PairNode> nodes_;
  std::unordered_map<std::uint64_t, std::uint32_t> pair_index_;
  std::deque<std::uint32_t> frontier_;
  std::vector<std::uint32_t> eviction_order_;
};

}  // namespace

BisimResult BuildBoundedBisim(const Policy& policy, const CmdPtr& src, const ModeState& mds,
                              const BisimOptions& opts) {
  BisimResult out;
  BisimBuilder builder(policy, opts, out);
  std::vector<Memory> mems = EnumerateMemories(policy, opts.domain);
  std::vector<std::uint32_t> initial;
  for (const Memory& m1 : mems) {
    for (const Memory& m2 : mems) {
      if (!LowMdsEq(policy, mds, m1, m2)) continue;
      std::uint32_t a = builder.Config(WhileConfig{src, mds, m1});
      std::uint32_t b = builder.Config(WhileConfig{src, mds, m2});
      initial.push_back(builder.Pair(a, b));
    }
  }
  builder.Explore();
  builder.Fixpoint();

  auto& nodes = builder.nodes();
  out.explored = nodes.size();
  out.partners.assign(out.configs.size(), {});
  for (const PairNode& n : nodes) {
    if (!n.alive) continue;
    out.relation.emplace_back(n.a, n.b);
    out.partners[n.a].push_back(n.b);
  }
  std::sort(out.relation.begin(), out.relation.end());

  std::vector<char> is_initial(nodes.size(), 0);
  for (std::uint32_t p : initial) is_initial[p] = 1;
  out.ok = true;
  for (std::uint32_t p : builder.eviction_order()) {
    if (is_initial[p]) {
      out.ok = false;
      out.counterexample = std::make_pair(nodes[p].a, nodes[p].b);
      out.reason = nodes[p].reason;
      break;
    }
  }
  return out;
}

}  // namespace wr
