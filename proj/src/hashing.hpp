#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "wr/core.hpp"

namespace wr::detail {

inline void HashCombine(std::size_t& seed, std::size_t h) {
  seed ^= h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

inline std::size_t HashMemory(const Memory& mem) {
  std::size_t h = mem.size();
  for (const auto& [v, x] : mem.entries()) {
    HashCombine(h, std::hash<Var>{}(v));
    HashCombine(h, std::hash<Value>{}(x));
  }
  return h;
}

inline std::size_t HashModes(const ModeState& mds) {
  std::size_t h = 0;
  for (const VarSet& s : mds.sets) {
    HashCombine(h, s.size());
    for (Var v : s) HashCombine(h, std::hash<Var>{}(v));
  }
  return h;
}

inline std::size_t HashRegs(const std::vector<Value>& regs) {
  std::size_t h = regs.size();
  for (Value r : regs) HashCombine(h, std::hash<Value>{}(r));
  return h;
}

}  // namespace wr::detail
