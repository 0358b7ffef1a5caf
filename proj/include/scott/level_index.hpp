#pragma once

#include <compare>
#include <string>

#include "scott/common.hpp"

namespace scott {

// Level subscript of a formula or process row: a finite ordinal, or omega
// plus a finite offset. Nothing past omega+k is representable; operations
// that would need a second limit throw instead of approximating.
struct LevelIndex {
  std::uint32_t k = 0;
  bool after_limit = false;  // true: level is omega + k

  static LevelIndex finite(std::uint32_t k) { return {k, false}; }
  static LevelIndex omega() { return {0, true}; }
  static LevelIndex omega_plus(std::uint32_t k) { return {k, true}; }

  bool is_finite() const { return !after_limit; }
  bool is_omega() const { return after_limit && k == 0; }
  bool is_successor() const { return k > 0; }  // omega itself is the only limit here

  LevelIndex next() const { return {k + 1, after_limit}; }
  LevelIndex prev() const {
    if (k == 0) throw Error("level index: no predecessor of " + str());
    return {k - 1, after_limit};
  }

  friend auto operator<=>(const LevelIndex& a, const LevelIndex& b) {
    if (a.after_limit != b.after_limit) return a.after_limit <=> b.after_limit;
    return a.k <=> b.k;
  }
  friend bool operator==(const LevelIndex&, const LevelIndex&) = default;

  std::string str() const {
    if (!after_limit) return std::to_string(k);
    if (k == 0) return "w";
    return "w+" + std::to_string(k);
  }

  static LevelIndex parse(const std::string& s) {
    if (s.empty()) throw Error("level index: empty");
    if (s[0] != 'w') return finite(static_cast<std::uint32_t>(std::stoul(s)));
    if (s == "w") return omega();
    if (s.size() > 2 && s[1] == '+')
      return omega_plus(static_cast<std::uint32_t>(std::stoul(s.substr(2))));
    throw Error("level index: cannot parse " + s);
  }
};

}  // namespace scott
