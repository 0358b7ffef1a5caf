#pragma once

#include <string>
#include <vector>

#include "scott/common.hpp"

namespace scott {

// Injection from X_m into X_n, m = images.size(). images[i] is the index of
// the variable x_i is sent to; entries are pairwise distinct.
struct Injection {
  int target_width = 0;
  std::vector<int> images;

  Injection() = default;
  Injection(int target, std::vector<int> imgs);

  int source_width() const { return static_cast<int>(images.size()); }
  bool is_identity() const;
  bool is_permutation() const { return source_width() == target_width; }

  static Injection identity(int n);
  // this o inner : source(inner) -> target(this)
  Injection compose(const Injection& inner) const;
  Injection inverse() const;  // permutations only
  // The extension j u {(x_m, y)} used when projecting one-point extension sets.
  Injection extended(int y) const;
  // Targets not hit by the injection, ascending.
  std::vector<int> cotargets() const;

  bool operator==(const Injection&) const = default;
  std::uint64_t hash() const;
  std::string str() const;  // e.g. "[0,2]->4"
  static Injection parse(const std::string& text);  // "0,2->4"
};

// All injections X_m -> X_n in lexicographic image order.
std::vector<Injection> all_injections(int m, int n);
// All permutations of X_n.
std::vector<Injection> all_permutations(int n);

}  // namespace scott
