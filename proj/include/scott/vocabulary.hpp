#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scott/common.hpp"

namespace scott {

// Finite relational signature. Equality is built in and never declared.
// Symbols are kept sorted by name so that two files declaring the same
// signature in different line orders produce identical indexing.
class Vocabulary {
 public:
  struct Symbol {
    std::string name;
    int arity = 0;
    bool operator==(const Symbol&) const = default;
  };

  static constexpr const char* kUnitName = "@unit";

  Vocabulary() = default;

  // Adds a symbol, keeping name order. Throws on duplicates or bad arity.
  void add(const std::string& name, int arity);

  // Guarantees at least one 0-ary symbol by injecting @unit when absent.
  // Returns true when the injection happened.
  bool ensure_zero_ary();

  int size() const { return static_cast<int>(symbols_.size()); }
  const Symbol& symbol(int i) const { return symbols_.at(i); }
  const std::vector<Symbol>& symbols() const { return symbols_; }
  std::optional<int> find(const std::string& name) const;
  int max_arity() const;
  bool has_zero_ary() const;

  // Atomic instances over variables x_0..x_{width-1}: one per symbol per
  // argument map f : arity -> width. Equality literals are implicit and
  // carry no information inside a width class, so they are not counted.
  long long instance_count(int width) const;

  // Flat index of instance (symbol s, args f) in the fixed enumeration:
  // symbols in order, argument maps lexicographic.
  long long instance_index(int width, int sym, const std::vector<int>& args) const;

  // Recovers (symbol, args) from a flat index.
  std::pair<int, std::vector<int>> instance_at(int width, long long index) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<Symbol> symbols_;
};

// |Psi^n_0| for this signature: 2^(number of atomic instances).
// Throws Error when the count does not fit in 64 bits.
unsigned long long count_atomic_types(const Vocabulary& vocab, int width);

}  // namespace scott
