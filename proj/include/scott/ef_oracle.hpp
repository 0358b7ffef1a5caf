#pragma once

#include <unordered_map>
#include <vector>

#include "scott/structure.hpp"

namespace scott {

// Back-and-forth equivalence by the naive recursion on one-point
// extensions, memoized. Shares nothing with the refinement engine; this is
// the cross-check oracle. Tuples must consist of distinct elements.
class EfOracle {
 public:
  EfOracle(const ConcreteStructure& a, const ConcreteStructure& b);

  // true iff the two pointed structures agree to quantifier depth alpha
  bool equivalent(const std::vector<int>& a, const std::vector<int>& b, int alpha);

 private:
  struct Key {
    std::vector<int> a, b;
    int alpha;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  bool atomic_equal(const std::vector<int>& a, const std::vector<int>& b) const;

  const ConcreteStructure& a_;
  const ConcreteStructure& b_;
  std::unordered_map<Key, bool, KeyHash> memo_;
};

bool ef_equivalent(const ConcreteStructure& a, const std::vector<int>& at,
                   const ConcreteStructure& b, const std::vector<int>& bt, int alpha);

// Blow-up version: both sides are expanded with width + alpha copies of
// each omega class, which a depth-alpha game over these tuples cannot
// tell apart from the full blow-up.
bool ef_equivalent(const MultiplicityStructure& a, const AbstractTuple& at,
                   const MultiplicityStructure& b, const AbstractTuple& bt, int alpha);

// Isomorphism of finite multiplicity structures, decided by refining the
// disjoint union of the two tuple spaces against a joint colour dictionary
// until nothing moves, then comparing the empty tuples' colours. For finite
// structures agreement at the fixpoint is isomorphism.
bool iso_check(const MultiplicityStructure& a, const MultiplicityStructure& b);

}  // namespace scott
