#pragma once

#include <vector>

#include "scott/common.hpp"
#include "scott/vocabulary.hpp"

namespace scott {

// Quantifier-free type of a width-n variable tuple: one sign per atomic
// instance. Pairwise distinctness of the variables is implicit (it holds
// for every member of the width class) and is not stored.
struct AtomicDiagram {
  int width = 0;
  std::vector<std::uint64_t> bits;  // instance_count(width) signs, packed

  AtomicDiagram() = default;
  AtomicDiagram(const Vocabulary& vocab, int width);

  bool sign(long long instance) const {
    return (bits[instance >> 6] >> (instance & 63)) & 1;
  }
  void set_sign(long long instance, bool value) {
    if (value)
      bits[instance >> 6] |= 1ULL << (instance & 63);
    else
      bits[instance >> 6] &= ~(1ULL << (instance & 63));
  }

  bool operator==(const AtomicDiagram&) const = default;

  std::uint64_t hash() const;
  // Lowercase hex, one digit per 4 instances, little-endian by instance.
  std::string hex(const Vocabulary& vocab) const;
  static AtomicDiagram from_hex(const Vocabulary& vocab, int width, const std::string& hex);
};

}  // namespace scott
