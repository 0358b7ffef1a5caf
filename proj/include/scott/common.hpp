#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace scott {

// Thrown for malformed inputs and violated preconditions. Validation-style
// operations return report values instead; see process_kit.hpp.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Index into a FormulaStore node table. Valid only relative to the store
// that produced it. Cross-session identity goes through canonical_encode.
using FormulaId = std::uint32_t;

inline constexpr FormulaId kNoFormula = UINT32_MAX;

inline std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace scott
