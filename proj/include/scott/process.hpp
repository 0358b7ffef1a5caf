#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "scott/formula_store.hpp"
#include "scott/level_index.hpp"
#include "scott/structure.hpp"

namespace scott {

// One row of a process: the formula sets of a single level, indexed by
// width. Width n is computed iff n < by_width.size(); a present-but-empty
// set is a real (truncation) fact, not an omission.
struct Level {
  std::vector<std::vector<FormulaId>> by_width;

  int max_width() const { return static_cast<int>(by_width.size()) - 1; }
  bool has_width(int n) const { return n >= 0 && n <= max_width(); }
  const std::vector<FormulaId>& at(int n) const;
  bool contains(int n, FormulaId id) const;
  void insert(int n, FormulaId id);  // keeps the set sorted and unique
  std::size_t total() const;
};

struct TupleHash {
  std::size_t operator()(const AbstractTuple& t) const {
    std::uint64_t h = t.size();
    for (int v : t) h = hash_mix(h, static_cast<std::uint64_t>(v) + 1);
    return static_cast<std::size_t>(h);
  }
};

// Partition fixpoint certificate: every width up to `width` stopped
// refining at `level` and stayed stable through all computed rows.
struct Stabilization {
  int level = 0;
  int width = 0;
};

// A (possibly partial) Scott process: rows of formula sets at levels
// 0..k and optionally omega..omega+k'. Produced by the analyzer, decoded
// from dumps, or assembled by hand for tests.
struct ScottProcess {
  FormulaStore* store = nullptr;

  std::vector<Level> rows;        // finite levels, index = level
  std::vector<Level> limit_rows;  // levels omega + index

  int budget = 0;
  std::optional<long long> truncated_width;  // finite structures: domain size
  std::optional<Stabilization> stabilized;
  bool budget_exhausted = false;  // refinement still moving at the last row

  bool structure_derived = false;
  // per finite level: abstract tuple -> its formula there
  std::vector<std::unordered_map<AbstractTuple, FormulaId, TupleHash>> tuple_maps;

  std::vector<LevelIndex> level_indices() const;
  bool has_row(LevelIndex li) const;
  const Level& row(LevelIndex li) const;
  Level& row(LevelIndex li);
  LevelIndex last_level() const;

  FormulaId tuple_type(int level, const AbstractTuple& t) const;

  // Copy of the first `levels` finite rows (tuple maps included).
  ScottProcess prefix(int levels) const;
  // Same rows with the final row replaced (tuple maps dropped).
  ScottProcess with_last_row(Level replacement) const;
  void append_row(Level row);  // after the current last level
};

}  // namespace scott
