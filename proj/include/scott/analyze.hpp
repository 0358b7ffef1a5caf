#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "scott/process.hpp"
#include "scott/structure.hpp"

namespace scott {

// Iteration order used while interning formulas. The resulting process
// is the same either way; this exists so tests can demonstrate that.
enum class Schedule { Forward, Reversed, Shuffled };

struct AnalyzeOptions {
  int budget = 6;
  Schedule schedule = Schedule::Forward;
  std::uint64_t shuffle_seed = 0x51c0ffee;
};

// Computes the formula sets of `s` level by level.
//
// Structures without an omega class get the full rectangle of cells
// (widths 0..domain size, levels 0..budget), since all wider sets are
// known to be empty. Structures with an omega class get the triangle
// width + level <= budget: each extra level costs one width of
// evidence, and nothing beyond the triangle is knowable at this budget.
ScottProcess analyze(FormulaStore& store, const MultiplicityStructure& s,
                     const AnalyzeOptions& opts = {});

// Re-runs analyze with doubling budgets until the partition refinement
// certifiably stops moving, or the cap is reached.
ScottProcess analyze_to_stabilization(FormulaStore& store, const MultiplicityStructure& s,
                                      int initial_budget = 4, int budget_cap = 64);

struct RankReport {
  std::optional<std::uint32_t> rank;  // least level from which nothing refines
  bool exact = false;                 // true only when every width is covered
  int certified_width = -1;           // stability witnessed for widths <= this
  bool budget_exhausted = false;

  struct WidthEvidence {
    int width = 0;
    int stable_from = 0;  // sizes constant from this level on
    int top_level = 0;    // last computed level at this width
    bool witnessed = false;
  };
  std::vector<WidthEvidence> evidence;

  // An injective-beyond certificate: a width-w formula at level l whose
  // H-preimages all have singleton vertical preimages bounds the rank by
  // l + w, whatever the rest of the process does.
  struct PrerankCertificate {
    int level = 0;
    int width = 0;
    FormulaId formula = kNoFormula;
    int bound = 0;
  };
  std::optional<PrerankCertificate> prerank;

  std::string summary() const;
};

RankReport rank_of_structure(const ScottProcess& p);

// The row-size scan behind rank_of_structure, usable on any process with
// finite rows (decoded dumps, hand-built sequences).
RankReport scan_rank_evidence(const ScottProcess& p);

}  // namespace scott
