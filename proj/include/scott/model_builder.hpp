#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scott/process.hpp"
#include "scott/process_kit.hpp"
#include "scott/structure.hpp"

namespace scott {

// ---------------------------------------------------------------------------
// Threads

// One instance of the thread extension condition: psi lies in the
// extension set of the level-(alpha+1) projection of phi_m and wants a
// witness pair (n, y), m < n, m <= y < n, with
//   psi = V_alpha(H(phi_n, i_m u {(x_m, x_y)})).
struct ThreadObligation {
  int m = 0;
  LevelIndex alpha;
  FormulaId psi = kNoFormula;
  bool met = false;
  int witness_n = -1;
  int witness_y = -1;
  bool blocked = false;  // no admissible witness inside the computed rows
  std::string note;
};

// One completeness demand: a top-row formula that must appear as an
// H-projection of some thread formula.
struct CompletionGoal {
  FormulaId target = kNoFormula;
  int width = 0;
  bool met = false;
  int witness_n = -1;
  Injection witness_j;
  bool blocked = false;
  std::string note;
};

// A width-budgeted prefix of a thread through the top row of a process:
// formulas[n] has width n and formulas[m] = H(formulas[n], i_m) for m < n.
// The ledgers record which obligations and goals the prefix discharges;
// a prefix whose obligations are all met realizes the process's levels
// below the top on its first `width()` elements.
struct Thread {
  FormulaStore* store = nullptr;
  std::vector<FormulaId> formulas;
  std::vector<ThreadObligation> obligations;
  std::vector<CompletionGoal> goals;
  std::vector<std::string> notes;

  int width() const { return static_cast<int>(formulas.size()) - 1; }
  bool obligations_met() const;
  bool complete() const;        // every goal met
  std::string ledger() const;   // one line per obligation and goal
};

// Builds the thread prefix deterministically: phi_0 is the unique
// sentence, each later formula is the canonically least member of the
// width-up fiber that discharges the oldest pending obligation. When no
// obligation is pending, the oldest unmet completeness goal is served by
// a pairing stage; when neither applies the fiber is walked canonically.
// Extension stops early, with a note, when the top row runs out of
// widths (finite structures stop at their domain size).
Thread build_thread(const ScottProcess& p, int elements);

// Reads the realized structure off the deepest thread formula: element i
// is named c<i>, facts come from the level-0 projection. Classes are all
// trivial. Optional names override the defaults.
MultiplicityStructure realize_model(const Thread& t, std::vector<std::string> names = {});

// ---------------------------------------------------------------------------
// Model pairs

// A thread through the top row of p together with an index set `chosen`
// whose induced subthread runs through a replacement top row: the outer
// model realizes p, the inner model (the substructure on the chosen
// indices) realizes p with its last row replaced.
struct ModelPair {
  Thread outer_thread;
  std::vector<int> chosen;                 // ascending outer indices
  std::vector<FormulaId> inner_formulas;   // inner_formulas[m] has width m
  std::vector<ThreadObligation> inner_obligations;
  std::vector<CompletionGoal> inner_goals;
  MultiplicityStructure outer;
  MultiplicityStructure inner;
  std::vector<std::string> notes;

  bool inner_obligations_met() const;
  std::string ledger() const;  // both threads' obligations and goals
};

// `sub_level` must be a subset of p's top row and the process with its
// last row replaced by `sub_level` must validate; otherwise this throws
// with the first failing condition. Stages that would need witnesses
// beyond the computed rows leave pending ledger entries instead of
// failing.
ModelPair build_model_pair(const ScottProcess& p, const Level& sub_level, int elements);

// ---------------------------------------------------------------------------
// Weavings

// Strong-weaving demand at an assigned index set: psi is a width-up
// fiber formula over phi_a and wants an index set b = a u {beta} with
//   psi = H(phi_b, j_{a,b} u {(x_{|a|}, y)}),
// y the unique variable of X_{|b|} outside the range of j_{a,b}.
struct WeavingObligation {
  std::uint32_t a = 0;  // bitmask over {0..K-1}
  FormulaId psi = kNoFormula;
  bool met = false;
  std::uint32_t witness_b = 0;
  int witness_y = -1;
};

// Formulas assigned to every subset of {0..K-1}, coherent under the
// order embeddings j_{a,b}. A fully discharged ledger makes the family a
// strong weaving over the computed index set.
struct WeavingFamily {
  FormulaStore* store = nullptr;
  int index_budget = 0;                // K
  std::vector<FormulaId> assignment;   // by bitmask; width = popcount
  std::vector<WeavingObligation> ledger;
  std::vector<std::string> notes;

  FormulaId at(std::uint32_t mask) const;
  int met_count() const;
  std::string ledger_text() const;
};

// The order embedding j_{a,b} between subsets a <= b of the index set:
// position m of a maps to the rank of a's m-th element inside b.
Injection subset_injection(std::uint32_t a, std::uint32_t b);

// Builds a family over {0..K-1} for the top row of p, which must
// amalgamate (checked; refusal carries the witness). Each new index
// serves the oldest pending fiber obligation, then the new assignments
// are merged with the existing ones one index at a time, preferring the
// amalgamation recursion and falling back to a direct row search.
// `effort` caps the total number of merge candidates inspected.
WeavingFamily build_weaving(const ScottProcess& p, int index_budget, long long effort = 500000);

struct WeavingReport {
  bool widths_ok = true;        // each phi_a has width |a|
  bool membership_ok = true;    // each phi_a sits in the top row
  bool projections_ok = true;   // phi_a = H(phi_b, j_{a,b}) for all a <= b
  bool extension_ok = true;     // fiber demands met inside the index set
  bool ledger_ok = true;        // every ledger entry rechecks
  bool cover_ok = true;         // every top formula of width <= K is H-reached
  bool semantics_ok = true;     // realized prefix matches assignments at level 0
  int obligations_met = 0;
  int obligations_pending = 0;
  std::vector<std::string> failures;
  std::vector<std::string> lines;

  bool ok() const;
  std::string str() const;
};

// Exhaustive recheck of the weaving conditions over the index set, the
// ledger, H-coverage of the top row, and the atomic diagrams of the
// realized prefix.
WeavingReport verify_weaving(const WeavingFamily& w, const ScottProcess& p);

// The K-element structure read off the full-set assignment.
MultiplicityStructure realize_weaving(const WeavingFamily& w);

}  // namespace scott
