#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scott/analyze.hpp"
#include "scott/process.hpp"

namespace scott {

// ---------------------------------------------------------------------------
// Axiom validation

enum class Verdict { Pass, Fail, Vacuous };

// One axiom's verdict. Pass means every instance with all cells computed
// held. Vacuous means no instance failed, but some instances are exempt
// because the process is a finite-structure truncation (widths above the
// domain size cannot carry the axiom literally). Fail carries the first
// counterexample in canonical formula order.
struct ConditionReport {
  std::string name;  // "1a".."1e", "2a".."2c"
  Verdict verdict = Verdict::Pass;
  std::string detail;
  std::vector<FormulaId> formulas;  // counterexample payload
  std::optional<LevelIndex> level;

  std::string line() const;  // "PASS 1a ..." / "FAIL 2a ..." / "VACUOUS 1e ..."
};

struct ValidationReport {
  std::vector<ConditionReport> conditions;

  bool ok() const;  // no Fail
  const ConditionReport& condition(const std::string& name) const;
  std::string str() const;
};

ValidationReport validate_process(const ScottProcess& p);

// The unique width-0 formula at a level; |Phi^0| != 1 is an error.
FormulaId unique_sentence(const ScottProcess& p, LevelIndex alpha);

// ---------------------------------------------------------------------------
// Completion and amalgamation

// The unique next level in which every formula has a singleton vertical
// preimage: each phi gets one successor node whose extension set is the
// whole width-(n+1) fiber over phi. The top width is dropped unless the
// process is width-truncated (then the missing fiber is known empty).
Level maximal_completion(const ScottProcess& p);

struct AmalgamationWitness {
  int m = 0, n = 0;
  FormulaId phi = kNoFormula;    // width m
  FormulaId psi = kNoFormula;    // width n, with h_project(psi, j) = phi
  Injection j;
  FormulaId theta = kNoFormula;  // the one-point extension of phi not realized
  std::string describe(FormulaStore& store) const;
};

struct AmalgamationCheck {
  bool amalgamative = true;
  std::optional<AmalgamationWitness> witness;
  int checked_up_to_width = -1;
};

// The fiber set equality: for every (phi, j, psi) with h_project(psi, j) =
// phi, the one-point extensions of phi are exactly the projections of the
// one-point extensions of psi along j extended by one image. Instances
// whose widths are not present are skipped (or known empty when
// truncated_width says so).
AmalgamationCheck is_amalgamative(FormulaStore& store, const Level& level,
                                  std::optional<long long> truncated_width = std::nullopt);

struct CompletionResult {
  std::optional<ScottProcess> process;
  std::optional<AmalgamationWitness> witness;  // set when refused
  bool ok() const { return process.has_value(); }
};

// Appends the maximal completion and revalidates. Succeeds exactly when
// the last level amalgamates; the two checks are computed independently
// and cross-asserted.
CompletionResult extend_by_completion(const ScottProcess& p);

struct Amalgam {
  FormulaId rho = kNoFormula;
  Injection j2, k2;  // psi = h(rho, j2), theta = h(rho, k2), j2 o j = k2 o k
};

// Joint extension of psi and theta over their common projection
// h_project(psi, j) = h_project(theta, k), by the inductive construction:
// peel the last unmatched variable of psi, recurse, then either find the
// missing image directly or lift one width through the level's fibers.
Amalgam amalgamate(FormulaStore& store, const Level& level, FormulaId psi, FormulaId theta,
                   const Injection& j, const Injection& k);

// ---------------------------------------------------------------------------
// F operator

// Members of F(phi) of width m+k at level alpha, computed two ways and
// cross-asserted: by chasing extension sets down from v_project(phi,
// alpha+k), and as v-projections of the width-(m+k) H-fiber over phi at
// phi's own level.
std::vector<FormulaId> f_set(const ScottProcess& p, FormulaId phi, LevelIndex alpha, int k);

// ---------------------------------------------------------------------------
// Rank diagnostics

// True iff every formula at phi's level that H-projects onto phi has a
// singleton vertical preimage one level up (checked at available widths).
bool injective_beyond(const ScottProcess& p, FormulaId phi);

// Rank of a symbolic process: least level from which vertical projection
// is injective on every computed width, plus a pre-rank style upper bound
// from the least injective-beyond certificate when one exists.
RankReport process_rank(const ScottProcess& p);

// ---------------------------------------------------------------------------
// Paths, minimal sets, limit extension

// A vertical-projection-coherent sequence: entries[a] at finite level a,
// entries[a] = v_project(entries[b], a) for a < b.
struct Path {
  int width = 0;
  std::vector<FormulaId> entries;
};

// The path whose deepest entry is `top`, filled in by vertical projection.
Path path_of(const ScottProcess& p, FormulaId top);

// Interns a path as a limit-level formula.
FormulaId intern_path(FormulaStore& store, const Path& path);

// The stable formulas of a stabilization-certified process, lifted to
// limit-level nodes: one per formula of the deepest row, at widths within
// the certificate. These are exactly the isolated paths within budget.
Level isolated_paths(const ScottProcess& p);

// Minimal set of rho: closure of rho under extension-set steps at the
// stable rows and horizontal projections with arbitrary injections.
std::vector<Path> minimal_set(const ScottProcess& p, const Path& rho);

// Appends the minimal set of rho as the level-omega row.
ScottProcess extend_at_limit(const ScottProcess& p, const Path& rho);

// ---------------------------------------------------------------------------
// Cross-check helpers (theorems about valid processes, asserted in tests)

// For every alpha < beta and phi at level beta: the extension set of
// v_project(phi, alpha+1) equals the v-projected width-up H-fiber over
// phi. Returns the first mismatch, if any.
std::optional<std::string> e_fiber_mismatch(const ScottProcess& p);

}  // namespace scott
