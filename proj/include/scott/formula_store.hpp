#pragma once

#include <mutex>
#include <unordered_map>
#include <vector>

#include "scott/diagram.hpp"
#include "scott/injection.hpp"
#include "scott/level_index.hpp"
#include "scott/vocabulary.hpp"

namespace scott {

enum class NodeKind { Level0, Successor, LimitPath };

// One interned formula. Identity is structural: equal content always yields
// the same FormulaId within a store.
struct FormulaNode {
  NodeKind kind = NodeKind::Level0;
  int width = 0;
  LevelIndex level;
  AtomicDiagram diagram;             // Level0: the quantifier-free type
  FormulaId parent = kNoFormula;     // Successor: one-level-down projection
  std::vector<FormulaId> children;   // Successor: one-point extension set, sorted by id
  std::vector<FormulaId> entries;    // LimitPath: entry per recorded finite level
};

// Append-only interner for formulas over one signature, with memoized
// projections. All public methods are linearizable behind one lock.
class FormulaStore {
 public:
  explicit FormulaStore(Vocabulary vocab);

  const Vocabulary& vocab() const { return vocab_; }

  FormulaId intern_level0(const AtomicDiagram& d);
  // children may be unsorted and may repeat; stored deduplicated by id.
  FormulaId intern_successor(FormulaId parent, std::vector<FormulaId> children);
  // entries[i] must sit at finite level i; consecutive entries must be
  // related by vertical projection. The node lives at level omega.
  FormulaId intern_limit(std::vector<FormulaId> entries);

  const FormulaNode& node(FormulaId id) const;
  int width(FormulaId id) const { return node(id).width; }
  LevelIndex level(FormulaId id) const { return node(id).level; }
  std::size_t size() const;

  // One-point extension set of a successor-level formula.
  std::vector<FormulaId> e_set(FormulaId id) const;

  // V_{target,level(id)}: drops a formula to a lower (or equal) level.
  FormulaId v_project(FormulaId id, LevelIndex target);

  // H^{width(id)}(id, j): restricts to the variables hit by j and renames by
  // the inverse of j. j.target_width must equal width(id).
  FormulaId h_project(FormulaId id, const Injection& j);

  // Session-independent structural total order; 0 only for equal ids.
  int compare(FormulaId a, FormulaId b);
  // children of a successor node, sorted by compare.
  std::vector<FormulaId> canonical_children(FormulaId id);

  // Infinitary-syntax text: level 0 as a signed conjunction of atomic
  // instances plus distinctness, successors as
  //   phi ^ (Ex_n psi)... ^ (Ax_n(guard -> psi v ...)).
  std::string render(FormulaId id);

 private:
  struct DiagramKey;
  struct SuccKey;
  struct VecKey;
  struct HKey;
  struct PairKey;

  const FormulaNode& node_unlocked(FormulaId id) const;
  FormulaId intern_level0_unlocked(const AtomicDiagram& d);
  FormulaId intern_successor_unlocked(FormulaId parent, std::vector<FormulaId> children);
  FormulaId intern_limit_unlocked(std::vector<FormulaId> entries);
  FormulaId v_project_unlocked(FormulaId id, LevelIndex target);
  FormulaId h_project_unlocked(FormulaId id, const Injection& j);
  int compare_unlocked(FormulaId a, FormulaId b);
  std::vector<FormulaId> canonical_children_unlocked(FormulaId id);
  std::string render_unlocked(FormulaId id);

  Vocabulary vocab_;
  mutable std::recursive_mutex mutex_;
  std::vector<FormulaNode> nodes_;

  std::unordered_map<std::uint64_t, std::vector<FormulaId>> level0_index_;
  std::unordered_map<std::uint64_t, std::vector<FormulaId>> successor_index_;
  std::unordered_map<std::uint64_t, std::vector<FormulaId>> limit_index_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::pair<FormulaId, Injection>, FormulaId>>>
      h_memo_;
  std::unordered_map<std::uint64_t, int> compare_memo_;
  std::unordered_map<FormulaId, std::vector<FormulaId>> canon_children_;
};

}  // namespace scott
