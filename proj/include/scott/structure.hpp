#pragma once

#include <set>
#include <string>
#include <vector>

#include "scott/diagram.hpp"
#include "scott/vocabulary.hpp"

namespace scott {

// Class sizes are positive integers or omega.
struct Multiplicity {
  long long value = 1;  // ignored when omega
  bool omega = false;

  static Multiplicity finite(long long v) { return {v, false}; }
  static Multiplicity infinite() { return {0, true}; }
  bool at_least(long long v) const { return omega || value >= v; }
  bool operator==(const Multiplicity&) const = default;
  std::string str() const { return omega ? "omega" : std::to_string(value); }
};

// A countable structure presented finitely: a finite template whose elements
// are grouped into twin classes, each blown up to its multiplicity. Within a
// class every element is interchangeable (validated), so atomic facts about
// arbitrary copies can be read off template representatives.
struct MultiplicityStructure {
  Vocabulary vocab;

  std::vector<std::string> class_names;          // sorted at load
  std::vector<Multiplicity> class_mult;

  std::vector<std::string> element_names;        // sorted at load
  std::vector<int> element_class;

  // facts[sym] = set of element-index tuples; a 0-ary symbol holds iff the
  // empty tuple is present.
  std::vector<std::set<std::vector<int>>> facts;

  int class_count() const { return static_cast<int>(class_names.size()); }
  int template_size() const { return static_cast<int>(element_names.size()); }
  std::vector<int> elements_of_class(int c) const;
  bool holds(int sym, const std::vector<int>& elems) const;

  bool is_finite() const;
  long long domain_size() const;  // finite structures only

  // Template elements every class must carry: enough to realize any
  // equality pattern inside one atomic instance, and at least two whenever
  // twins exist at all.
  long long required_representatives(int c) const;

  int find_class(const std::string& name) const;
  int find_element(const std::string& name) const;
};

// Sequence of class indices; position i stands for a fresh element of that
// class, distinct from every other position. Valid when no class is used
// more often than its multiplicity.
using AbstractTuple = std::vector<int>;

struct TwinViolation {
  int class_index = 0;
  int elem_a = 0, elem_b = 0;   // the transposition that is not an automorphism
  int sym = 0;
  std::vector<int> fact;        // a fact whose image under the swap is absent
  std::string describe(const MultiplicityStructure& s) const;
};

struct TwinReport {
  std::vector<TwinViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Parses the structure file format:
//   vocab NAME/ARITY
//   class ID mult (INT|omega)
//   elem ID class CLASSID
//   fact NAME ELEM...
//   # comment
// Lines may appear in any order. A 0-ary symbol @unit (always true) is
// injected when none is declared. The result is validated: representative
// counts and twin uniformity. Throws Error with a line number on bad input.
MultiplicityStructure load_structure(const std::string& text);

// Canonical text form: every line regenerated, then sorted lexicographically.
// load_structure(serialize_structure(s)) reproduces s exactly.
std::string serialize_structure(const MultiplicityStructure& s);

TwinReport validate_twin_uniformity(const MultiplicityStructure& s);

// All abstract width-n tuples, lexicographic by class index.
std::vector<AbstractTuple> enumerate_tuples(const MultiplicityStructure& s, int n);

// Closed-form count of the above (throws on 64-bit overflow).
unsigned long long count_tuples(const MultiplicityStructure& s, int n);

// Quantifier-free type of an abstract tuple, computed by reading each atomic
// instance off class representatives. Twin uniformity makes the choice of
// representatives irrelevant.
AtomicDiagram atomic_diagram(const MultiplicityStructure& s, const AbstractTuple& t);

// A plain finite structure on elements 0..size-1 (used by the game oracle
// and by model realization; classes play no role here).
struct ConcreteStructure {
  Vocabulary vocab;
  int size = 0;
  std::vector<std::set<std::vector<int>>> facts;
  std::vector<std::string> element_names;  // optional labels

  bool holds(int sym, const std::vector<int>& elems) const;
};

// Blow-up expansion with each omega class cut to `copies` elements (finite
// classes are kept whole). With copies >= width + depth the cut is
// invisible to games of that depth over tuples of that width.
ConcreteStructure expand_truncated(const MultiplicityStructure& s, long long copies);

// Full expansion; requires a finite structure.
ConcreteStructure expand(const MultiplicityStructure& s);

// A finite structure viewed as a MultiplicityStructure with singleton classes.
MultiplicityStructure as_multiplicity_structure(const ConcreteStructure& c);

}  // namespace scott
