#include <string>
#include <vector>

#include "corpus.hpp"
#include "doctest.h"
#include "scott/analyze.hpp"
#include "scott/ef_oracle.hpp"
#include "scott/process_kit.hpp"

using namespace scott;

namespace {

// Classified cells only: outside the computed rectangle/triangle
// tuple_type throws by design.
bool cell(const ScottProcess& p, int level, int width) {
  return level < static_cast<int>(p.rows.size()) && p.rows[level].has_width(width);
}

// Refinement-vs-game agreement over one structure, all same-width tuple
// pairs with the cell computed.
void check_against_games(const MultiplicityStructure& ms, const ScottProcess& p,
                         int max_width, int max_alpha) {
  for (int w = 1; w <= max_width; ++w) {
    std::vector<AbstractTuple> tuples = enumerate_tuples(ms, w);
    for (const AbstractTuple& s : tuples)
      for (const AbstractTuple& t : tuples)
        for (int alpha = 0; alpha <= max_alpha; ++alpha) {
          if (!cell(p, alpha, w)) continue;
          bool same_type = p.tuple_type(alpha, s) == p.tuple_type(alpha, t);
          bool game = ef_equivalent(ms, s, ms, t, alpha);
          CHECK_MESSAGE(same_type == game,
                        "width " << w << " alpha " << alpha << " tuples disagree");
        }
  }
}

}  // namespace

TEST_CASE("refinement agrees with the back-and-forth oracle on small graphs") {
  // exhaustive for 1..2 elements, a fixed slice of the 512 three-element
  // ones; the acceptance run sweeps everything
  int seen = 0, checked = 0;
  for (const corpus::Entry* e : corpus::small(3)) {
    if (e->ms.domain_size() == 3 && seen++ % 16 != 0) continue;
    ++checked;
    FormulaStore store(e->ms.vocab);
    ScottProcess p = analyze(store, e->ms, {.budget = 4});
    check_against_games(e->ms, p, 3, 4);
  }
  CHECK(checked >= 50);
}

TEST_CASE("refinement agrees with the back-and-forth oracle on blow-ups") {
  for (const corpus::Entry* e : corpus::blowups()) {
    FormulaStore store(e->ms.vocab);
    ScottProcess p = analyze(store, e->ms, {.budget = 5});
    check_against_games(e->ms, p, 2, 3);
  }
}

TEST_CASE("iso_check matches brute-force bijection search") {
  std::vector<const corpus::Entry*> pool = corpus::small(2);
  for (const corpus::Entry* a : pool)
    for (const corpus::Entry* b : pool) {
      bool brute = corpus::brute_iso(*a->concrete, *b->concrete);
      CHECK_MESSAGE(iso_check(a->ms, b->ms) == brute, a->name << " vs " << b->name);
    }
}

TEST_CASE("iso_check is invariant under element renaming") {
  for (const corpus::Entry* e : corpus::small(5)) {
    if (e->name.find("rand") == std::string::npos) continue;
    const ConcreteStructure& c = *e->concrete;
    // reverse the element order
    int n = c.size;
    ConcreteStructure renamed;
    renamed.vocab = c.vocab;
    renamed.size = n;
    renamed.facts.resize(c.facts.size());
    for (std::size_t sym = 0; sym < c.facts.size(); ++sym)
      for (const std::vector<int>& f : c.facts[sym]) {
        std::vector<int> g = f;
        for (int& v : g) v = n - 1 - v;
        renamed.facts[sym].insert(g);
      }
    for (int i = 0; i < n; ++i) renamed.element_names.push_back("r" + std::to_string(i));
    CHECK(iso_check(e->ms, as_multiplicity_structure(renamed)));
    CHECK(corpus::brute_iso(c, renamed));
  }
}

TEST_CASE("deeper levels only refine, never merge") {
  for (const corpus::Entry* e : corpus::blowups()) {
    FormulaStore store(e->ms.vocab);
    ScottProcess p = analyze(store, e->ms, {.budget = 5});
    for (int w = 1; w <= 2; ++w) {
      std::vector<AbstractTuple> tuples = enumerate_tuples(e->ms, w);
      for (const AbstractTuple& s : tuples)
        for (const AbstractTuple& t : tuples)
          for (int beta = 1; beta + w <= 5; ++beta) {
            if (!cell(p, beta, w)) continue;
            if (p.tuple_type(beta, s) == p.tuple_type(beta, t))
              CHECK(p.tuple_type(beta - 1, s) == p.tuple_type(beta - 1, t));
          }
    }
  }
}

TEST_CASE("the two-class blow-up has the frozen formula counts and rank") {
  const corpus::Entry* g = nullptr;
  for (const corpus::Entry& e : corpus::all())
    if (e.name == "g_pair") g = &e;
  REQUIRE(g != nullptr);

  FormulaStore store(g->ms.vocab);
  ScottProcess p = analyze(store, g->ms, {.budget = 5});

  CHECK(p.rows[0].at(1).size() == 1);
  CHECK(p.rows[1].at(1).size() == 2);

  RankReport rep = rank_of_structure(p);
  REQUIRE(rep.rank.has_value());
  CHECK(*rep.rank == 1);
  CHECK_FALSE(rep.exact);  // omega classes leave widths beyond the budget open
  CHECK(rep.certified_width >= 2);

  // A related pair of copies pins its class pair at level 0 already; a
  // single copy does not (both classes look alike in one variable).
  int b = g->ms.find_class("b");
  int a = g->ms.find_class("a");
  FormulaId pair_bb = p.tuple_type(0, {b, b});
  FormulaId single = p.tuple_type(0, {a});
  CHECK(injective_beyond(p, pair_bb));
  CHECK_FALSE(injective_beyond(p, single));
}

TEST_CASE("stabilization certificates appear at doubling budgets") {
  for (const corpus::Entry* e : corpus::blowups()) {
    FormulaStore store(e->ms.vocab);
    ScottProcess p = analyze_to_stabilization(store, e->ms);
    REQUIRE_MESSAGE(p.stabilized.has_value(), e->name);
    CHECK(p.stabilized->width >= 1);
  }
}

TEST_CASE("the iteration schedule does not change the process") {
  for (const corpus::Entry* e : corpus::blowups()) {
    FormulaStore store(e->ms.vocab);
    ScottProcess fwd = analyze(store, e->ms, {.budget = 4, .schedule = Schedule::Forward});
    ScottProcess rev = analyze(store, e->ms, {.budget = 4, .schedule = Schedule::Reversed});
    ScottProcess shuf = analyze(store, e->ms, {.budget = 4, .schedule = Schedule::Shuffled});
    REQUIRE(fwd.rows.size() == rev.rows.size());
    REQUIRE(fwd.rows.size() == shuf.rows.size());
    for (std::size_t l = 0; l < fwd.rows.size(); ++l) {
      CHECK(fwd.rows[l].by_width == rev.rows[l].by_width);
      CHECK(fwd.rows[l].by_width == shuf.rows[l].by_width);
    }
  }
}
