#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "doctest.h"
#include "scott/analyze.hpp"
#include "scott/process_kit.hpp"

using namespace scott;

namespace {

Injection initial_segment(int m, int n) {
  std::vector<int> imgs(static_cast<std::size_t>(m));
  std::iota(imgs.begin(), imgs.end(), 0);
  return Injection(n, std::move(imgs));
}

std::set<FormulaId> as_std_set(const std::vector<FormulaId>& v) {
  return std::set<FormulaId>(v.begin(), v.end());
}

}  // namespace

TEST_CASE("analyzed corpus processes satisfy every axiom") {
  for (const corpus::Entry* e : corpus::blowups()) {
    FormulaStore store(e->ms.vocab);
    ScottProcess p = analyze(store, e->ms, {.budget = 4});
    ValidationReport rep = validate_process(p);
    CHECK_MESSAGE(rep.ok(), e->name << "\n" << rep.str());
    // no truncation: nothing is exempt
    CHECK(rep.condition("1e").verdict == Verdict::Pass);
    CHECK(rep.condition("2c").verdict == Verdict::Pass);
    CHECK(e_fiber_mismatch(p) == std::nullopt);
  }
  int seen = 0;
  for (const corpus::Entry* e : corpus::small(5)) {
    if (e->ms.domain_size() == 3 && seen++ % 16 != 0) continue;
    FormulaStore store(e->ms.vocab);
    ScottProcess p = analyze(store, e->ms, {.budget = 4});
    ValidationReport rep = validate_process(p);
    CHECK_MESSAGE(rep.ok(), e->name << "\n" << rep.str());
    // width truncation exempts the initial-segment and pairing axioms
    CHECK(rep.condition("1e").verdict == Verdict::Vacuous);
    CHECK(rep.condition("2c").verdict == Verdict::Vacuous);
    CHECK(e_fiber_mismatch(p) == std::nullopt);
  }
}

TEST_CASE("every axiom trips on its targeted mutation") {
  FormulaStore store(corpus::mutation_vocab());
  std::vector<corpus::Mutation> muts = corpus::mutations(store);
  REQUIRE(muts.size() >= 10);
  std::set<std::string> hit;
  for (const corpus::Mutation& m : muts) {
    ValidationReport rep = validate_process(m.process);
    CHECK_MESSAGE(rep.condition(m.condition).verdict == Verdict::Fail,
                  m.name << " should fail " << m.condition << "\n"
                         << rep.str());
    CHECK_FALSE(rep.ok());
    hit.insert(m.condition);
  }
  // the set exercises all eight axioms
  CHECK(hit.size() == 8);
}

TEST_CASE("completion succeeds exactly on amalgamative levels") {
  int completed = 0, refused = 0, seen = 0;
  for (const corpus::Entry& e : corpus::all()) {
    if (e.concrete && e.ms.domain_size() == 3 && seen++ % 8 != 0) continue;
    if (e.concrete && e.ms.domain_size() > 4) continue;
    FormulaStore store(e.ms.vocab);
    ScottProcess p = analyze(store, e.ms, {.budget = e.concrete ? 3 : 4});
    for (int k = 1; k <= static_cast<int>(p.rows.size()); ++k) {
      ScottProcess q = p.prefix(k);
      if (q.rows.back().max_width() < 1) break;  // nothing left to complete from
      AmalgamationCheck chk = is_amalgamative(store, q.rows.back(), q.truncated_width);
      CompletionResult res = extend_by_completion(q);
      REQUIRE(res.ok() == chk.amalgamative);
      if (res.ok()) {
        ++completed;
        CHECK(res.process->rows.size() == q.rows.size() + 1);
        CHECK(validate_process(*res.process).ok());
      } else {
        ++refused;
        REQUIRE(res.witness.has_value());
        const AmalgamationWitness& w = *res.witness;
        // the witness is a genuine counterexample in the level itself
        CHECK(store.h_project(w.psi, w.j) == w.phi);
        CHECK(store.h_project(w.theta, initial_segment(w.m, w.m + 1)) == w.phi);
        CHECK_FALSE(w.describe(store).empty());
      }
    }
  }
  CHECK(completed >= 10);
  CHECK(refused >= 10);
}

TEST_CASE("the joint-extension construction meets its contract") {
  // scan amalgamative rows for common-projection pairs and amalgamate them
  int instances = 0;
  for (const corpus::Entry* e : corpus::blowups()) {
    FormulaStore store(e->ms.vocab);
    ScottProcess p = analyze(store, e->ms, {.budget = 5});
    for (std::size_t li = 0; li < p.rows.size(); ++li) {
      const Level& row = p.rows[li];
      if (row.max_width() < 3) continue;
      if (!is_amalgamative(store, row, p.truncated_width).amalgamative) continue;
      Injection j(2, {0});
      for (FormulaId psi : row.at(2))
        for (FormulaId theta : row.at(2)) {
          if (store.h_project(psi, j) != store.h_project(theta, j)) continue;
          Amalgam am = amalgamate(store, row, psi, theta, j, j);
          CHECK(store.h_project(am.rho, am.j2) == psi);
          CHECK(store.h_project(am.rho, am.k2) == theta);
          CHECK(am.j2.compose(j) == am.k2.compose(j));
          CHECK(row.contains(store.width(am.rho), am.rho));
          ++instances;
        }
    }
  }
  CHECK(instances >= 20);
}

TEST_CASE("f_set members are exactly the realized extension types") {
  int queries = 0;
  for (const corpus::Entry* e : corpus::blowups()) {
    FormulaStore store(e->ms.vocab);
    ScottProcess p = analyze(store, e->ms, {.budget = 5});
    for (int m = 0; m <= 1; ++m)
      for (int beta = 1; beta + m <= 5; ++beta)
        for (int k = 1; k <= 2; ++k)
          for (int alpha = 0; alpha + k <= beta; ++alpha) {
            if (!p.rows[static_cast<std::size_t>(beta)].has_width(m + k)) continue;
            for (const AbstractTuple& t : enumerate_tuples(e->ms, m)) {
              FormulaId phi = p.tuple_type(beta, t);
              std::vector<FormulaId> got =
                  f_set(p, phi, LevelIndex::finite(static_cast<std::uint32_t>(alpha)), k);
              ++queries;
              std::set<FormulaId> expected;
              for (const AbstractTuple& up : enumerate_tuples(e->ms, m + k))
                if (std::equal(t.begin(), t.end(), up.begin()))
                  expected.insert(p.tuple_type(alpha, up));
              CHECK_MESSAGE(as_std_set(got) == expected,
                            e->name << " width " << m << " level " << beta << " down to "
                                    << alpha << " step " << k);
            }
          }
  }
  CHECK(queries >= 100);
}

TEST_CASE("a two-type structure stabilizes and extends past the limit") {
  MultiplicityStructure s = load_structure(
      "vocab P/1\n"
      "class c mult 1\nclass d mult 1\n"
      "elem c0 class c\nelem d0 class d\n"
      "fact P c0\n");
  FormulaStore store(s.vocab);
  ScottProcess p = analyze_to_stabilization(store, s);
  REQUIRE(p.stabilized.has_value());
  CHECK(p.stabilized->level == 0);
  CHECK(p.stabilized->width == 2);

  Level iso = isolated_paths(p);
  REQUIRE(iso.max_width() == 2);
  CHECK(iso.at(0).size() == 1);
  CHECK(iso.at(1).size() == 2);
  CHECK(iso.at(2).size() == 2);

  LevelIndex deepest = LevelIndex::finite(static_cast<std::uint32_t>(p.rows.size()) - 1);
  Path rho = path_of(p, unique_sentence(p, deepest));
  std::vector<Path> closure = minimal_set(p, rho);
  CHECK(closure.size() == 5);

  ScottProcess ext = extend_at_limit(p, rho);
  REQUIRE(ext.limit_rows.size() == 1);
  CHECK(ext.limit_rows[0].max_width() == 2);
  CHECK(validate_process(ext).ok());

  // starting from a width-1 path costs one width of certainty
  FormulaId one = p.rows.back().at(1)[0];
  ScottProcess ext1 = extend_at_limit(p, path_of(p, one));
  CHECK(ext1.limit_rows[0].max_width() == 1);
  CHECK(validate_process(ext1).ok());
}

TEST_CASE("unique_sentence rejects a level with two sentences") {
  FormulaStore store(corpus::mutation_vocab());
  ScottProcess p = analyze(store, corpus::by_name("g_pair").ms, {.budget = 3});
  CHECK(unique_sentence(p, LevelIndex::finite(0)) == p.rows[0].at(0)[0]);
  ScottProcess q = p;
  AtomicDiagram empty(store.vocab(), 0);  // unit sign false: never analyzed
  q.rows[0].insert(0, store.intern_level0(empty));
  CHECK_THROWS_AS((void)unique_sentence(q, LevelIndex::finite(0)), Error);
  CHECK_THROWS_AS((void)unique_sentence(p, LevelIndex::omega()), Error);
}
