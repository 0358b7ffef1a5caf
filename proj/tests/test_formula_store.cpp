#include <algorithm>
#include <vector>

#include "doctest.h"
#include "scott/formula_store.hpp"

using namespace scott;

namespace {

Vocabulary sr_vocab() {
  Vocabulary v;
  v.add("S", 0);
  v.add("R", 2);
  return v;
}

// Level-0 formula over {S/0, R/2} from explicit signs. `rxx[a][b]` is the
// sign of R(x_a, x_b); S is always asserted.
FormulaId level0(FormulaStore& store, int width, const std::vector<std::vector<bool>>& rxx,
                 bool s = true) {
  const Vocabulary& v = store.vocab();
  AtomicDiagram d(v, width);
  int r = *v.find("R");
  int sym_s = *v.find("S");
  for (int a = 0; a < width; ++a)
    for (int b = 0; b < width; ++b)
      d.set_sign(v.instance_index(width, r, {a, b}),
                 rxx[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
  d.set_sign(v.instance_index(width, sym_s, {}), s);
  return store.intern_level0(d);
}

}  // namespace

TEST_CASE("atomic type counts follow 2^(n^2+1)") {
  Vocabulary v = sr_vocab();
  CHECK(count_atomic_types(v, 0) == 2);
  CHECK(count_atomic_types(v, 1) == 4);
  CHECK(count_atomic_types(v, 2) == 32);
  CHECK(count_atomic_types(v, 3) == 1024);
}

TEST_CASE("the {S,R} worked example identities hold") {
  FormulaStore store(sr_vocab());

  FormulaId s_true = level0(store, 0, {});
  FormulaId psi10 = level0(store, 1, {{true}});
  FormulaId phi10 = level0(store, 1, {{false}});
  CHECK(psi10 != phi10);

  // x0 and x1 unrelated, both looped / only x0 looped
  FormulaId psi20 = level0(store, 2, {{true, false}, {false, true}});
  FormulaId phi20 = level0(store, 2, {{true, false}, {false, false}});

  CHECK(store.h_project(psi20, Injection(2, {0})) == psi10);
  CHECK(store.h_project(phi20, Injection(2, {1})) == phi10);

  FormulaId psi01 = store.intern_successor(s_true, {psi10});
  FormulaId phi01 = store.intern_successor(s_true, {psi10, phi10});
  CHECK(store.e_set(psi01) == std::vector<FormulaId>{psi10});
  {
    std::vector<FormulaId> e = store.e_set(phi01);
    CHECK(e.size() == 2);
    CHECK(std::count(e.begin(), e.end(), psi10) == 1);
    CHECK(std::count(e.begin(), e.end(), phi10) == 1);
  }

  FormulaId psi11 = store.intern_successor(psi10, {psi20});
  FormulaId phi11 = store.intern_successor(psi10, {phi20});
  CHECK(store.e_set(psi11) == std::vector<FormulaId>{psi20});
  CHECK(store.e_set(phi11) == std::vector<FormulaId>{phi20});

  CHECK(store.v_project(psi11, LevelIndex::finite(0)) == psi10);
  CHECK(store.v_project(phi11, LevelIndex::finite(0)) == psi10);

  CHECK(store.h_project(psi11, Injection(1, {})) == psi01);
  CHECK(store.h_project(phi11, Injection(1, {})) == phi01);
}

TEST_CASE("interning is hash-consed") {
  FormulaStore store(sr_vocab());
  FormulaId a = level0(store, 1, {{true}});
  FormulaId b = level0(store, 1, {{true}});
  CHECK(a == b);
  FormulaId s_true = level0(store, 0, {});
  FormulaId c = store.intern_successor(s_true, {a});
  FormulaId d = store.intern_successor(s_true, {b});
  CHECK(c == d);
  CHECK(store.size() == 3);
}

TEST_CASE("horizontal projection composes") {
  FormulaStore store(sr_vocab());
  FormulaId theta =
      level0(store, 3, {{true, false, true}, {false, false, true}, {true, true, false}});
  for (const Injection& j : all_injections(2, 3))
    for (const Injection& k : all_injections(1, 2))
      CHECK(store.h_project(store.h_project(theta, j), k) ==
            store.h_project(theta, j.compose(k)));
}

TEST_CASE("the structural order is a schedule-free total order") {
  FormulaStore s1(sr_vocab());
  FormulaStore s2(sr_vocab());

  FormulaId a1 = level0(s1, 1, {{true}});
  FormulaId b1 = level0(s1, 1, {{false}});
  // opposite interning order in the second store
  FormulaId b2 = level0(s2, 1, {{false}});
  FormulaId a2 = level0(s2, 1, {{true}});

  CHECK(s1.compare(a1, a1) == 0);
  CHECK(s1.compare(a1, b1) == -s1.compare(b1, a1));
  bool first_smaller = s1.compare(a1, b1) < 0;
  CHECK((s2.compare(a2, b2) < 0) == first_smaller);
}
