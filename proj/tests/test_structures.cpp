#include <set>

#include "corpus.hpp"
#include "doctest.h"
#include "scott/ef_oracle.hpp"
#include "scott/structure.hpp"

using namespace scott;

namespace {

const char* kG =
    "vocab R/2\n"
    "class a mult omega\nclass b mult omega\n"
    "elem a0 class a\nelem a1 class a\n"
    "elem b0 class b\nelem b1 class b\n"
    "fact R b0 b1\nfact R b1 b0\n";

// Independent count of abstract width-n tuples: distribute the n slots
// over the classes and multiply multinomial coefficients, capping each
// class at its multiplicity.
unsigned long long tuple_count_oracle(const MultiplicityStructure& s, int n) {
  // ways[r] = number of tuples using r slots among the classes seen so far,
  // counted as subsets of slot positions; process classes left to right.
  std::vector<unsigned long long> binom(static_cast<std::size_t>(n) + 1);
  auto choose = [&](int a, int b) -> unsigned long long {
    if (b < 0 || b > a) return 0;
    unsigned long long r = 1;
    for (int i = 0; i < b; ++i) r = r * static_cast<unsigned long long>(a - i) /
                                     static_cast<unsigned long long>(i + 1);
    return r;
  };
  std::vector<unsigned long long> ways(static_cast<std::size_t>(n) + 1, 0);
  ways[0] = 1;
  for (int c = 0; c < s.class_count(); ++c) {
    std::vector<unsigned long long> next(static_cast<std::size_t>(n) + 1, 0);
    long long cap = s.class_mult[static_cast<std::size_t>(c)].omega
                        ? n
                        : s.class_mult[static_cast<std::size_t>(c)].value;
    for (int used = 0; used <= n; ++used) {
      if (!ways[static_cast<std::size_t>(used)]) continue;
      for (int k = 0; k <= cap && used + k <= n; ++k)
        next[static_cast<std::size_t>(used + k)] +=
            ways[static_cast<std::size_t>(used)] * choose(used + k, k);
    }
    ways = std::move(next);
  }
  (void)binom;
  return ways[static_cast<std::size_t>(n)];
}

}  // namespace

TEST_CASE("structure files round-trip through their canonical form") {
  MultiplicityStructure g = load_structure(kG);
  std::string canon = serialize_structure(g);
  MultiplicityStructure again = load_structure(canon);
  CHECK(serialize_structure(again) == canon);
  CHECK(again.class_names == g.class_names);
  CHECK(again.element_names == g.element_names);
  CHECK(again.facts == g.facts);

  for (const corpus::Entry& e : corpus::all()) {
    std::string c = serialize_structure(e.ms);
    CHECK(serialize_structure(load_structure(c)) == c);
  }
}

TEST_CASE("the loader rejects malformed input") {
  CHECK_THROWS_AS(load_structure("vocab R/2\nclass a mult 0\n"), Error);
  CHECK_THROWS_AS(load_structure("vocab R/2\nfact R x y\n"), Error);
  CHECK_THROWS_AS(load_structure("vocab R/2\nclass a mult 1\nclass a mult 1\n"), Error);
  CHECK_THROWS_AS(load_structure("nonsense\n"), Error);
  // an omega class over a binary vocabulary needs two representatives
  CHECK_THROWS_AS(load_structure("vocab R/2\nclass a mult omega\nelem a0 class a\n"), Error);
  // twin uniformity: the swap (b0 b1) must be an automorphism
  CHECK_THROWS_AS(load_structure("vocab R/2\n"
                                 "class b mult omega\n"
                                 "elem b0 class b\nelem b1 class b\n"
                                 "fact R b0 b1\n"),
                  Error);
}

TEST_CASE("twin uniformity reports the violating swap") {
  MultiplicityStructure g = load_structure(kG);
  CHECK(validate_twin_uniformity(g).ok());
  MultiplicityStructure broken = g;
  broken.facts[static_cast<std::size_t>(*broken.vocab.find("R"))].erase({2, 3});
  TwinReport rep = validate_twin_uniformity(broken);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations.front().describe(broken).find("b") != std::string::npos);
}

TEST_CASE("tuple enumeration matches the closed-form count and the oracle") {
  MultiplicityStructure g = load_structure(kG);
  for (int n = 0; n <= 4; ++n) {
    CHECK(enumerate_tuples(g, n).size() == count_tuples(g, n));
    CHECK(count_tuples(g, n) == tuple_count_oracle(g, n));
  }
  // a finite class caps its slot count
  MultiplicityStructure m = load_structure(
      "vocab R/2\n"
      "class a mult omega\nclass c mult 1\n"
      "elem a0 class a\nelem a1 class a\nelem c0 class c\n"
      "fact R c0 c0\n");
  CHECK(count_tuples(m, 2) == 3);  // (a,a) (a,c) (c,a)
  CHECK(enumerate_tuples(m, 2).size() == 3);
  for (const corpus::Entry* e : corpus::small(3)) {
    for (int n = 0; n <= 3; ++n)
      CHECK(count_tuples(e->ms, n) == tuple_count_oracle(e->ms, n));
  }
}

TEST_CASE("atomic diagrams read facts off class representatives") {
  MultiplicityStructure g = load_structure(kG);
  int a = g.find_class("a"), b = g.find_class("b");
  int r = *g.vocab.find("R");

  // two fresh b copies are R-related both ways and loop-free
  AtomicDiagram bb = atomic_diagram(g, {b, b});
  CHECK(bb.sign(g.vocab.instance_index(2, r, {0, 1})));
  CHECK(bb.sign(g.vocab.instance_index(2, r, {1, 0})));
  CHECK_FALSE(bb.sign(g.vocab.instance_index(2, r, {0, 0})));
  CHECK_FALSE(bb.sign(g.vocab.instance_index(2, r, {1, 1})));

  AtomicDiagram ab = atomic_diagram(g, {a, b});
  for (long long i = 0; i < g.vocab.instance_count(2); ++i) {
    auto [sym, args] = g.vocab.instance_at(2, i);
    if (g.vocab.symbol(sym).name == "R") CHECK_FALSE(ab.sign(i));
  }

  // mixed same-class pair: both orders give the same diagram by uniformity
  CHECK(atomic_diagram(g, {a, a}) == atomic_diagram(g, {a, a}));
}

TEST_CASE("blow-up expansion truncates omega classes only") {
  MultiplicityStructure g = load_structure(kG);
  ConcreteStructure c3 = expand_truncated(g, 3);
  CHECK(c3.size == 6);
  MultiplicityStructure m = load_structure(
      "vocab R/2\n"
      "class a mult omega\nclass c mult 1\n"
      "elem a0 class a\nelem a1 class a\nelem c0 class c\n"
      "fact R c0 c0\n");
  ConcreteStructure c = expand_truncated(m, 4);
  CHECK(c.size == 5);  // four a copies, one c

  // a finite structure expands exactly
  MultiplicityStructure fin = corpus::small(3).front()->ms;
  CHECK(expand(fin).size == fin.domain_size());
}

TEST_CASE("expansion truncation is invisible to bounded games") {
  MultiplicityStructure g = load_structure(kG);
  // two b copies look the same whether the ambient model has 3 or 5 copies
  ConcreteStructure cut3 = expand_truncated(g, 3);
  ConcreteStructure cut5 = expand_truncated(g, 5);
  // b copies sit after the a copies in expansion order
  EfOracle oracle(cut3, cut5);
  CHECK(oracle.equivalent({3, 4}, {5, 6}, 1));
}
