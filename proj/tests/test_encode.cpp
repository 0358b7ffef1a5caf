#include <string>

#include "corpus.hpp"
#include "doctest.h"
#include "scott/analyze.hpp"
#include "scott/encode.hpp"
#include "scott/process_kit.hpp"

using namespace scott;

namespace {

std::string dump_of(const MultiplicityStructure& ms, const AnalyzeOptions& opts) {
  FormulaStore store(ms.vocab);
  ScottProcess p = analyze(store, ms, opts);
  return encode_process(p);
}

}  // namespace

TEST_CASE("dumps survive a decode and re-encode byte for byte") {
  for (const corpus::Entry* e : corpus::blowups()) {
    std::string dump = dump_of(e->ms, {.budget = 4});
    FormulaStore fresh(dump_vocabulary(dump));
    ScottProcess back = decode_process(fresh, dump);
    CHECK(encode_process(back) == dump);
  }
  for (const corpus::Entry* e : corpus::small(2)) {
    std::string dump = dump_of(e->ms, {.budget = 3});
    FormulaStore fresh(dump_vocabulary(dump));
    CHECK(encode_process(decode_process(fresh, dump)) == dump);
  }
}

TEST_CASE("dumps do not depend on the iteration schedule") {
  int seen = 0;
  for (const corpus::Entry& e : corpus::all()) {
    if (e.concrete && e.ms.domain_size() == 3 && seen++ % 32 != 0) continue;
    std::string fwd = dump_of(e.ms, {.budget = 4, .schedule = Schedule::Forward});
    std::string rev = dump_of(e.ms, {.budget = 4, .schedule = Schedule::Reversed});
    std::string shuf = dump_of(e.ms, {.budget = 4, .schedule = Schedule::Shuffled});
    std::string shuf2 =
        dump_of(e.ms, {.budget = 4, .schedule = Schedule::Shuffled, .shuffle_seed = 12345});
    CHECK_MESSAGE(fwd == rev, e.name);
    CHECK_MESSAGE(fwd == shuf, e.name);
    CHECK_MESSAGE(fwd == shuf2, e.name);
  }
}

TEST_CASE("limit rows are part of the format") {
  // A stabilized blow-up extended at the limit keeps its omega row
  // through the codec.
  const corpus::Entry* g = corpus::blowups()[0];
  FormulaStore store(g->ms.vocab);
  ScottProcess p = analyze_to_stabilization(store, g->ms);
  REQUIRE(p.stabilized.has_value());
  LevelIndex deepest = LevelIndex::finite(static_cast<std::uint32_t>(p.rows.size()) - 1);
  Path rho = path_of(p, unique_sentence(p, deepest));
  ScottProcess ext = extend_at_limit(p, rho);
  REQUIRE(ext.limit_rows.size() == 1);

  std::string dump = encode_process(ext);
  FormulaStore fresh(dump_vocabulary(dump));
  ScottProcess back = decode_process(fresh, dump);
  REQUIRE(back.limit_rows.size() == 1);
  CHECK(encode_process(back) == dump);
  for (int w = 0; w <= back.limit_rows[0].max_width(); ++w)
    CHECK(back.limit_rows[0].at(w).size() == ext.limit_rows[0].at(w).size());
}

TEST_CASE("decoded processes validate and rank like the originals") {
  for (const corpus::Entry* e : corpus::blowups()) {
    FormulaStore store(e->ms.vocab);
    ScottProcess p = analyze(store, e->ms, {.budget = 4});
    std::string dump = encode_process(p);

    FormulaStore fresh(dump_vocabulary(dump));
    ScottProcess back = decode_process(fresh, dump);

    ValidationReport a = validate_process(p);
    ValidationReport b = validate_process(back);
    REQUIRE(a.conditions.size() == b.conditions.size());
    for (std::size_t i = 0; i < a.conditions.size(); ++i) {
      CHECK(a.conditions[i].name == b.conditions[i].name);
      CHECK(a.conditions[i].verdict == b.conditions[i].verdict);
    }

    RankReport ra = scan_rank_evidence(p);
    RankReport rb = scan_rank_evidence(back);
    CHECK(ra.rank == rb.rank);
    CHECK(ra.certified_width == rb.certified_width);
  }
}

TEST_CASE("decoding rejects mangled dumps") {
  std::string dump = dump_of(corpus::blowups()[0]->ms, {.budget = 3});
  FormulaStore fresh(dump_vocabulary(dump));
  CHECK_THROWS_AS((void)decode_process(fresh, "scottdump banana\n"), Error);
  CHECK_THROWS_AS((void)decode_process(fresh, dump + "junk trailing line\n"), Error);
  // dropping the last row contradicts the declared row counts
  std::string truncated = dump.substr(0, dump.rfind("\nlevel ") + 1);
  CHECK_THROWS_AS((void)decode_process(fresh, truncated), Error);
}
