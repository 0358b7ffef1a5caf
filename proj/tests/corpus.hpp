#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scott/process.hpp"
#include "scott/structure.hpp"

namespace corpus {

struct Entry {
  std::string name;
  scott::MultiplicityStructure ms;
  std::optional<scott::ConcreteStructure> concrete;  // finite entries only
};

// Every structure on 1..3 elements over one binary relation (530), twenty
// random 4-5 element ones, and five twin-class blow-ups. Built once;
// deterministic for a fixed SCOTTKIT_SEED.
const std::vector<Entry>& all();

// Finite entries with at most max_size elements.
std::vector<const Entry*> small(int max_size);

// The five blow-ups.
std::vector<const Entry*> blowups();

// Lookup by the names used above; throws when absent.
const Entry& by_name(const std::string& name);

// A valid process edited into violating exactly the axiom we aim at
// (collateral violations are possible; the aimed-at one is guaranteed).
struct Mutation {
  std::string name;
  std::string condition;  // "1a".."2c"
  scott::ScottProcess process;
};

// The vocabulary the mutation bases share ({R/2} plus the implicit unit).
scott::Vocabulary mutation_vocab();

// Twelve deliberately broken processes covering every axiom. The store
// must carry mutation_vocab() and outlive the results.
std::vector<Mutation> mutations(scott::FormulaStore& store);

// Brute-force isomorphism by trying every bijection. Only for small sizes.
bool brute_iso(const scott::ConcreteStructure& a, const scott::ConcreteStructure& b);

// SCOTTKIT_SEED when set, a fixed default otherwise.
std::uint64_t seed();

}  // namespace corpus
