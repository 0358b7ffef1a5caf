#pragma once

#include <string>

#include "scott/process.hpp"

namespace scott {

// Canonical text dump of a process. Formulas are written rows-ascending,
// widths-ascending, each cell sorted by the session-independent structural
// comparison, and referenced by emission ordinal. Two stores holding the
// same process under different interning orders therefore produce
// byte-identical dumps.
std::string encode_process(const ScottProcess& p);

// The signature declared by a dump, for constructing a matching store.
Vocabulary dump_vocabulary(const std::string& text);

// Rebuilds a process from a dump, interning every formula into `store`.
// The store's vocabulary must equal the dump's. Tuple bookkeeping is not
// part of the format: the result is symbolic.
ScottProcess decode_process(FormulaStore& store, const std::string& text);

}  // namespace scott
