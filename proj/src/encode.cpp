#include "scott/encode.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "scott/formula_store.hpp"

namespace scott {

namespace {

constexpr const char* kMagic = "scottdump";
constexpr int kVersion = 1;

}  // namespace

std::string encode_process(const ScottProcess& p) {
  if (!p.store) throw Error("encode_process: process has no formula store");
  FormulaStore& store = *p.store;
  const Vocabulary& vocab = store.vocab();
  std::ostringstream os;
  os << kMagic << " " << kVersion << "\n";
  for (const auto& sym : vocab.symbols()) os << "vocab " << sym.name << "/" << sym.arity << "\n";
  os << "budget " << p.budget << "\n";
  if (p.truncated_width) os << "truncated " << *p.truncated_width << "\n";
  if (p.stabilized)
    os << "stabilized " << p.stabilized->level << " " << p.stabilized->width << "\n";
  os << "exhausted " << (p.budget_exhausted ? 1 : 0) << "\n";
  os << "rows " << p.rows.size() << " " << p.limit_rows.size() << "\n";

  std::unordered_map<FormulaId, long long> index;
  auto ref = [&index](FormulaId f) {
    auto it = index.find(f);
    if (it == index.end())
      throw Error("encode_process: formula #" + std::to_string(f) +
                  " is referenced but not recorded at any earlier cell");
    return it->second;
  };
  long long counter = 0;
  for (LevelIndex li : p.level_indices()) {
    os << "level " << li.str() << "\n";
    const Level& row = p.row(li);
    for (int n = 0; n <= row.max_width(); ++n) {
      os << "width " << n << "\n";
      std::vector<FormulaId> cell = row.at(n);
      std::sort(cell.begin(), cell.end(),
                [&store](FormulaId a, FormulaId b) { return store.compare(a, b) < 0; });
      for (FormulaId f : cell) {
        const FormulaNode& node = store.node(f);
        switch (node.kind) {
          case NodeKind::Level0:
            os << "l0 " << node.diagram.hex(vocab) << "\n";
            break;
          case NodeKind::Successor: {
            os << "sc " << ref(node.parent);
            std::vector<long long> kids;
            kids.reserve(node.children.size());
            for (FormulaId c : node.children) kids.push_back(ref(c));
            std::sort(kids.begin(), kids.end());
            for (long long k : kids) os << " " << k;
            os << "\n";
            break;
          }
          case NodeKind::LimitPath: {
            os << "lp";
            for (FormulaId e : node.entries) os << " " << ref(e);
            os << "\n";
            break;
          }
        }
        index[f] = counter++;
      }
    }
  }
  return os.str();
}

Vocabulary dump_vocabulary(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Vocabulary v;
  bool saw_magic = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (!saw_magic) {
      int ver = 0;
      ls >> ver;
      if (tok != kMagic || ver != kVersion)
        throw Error("dump line 1: expected '" + std::string(kMagic) + " " +
                    std::to_string(kVersion) + "'");
      saw_magic = true;
      continue;
    }
    if (tok != "vocab") break;  // vocab lines come first
    std::string decl;
    ls >> decl;
    auto slash = decl.rfind('/');
    if (slash == std::string::npos)
      throw Error("dump line " + std::to_string(lineno) + ": bad vocab declaration");
    v.add(decl.substr(0, slash), std::stoi(decl.substr(slash + 1)));
  }
  if (!saw_magic) throw Error("dump: empty input");
  return v;
}

ScottProcess decode_process(FormulaStore& store, const std::string& text) {
  Vocabulary v = dump_vocabulary(text);
  if (!(v == store.vocab()))
    throw Error("decode_process: the store's vocabulary differs from the dump's");

  ScottProcess p;
  p.store = &store;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  long long want_finite = -1, want_limit = -1;
  std::vector<FormulaId> by_index;
  Level* cur = nullptr;
  int cur_width = -1;
  bool saw_magic = false;

  auto fail = [&lineno](const std::string& what) {
    return Error("dump line " + std::to_string(lineno) + ": " + what);
  };
  auto at_index = [&](long long i) {
    if (i < 0 || i >= static_cast<long long>(by_index.size()))
      throw fail("reference " + std::to_string(i) + " out of range");
    return by_index[static_cast<std::size_t>(i)];
  };
  auto record = [&](FormulaId f) {
    if (!cur || cur_width < 0) throw fail("formula outside a level/width cell");
    by_index.push_back(f);
    cur->insert(cur_width, f);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (!saw_magic) {
      saw_magic = true;  // validated by dump_vocabulary
      continue;
    }
    if (tok == "vocab") {
      continue;
    } else if (tok == "budget") {
      if (!(ls >> p.budget)) throw fail("bad budget");
    } else if (tok == "truncated") {
      long long t = 0;
      if (!(ls >> t)) throw fail("bad truncation width");
      p.truncated_width = t;
    } else if (tok == "stabilized") {
      Stabilization st;
      if (!(ls >> st.level >> st.width)) throw fail("bad stabilization certificate");
      p.stabilized = st;
    } else if (tok == "exhausted") {
      int e = 0;
      if (!(ls >> e)) throw fail("bad exhausted flag");
      p.budget_exhausted = e != 0;
    } else if (tok == "rows") {
      if (!(ls >> want_finite >> want_limit)) throw fail("bad row counts");
    } else if (tok == "level") {
      std::string which;
      if (!(ls >> which)) throw fail("bad level header");
      LevelIndex li = LevelIndex::parse(which);
      if (li.is_finite()) {
        if (!p.limit_rows.empty() || static_cast<long long>(p.rows.size()) != li.k)
          throw fail("levels out of order");
        p.rows.emplace_back();
        cur = &p.rows.back();
      } else {
        if (static_cast<long long>(p.limit_rows.size()) != li.k) throw fail("levels out of order");
        p.limit_rows.emplace_back();
        cur = &p.limit_rows.back();
      }
      cur_width = -1;
    } else if (tok == "width") {
      if (!cur) throw fail("width before any level");
      if (!(ls >> cur_width)) throw fail("bad width header");
      if (cur_width != cur->max_width() + 1) throw fail("widths out of order");
      cur->by_width.emplace_back();
    } else if (tok == "l0") {
      std::string hex;
      if (!(ls >> hex)) throw fail("bad diagram");
      record(store.intern_level0(AtomicDiagram::from_hex(v, cur_width, hex)));
    } else if (tok == "sc") {
      long long parent = -1;
      if (!(ls >> parent)) throw fail("extension node without a parent");
      std::vector<FormulaId> kids;
      long long x = 0;
      while (ls >> x) kids.push_back(at_index(x));
      record(store.intern_successor(at_index(parent), std::move(kids)));
    } else if (tok == "lp") {
      std::vector<FormulaId> entries;
      long long x = 0;
      while (ls >> x) entries.push_back(at_index(x));
      record(store.intern_limit(std::move(entries)));
    } else {
      throw fail("unknown directive '" + tok + "'");
    }
  }
  if (want_finite >= 0 && (want_finite != static_cast<long long>(p.rows.size()) ||
                           want_limit != static_cast<long long>(p.limit_rows.size())))
    throw Error("dump: declared row counts do not match the body");
  return p;
}

}  // namespace scott
