#include "scott/structure.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace scott {

std::vector<int> MultiplicityStructure::elements_of_class(int c) const {
  std::vector<int> out;
  for (int e = 0; e < template_size(); ++e)
    if (element_class[static_cast<size_t>(e)] == c) out.push_back(e);
  return out;
}

bool MultiplicityStructure::holds(int sym, const std::vector<int>& elems) const {
  return facts.at(static_cast<size_t>(sym)).count(elems) > 0;
}

bool MultiplicityStructure::is_finite() const {
  for (const auto& m : class_mult)
    if (m.omega) return false;
  return true;
}

long long MultiplicityStructure::domain_size() const {
  if (!is_finite()) throw Error("domain_size: structure has an omega class");
  long long n = 0;
  for (const auto& m : class_mult) n += m.value;
  return n;
}

long long MultiplicityStructure::required_representatives(int c) const {
  long long cap = std::max<long long>(2, vocab.max_arity());
  const Multiplicity& m = class_mult.at(static_cast<size_t>(c));
  if (m.omega) return cap;
  return std::min(m.value, cap);
}

int MultiplicityStructure::find_class(const std::string& name) const {
  auto it = std::lower_bound(class_names.begin(), class_names.end(), name);
  if (it == class_names.end() || *it != name) return -1;
  return static_cast<int>(it - class_names.begin());
}

int MultiplicityStructure::find_element(const std::string& name) const {
  auto it = std::lower_bound(element_names.begin(), element_names.end(), name);
  if (it == element_names.end() || *it != name) return -1;
  return static_cast<int>(it - element_names.begin());
}

std::string TwinViolation::describe(const MultiplicityStructure& s) const {
  std::ostringstream os;
  os << "swapping " << s.element_names[static_cast<size_t>(elem_a)] << " and "
     << s.element_names[static_cast<size_t>(elem_b)] << " in class "
     << s.class_names[static_cast<size_t>(class_index)] << " breaks "
     << s.vocab.symbol(sym).name << "(";
  for (size_t i = 0; i < fact.size(); ++i) {
    if (i) os << ",";
    os << s.element_names[static_cast<size_t>(fact[i])];
  }
  os << ")";
  return os.str();
}

namespace {

struct RawLine {
  int number;
  std::vector<std::string> tokens;
};

std::vector<RawLine> tokenize(const std::string& text) {
  std::vector<RawLine> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string t;
    while (ls >> t) toks.push_back(t);
    if (toks.empty() || toks[0][0] == '#') continue;
    out.push_back({number, std::move(toks)});
  }
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error("structure file line " + std::to_string(line) + ": " + msg);
}

}  // namespace

MultiplicityStructure load_structure(const std::string& text) {
  auto lines = tokenize(text);

  std::vector<std::pair<std::string, int>> syms;
  std::map<std::string, std::pair<Multiplicity, int>> classes;  // name -> (mult, line)
  std::map<std::string, std::pair<std::string, int>> elems;     // name -> (class, line)
  std::vector<RawLine> fact_lines;

  for (const auto& l : lines) {
    const auto& t = l.tokens;
    if (t[0] == "vocab") {
      if (t.size() != 2) fail(l.number, "expected: vocab NAME/ARITY");
      auto slash = t[1].rfind('/');
      if (slash == std::string::npos) fail(l.number, "expected NAME/ARITY");
      std::string name = t[1].substr(0, slash);
      int arity;
      try {
        arity = std::stoi(t[1].substr(slash + 1));
      } catch (...) {
        fail(l.number, "bad arity");
      }
      if (arity < 0) fail(l.number, "negative arity");
      syms.emplace_back(name, arity);
    } else if (t[0] == "class") {
      if (t.size() != 4 || t[2] != "mult") fail(l.number, "expected: class ID mult (INT|omega)");
      if (classes.count(t[1])) fail(l.number, "duplicate class " + t[1]);
      Multiplicity m;
      if (t[3] == "omega") {
        m = Multiplicity::infinite();
      } else {
        long long v;
        try {
          v = std::stoll(t[3]);
        } catch (...) {
          fail(l.number, "bad multiplicity");
        }
        if (v < 1) fail(l.number, "multiplicity must be at least 1");
        m = Multiplicity::finite(v);
      }
      classes[t[1]] = {m, l.number};
    } else if (t[0] == "elem") {
      if (t.size() != 4 || t[2] != "class") fail(l.number, "expected: elem ID class CLASSID");
      if (elems.count(t[1])) fail(l.number, "duplicate element " + t[1]);
      elems[t[1]] = {t[3], l.number};
    } else if (t[0] == "fact") {
      if (t.size() < 2) fail(l.number, "expected: fact NAME ELEM...");
      fact_lines.push_back(l);
    } else {
      fail(l.number, "unknown directive " + t[0]);
    }
  }

  MultiplicityStructure s;
  for (const auto& [name, arity] : syms) {
    try {
      s.vocab.add(name, arity);
    } catch (const Error& e) {
      throw Error(std::string("structure file: ") + e.what());
    }
  }
  bool injected_unit = s.vocab.ensure_zero_ary();
  s.facts.assign(static_cast<size_t>(s.vocab.size()), {});
  if (injected_unit) {
    int u = *s.vocab.find(Vocabulary::kUnitName);
    s.facts[static_cast<size_t>(u)].insert(std::vector<int>{});
  }

  for (const auto& [name, info] : classes) {
    s.class_names.push_back(name);  // std::map iterates sorted
    s.class_mult.push_back(info.first);
  }
  for (const auto& [name, info] : elems) {
    int c = s.find_class(info.first);
    if (c < 0) fail(info.second, "unknown class " + info.first);
    s.element_names.push_back(name);
    s.element_class.push_back(c);
  }

  for (const auto& l : fact_lines) {
    auto symIdx = s.vocab.find(l.tokens[1]);
    if (!symIdx) fail(l.number, "unknown symbol " + l.tokens[1]);
    const auto& sym = s.vocab.symbol(*symIdx);
    if (static_cast<int>(l.tokens.size()) - 2 != sym.arity)
      fail(l.number, "arity mismatch for " + sym.name + ": expected " +
                         std::to_string(sym.arity) + " arguments");
    std::vector<int> tuple;
    for (size_t i = 2; i < l.tokens.size(); ++i) {
      int e = s.find_element(l.tokens[i]);
      if (e < 0) fail(l.number, "unknown element " + l.tokens[i]);
      tuple.push_back(e);
    }
    s.facts[static_cast<size_t>(*symIdx)].insert(std::move(tuple));
  }

  // Representative-count invariant: each class carries exactly as many
  // template elements as any single atomic instance can consume.
  for (int c = 0; c < s.class_count(); ++c) {
    long long have = static_cast<long long>(s.elements_of_class(c).size());
    long long need = s.required_representatives(c);
    if (have != need)
      throw Error("structure file: class " + s.class_names[static_cast<size_t>(c)] + " has " +
                  std::to_string(have) + " template elements, needs exactly " +
                  std::to_string(need));
  }

  TwinReport twins = validate_twin_uniformity(s);
  if (!twins.ok())
    throw Error("structure file: twin uniformity fails: " +
                twins.violations.front().describe(s));
  return s;
}

std::string serialize_structure(const MultiplicityStructure& s) {
  std::vector<std::string> lines;
  for (const auto& sym : s.vocab.symbols())
    lines.push_back("vocab " + sym.name + "/" + std::to_string(sym.arity));
  for (int c = 0; c < s.class_count(); ++c)
    lines.push_back("class " + s.class_names[static_cast<size_t>(c)] + " mult " +
                    s.class_mult[static_cast<size_t>(c)].str());
  for (int e = 0; e < s.template_size(); ++e)
    lines.push_back("elem " + s.element_names[static_cast<size_t>(e)] + " class " +
                    s.class_names[static_cast<size_t>(s.element_class[static_cast<size_t>(e)])]);
  for (int sym = 0; sym < s.vocab.size(); ++sym) {
    for (const auto& tuple : s.facts[static_cast<size_t>(sym)]) {
      std::string line = "fact " + s.vocab.symbol(sym).name;
      for (int e : tuple) line += " " + s.element_names[static_cast<size_t>(e)];
      lines.push_back(line);
    }
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += "\n";
  }
  return out;
}

TwinReport validate_twin_uniformity(const MultiplicityStructure& s) {
  TwinReport report;
  for (int c = 0; c < s.class_count(); ++c) {
    auto members = s.elements_of_class(c);
    for (size_t a = 0; a < members.size(); ++a) {
      for (size_t b = a + 1; b < members.size(); ++b) {
        // Transpositions generate all within-class permutations.
        auto swap_elem = [&](int e) {
          if (e == members[a]) return members[b];
          if (e == members[b]) return members[a];
          return e;
        };
        for (int sym = 0; sym < s.vocab.size(); ++sym) {
          for (const auto& fact : s.facts[static_cast<size_t>(sym)]) {
            std::vector<int> image;
            image.reserve(fact.size());
            for (int e : fact) image.push_back(swap_elem(e));
            if (!s.holds(sym, image)) {
              report.violations.push_back(
                  {c, members[a], members[b], sym, fact});
            }
          }
        }
      }
    }
  }
  return report;
}

std::vector<AbstractTuple> enumerate_tuples(const MultiplicityStructure& s, int n) {
  if (n < 0) throw Error("enumerate_tuples: negative width");
  std::vector<long long> remaining(static_cast<size_t>(s.class_count()));
  for (int c = 0; c < s.class_count(); ++c)
    remaining[static_cast<size_t>(c)] =
        s.class_mult[static_cast<size_t>(c)].omega ? -1 : s.class_mult[static_cast<size_t>(c)].value;
  std::vector<AbstractTuple> out;
  AbstractTuple cur;
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == n) {
      out.push_back(cur);
      return;
    }
    for (int c = 0; c < s.class_count(); ++c) {
      auto& r = remaining[static_cast<size_t>(c)];
      if (r == 0) continue;
      if (r > 0) --r;
      cur.push_back(c);
      self(self);
      cur.pop_back();
      if (r >= 0) ++r;
    }
  };
  rec(rec);
  return out;
}

unsigned long long count_tuples(const MultiplicityStructure& s, int n) {
  // Ways to place class occurrences into n ordered, distinct positions:
  // per class choose which positions it fills.
  std::vector<std::vector<unsigned __int128>> binom(static_cast<size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    binom[static_cast<size_t>(i)].assign(static_cast<size_t>(n + 1), 0);
    binom[static_cast<size_t>(i)][0] = 1;
    for (int j = 1; j <= i; ++j)
      binom[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          binom[static_cast<size_t>(i - 1)][static_cast<size_t>(j - 1)] +
          binom[static_cast<size_t>(i - 1)][static_cast<size_t>(j)];
  }
  std::vector<unsigned __int128> ways(static_cast<size_t>(n + 1), 0);
  ways[0] = 1;
  for (int c = 0; c < s.class_count(); ++c) {
    const auto& m = s.class_mult[static_cast<size_t>(c)];
    std::vector<unsigned __int128> next(static_cast<size_t>(n + 1), 0);
    for (int used = 0; used <= n; ++used) {
      if (ways[static_cast<size_t>(used)] == 0) continue;
      long long cap = m.omega ? n - used : std::min<long long>(m.value, n - used);
      for (long long k = 0; k <= cap; ++k)
        next[static_cast<size_t>(used + k)] +=
            ways[static_cast<size_t>(used)] *
            binom[static_cast<size_t>(n - used)][static_cast<size_t>(k)];
    }
    ways = std::move(next);
  }
  // Positions are ordered already (we chose position sets per class), so the
  // accumulated value counts sequences, not multisets.
  unsigned __int128 total = ways[static_cast<size_t>(n)];
  if (total > static_cast<unsigned __int128>(UINT64_MAX))
    throw Error("count_tuples: overflow");
  return static_cast<unsigned long long>(total);
}

namespace {

// Maps the positions used by one atomic instance to concrete template
// representatives. Positions sharing a class get distinct members of that
// class, in position order.
std::vector<int> assign_representatives(const MultiplicityStructure& s,
                                        const AbstractTuple& t,
                                        const std::vector<int>& positions) {
  std::vector<int> rep(t.size(), -1);
  std::vector<int> next_of_class(static_cast<size_t>(s.class_count()), 0);
  for (int p : positions) {
    if (rep[static_cast<size_t>(p)] >= 0) continue;
    int c = t[static_cast<size_t>(p)];
    auto members = s.elements_of_class(c);
    int& next = next_of_class[static_cast<size_t>(c)];
    if (next >= static_cast<int>(members.size()))
      throw Error("atomic_diagram: class " + s.class_names[static_cast<size_t>(c)] +
                  " lacks representatives (internal invariant)");
    rep[static_cast<size_t>(p)] = members[static_cast<size_t>(next)];
    ++next;
  }
  return rep;
}

}  // namespace

AtomicDiagram atomic_diagram(const MultiplicityStructure& s, const AbstractTuple& t) {
  int n = static_cast<int>(t.size());
  for (int c : t)
    if (c < 0 || c >= s.class_count()) throw Error("atomic_diagram: bad class index");
  AtomicDiagram d(s.vocab, n);
  for (int sym = 0; sym < s.vocab.size(); ++sym) {
    int arity = s.vocab.symbol(sym).arity;
    if (arity > 0 && n == 0) continue;  // no instances over the empty tuple
    std::vector<int> args(static_cast<size_t>(arity), 0);
    bool done = false;
    while (!done) {
      std::vector<int> positions(args.begin(), args.end());
      std::sort(positions.begin(), positions.end());
      positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
      auto rep = assign_representatives(s, t, positions);
      std::vector<int> elems;
      elems.reserve(args.size());
      for (int a : args) elems.push_back(rep[static_cast<size_t>(a)]);
      if (s.holds(sym, elems))
        d.set_sign(s.vocab.instance_index(n, sym, args), true);
      // advance args lexicographically
      done = true;
      for (int i = arity - 1; i >= 0; --i) {
        if (++args[static_cast<size_t>(i)] < n) {
          done = false;
          break;
        }
        args[static_cast<size_t>(i)] = 0;
      }
      if (arity == 0) break;
    }
  }
  return d;
}

bool ConcreteStructure::holds(int sym, const std::vector<int>& elems) const {
  return facts.at(static_cast<size_t>(sym)).count(elems) > 0;
}

ConcreteStructure expand_truncated(const MultiplicityStructure& s, long long copies) {
  ConcreteStructure c;
  c.vocab = s.vocab;
  std::vector<std::pair<int, long long>> origin;  // concrete -> (class, copy)
  for (int cl = 0; cl < s.class_count(); ++cl) {
    const auto& m = s.class_mult[static_cast<size_t>(cl)];
    long long count = m.omega ? copies : m.value;
    for (long long i = 0; i < count; ++i) {
      origin.emplace_back(cl, i);
      c.element_names.push_back(s.class_names[static_cast<size_t>(cl)] + "#" + std::to_string(i));
    }
  }
  c.size = static_cast<int>(origin.size());
  c.facts.assign(static_cast<size_t>(s.vocab.size()), {});

  for (int sym = 0; sym < s.vocab.size(); ++sym) {
    int arity = s.vocab.symbol(sym).arity;
    if (arity == 0) {
      if (s.holds(sym, {})) c.facts[static_cast<size_t>(sym)].insert(std::vector<int>{});
      continue;
    }
    std::vector<int> tuple(static_cast<size_t>(arity), 0);
    bool done = c.size == 0;
    while (!done) {
      // Map the distinct concrete elements to distinct template members of
      // their classes; twin uniformity makes the truth value independent of
      // which members are picked.
      std::vector<int> distinct(tuple.begin(), tuple.end());
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      std::vector<int> rep_of(static_cast<size_t>(c.size), -1);
      std::vector<int> used(static_cast<size_t>(s.class_count()), 0);
      bool ok = true;
      for (int e : distinct) {
        int cl = origin[static_cast<size_t>(e)].first;
        auto members = s.elements_of_class(cl);
        int& u = used[static_cast<size_t>(cl)];
        if (u >= static_cast<int>(members.size())) {
          ok = false;  // cannot happen: arity <= required representatives
          break;
        }
        rep_of[static_cast<size_t>(e)] = members[static_cast<size_t>(u)];
        ++u;
      }
      if (!ok) throw Error("expand_truncated: representative shortage (internal invariant)");
      std::vector<int> mapped;
      mapped.reserve(tuple.size());
      for (int e : tuple) mapped.push_back(rep_of[static_cast<size_t>(e)]);
      if (s.holds(sym, mapped)) c.facts[static_cast<size_t>(sym)].insert(tuple);
      done = true;
      for (int i = arity - 1; i >= 0; --i) {
        if (++tuple[static_cast<size_t>(i)] < c.size) {
          done = false;
          break;
        }
        tuple[static_cast<size_t>(i)] = 0;
      }
    }
  }
  return c;
}

ConcreteStructure expand(const MultiplicityStructure& s) {
  if (!s.is_finite()) throw Error("expand: structure has an omega class; use expand_truncated");
  return expand_truncated(s, 0);
}

MultiplicityStructure as_multiplicity_structure(const ConcreteStructure& c) {
  MultiplicityStructure s;
  s.vocab = c.vocab;
  // Zero-padded names keep lexicographic order equal to element order.
  int digits = 1;
  for (int v = c.size; v >= 10; v /= 10) ++digits;
  auto name = [&](int i) {
    std::string num = std::to_string(i);
    return "e" + std::string(static_cast<size_t>(digits) - num.size(), '0') + num;
  };
  for (int i = 0; i < c.size; ++i) {
    s.class_names.push_back(name(i));
    s.class_mult.push_back(Multiplicity::finite(1));
    s.element_names.push_back(name(i));
    s.element_class.push_back(i);
  }
  s.facts = c.facts;
  return s;
}

}  // namespace scott
