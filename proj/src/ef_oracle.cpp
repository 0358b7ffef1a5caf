#include "scott/ef_oracle.hpp"

#include <algorithm>
#include <map>

namespace scott {

namespace {

bool distinct(const std::vector<int>& t) {
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j)
      if (t[i] == t[j]) return false;
  return true;
}

bool contains(const std::vector<int>& t, int e) {
  return std::find(t.begin(), t.end(), e) != t.end();
}

}  // namespace

std::size_t EfOracle::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = static_cast<std::uint64_t>(k.alpha) + 1;
  for (int v : k.a) h = hash_mix(h, static_cast<std::uint64_t>(v) + 1);
  h = hash_mix(h, 0xabcd);
  for (int v : k.b) h = hash_mix(h, static_cast<std::uint64_t>(v) + 1);
  return static_cast<std::size_t>(h);
}

EfOracle::EfOracle(const ConcreteStructure& a, const ConcreteStructure& b) : a_(a), b_(b) {}

bool EfOracle::atomic_equal(const std::vector<int>& a, const std::vector<int>& b) const {
  int n = static_cast<int>(a.size());
  const Vocabulary& voc = a_.vocab;
  std::vector<int> args, ea, eb;
  for (int sym = 0; sym < voc.size(); ++sym) {
    int arity = voc.symbol(sym).arity;
    if (arity > 0 && n == 0) continue;  // no instances over the empty tuple
    args.assign(static_cast<std::size_t>(arity), 0);
    bool done = false;
    while (!done) {
      ea.clear();
      eb.clear();
      for (int p : args) {
        ea.push_back(a[static_cast<std::size_t>(p)]);
        eb.push_back(b[static_cast<std::size_t>(p)]);
      }
      if (a_.holds(sym, ea) != b_.holds(sym, eb)) return false;
      done = true;
      for (int i = arity - 1; i >= 0; --i) {
        if (++args[static_cast<std::size_t>(i)] < n) {
          done = false;
          break;
        }
        args[static_cast<std::size_t>(i)] = 0;
      }
    }
  }
  return true;
}

bool EfOracle::equivalent(const std::vector<int>& a, const std::vector<int>& b, int alpha) {
  if (a.size() != b.size()) throw Error("pointed tuples must have equal width");
  if (!distinct(a) || !distinct(b)) throw Error("tuples must consist of distinct elements");
  if (alpha < 0) throw Error("negative depth");

  Key key{a, b, alpha};
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;

  bool result;
  if (alpha == 0) {
    result = atomic_equal(a, b);
  } else {
    result = equivalent(a, b, alpha - 1);
    if (result) {
      std::vector<int> ax = a, by = b;
      ax.push_back(0);
      by.push_back(0);
      for (int x = 0; x < a_.size && result; ++x) {
        if (contains(a, x)) continue;
        ax.back() = x;
        bool found = false;
        for (int y = 0; y < b_.size && !found; ++y) {
          if (contains(b, y)) continue;
          by.back() = y;
          found = equivalent(ax, by, alpha - 1);
        }
        result = found;
      }
      for (int y = 0; y < b_.size && result; ++y) {
        if (contains(b, y)) continue;
        by.back() = y;
        bool found = false;
        for (int x = 0; x < a_.size && !found; ++x) {
          if (contains(a, x)) continue;
          ax.back() = x;
          found = equivalent(ax, by, alpha - 1);
        }
        result = found;
      }
    }
  }
  memo_.emplace(std::move(key), result);
  return result;
}

bool ef_equivalent(const ConcreteStructure& a, const std::vector<int>& at,
                   const ConcreteStructure& b, const std::vector<int>& bt, int alpha) {
  return EfOracle(a, b).equivalent(at, bt, alpha);
}

namespace {

// Concrete elements of expand_truncated are laid out as contiguous blocks,
// one per class, in class order.
std::vector<int> realize(const MultiplicityStructure& s, const AbstractTuple& t, long long copies) {
  std::vector<long long> start(static_cast<std::size_t>(s.class_count()) + 1, 0);
  for (int c = 0; c < s.class_count(); ++c) {
    const auto& m = s.class_mult[static_cast<std::size_t>(c)];
    start[static_cast<std::size_t>(c) + 1] =
        start[static_cast<std::size_t>(c)] + (m.omega ? copies : m.value);
  }
  std::vector<long long> used(static_cast<std::size_t>(s.class_count()), 0);
  std::vector<int> out;
  for (int c : t) {
    long long idx = start[static_cast<std::size_t>(c)] + used[static_cast<std::size_t>(c)]++;
    if (idx >= start[static_cast<std::size_t>(c) + 1])
      throw Error("tuple uses class " + s.class_names[static_cast<std::size_t>(c)] +
                  " beyond its multiplicity");
    out.push_back(static_cast<int>(idx));
  }
  return out;
}

struct VecHash {
  std::size_t operator()(const std::vector<int>& t) const {
    std::uint64_t h = t.size();
    for (int v : t) h = hash_mix(h, static_cast<std::uint64_t>(v) + 1);
    return static_cast<std::size_t>(h);
  }
};

// Signed atomic facts of an injective concrete tuple, bit-packed in
// instance order.
std::vector<std::uint64_t> concrete_bits(const ConcreteStructure& c, const std::vector<int>& t) {
  int n = static_cast<int>(t.size());
  long long total = c.vocab.instance_count(n);
  std::vector<std::uint64_t> bits(static_cast<std::size_t>((total + 63) / 64), 0);
  std::vector<int> mapped;
  for (long long i = 0; i < total; ++i) {
    auto [sym, args] = c.vocab.instance_at(n, i);
    mapped.clear();
    for (int p : args) mapped.push_back(t[static_cast<std::size_t>(p)]);
    if (c.holds(sym, mapped)) bits[static_cast<std::size_t>(i / 64)] |= 1ull << (i % 64);
  }
  return bits;
}

std::vector<std::vector<int>> injective_tuples(int size, int width) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == width) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e < size; ++e) {
      if (contains(cur, e)) continue;
      cur.push_back(e);
      self(self);
      cur.pop_back();
    }
  };
  rec(rec);
  return out;
}

}  // namespace

bool ef_equivalent(const MultiplicityStructure& a, const AbstractTuple& at,
                   const MultiplicityStructure& b, const AbstractTuple& bt, int alpha) {
  if (at.size() != bt.size()) throw Error("pointed tuples must have equal width");
  long long copies = static_cast<long long>(at.size()) + alpha;
  ConcreteStructure ca = expand_truncated(a, copies);
  ConcreteStructure cb = expand_truncated(b, copies);
  return EfOracle(ca, cb).equivalent(realize(a, at, copies), realize(b, bt, copies), alpha);
}

bool iso_check(const MultiplicityStructure& a, const MultiplicityStructure& b) {
  if (!a.is_finite() || !b.is_finite())
    throw Error("iso_check requires finite structures; compare blow-ups as processes");
  if (a.vocab.size() != b.vocab.size()) return false;
  for (int s = 0; s < a.vocab.size(); ++s)
    if (a.vocab.symbol(s).name != b.vocab.symbol(s).name ||
        a.vocab.symbol(s).arity != b.vocab.symbol(s).arity)
      return false;

  const ConcreteStructure sides[2] = {expand(a), expand(b)};
  if (sides[0].size != sides[1].size) return false;
  const int n = sides[0].size;

  std::vector<std::vector<std::vector<int>>> tuples(static_cast<std::size_t>(n) + 1);
  // tuple -> position in tuples[w], shared by both sides
  std::vector<std::unordered_map<std::vector<int>, int, VecHash>> pos(
      static_cast<std::size_t>(n) + 1);
  for (int w = 0; w <= n; ++w) {
    tuples[static_cast<std::size_t>(w)] = injective_tuples(n, w);
    for (std::size_t i = 0; i < tuples[static_cast<std::size_t>(w)].size(); ++i)
      pos[static_cast<std::size_t>(w)][tuples[static_cast<std::size_t>(w)][i]] =
          static_cast<int>(i);
  }

  // colour[side][w][i]: joint colour of the i-th width-w tuple
  std::vector<std::vector<int>> colour[2];
  std::vector<int> width_colours(static_cast<std::size_t>(n) + 1, 0);
  {
    std::map<std::pair<int, std::vector<std::uint64_t>>, int> dict;
    for (int side = 0; side < 2; ++side) {
      colour[side].resize(static_cast<std::size_t>(n) + 1);
      for (int w = 0; w <= n; ++w)
        for (const auto& t : tuples[static_cast<std::size_t>(w)]) {
          auto [it, fresh] =
              dict.emplace(std::make_pair(w, concrete_bits(sides[side], t)),
                           static_cast<int>(dict.size()));
          if (fresh) ++width_colours[static_cast<std::size_t>(w)];
          colour[side][static_cast<std::size_t>(w)].push_back(it->second);
        }
    }
  }

  for (;;) {
    std::map<std::pair<int, std::vector<int>>, int> dict;  // (own colour, extension colours)
    std::vector<std::vector<int>> next[2];
    std::vector<int> next_width_colours(static_cast<std::size_t>(n) + 1, 0);
    for (int side = 0; side < 2; ++side) {
      next[side].resize(static_cast<std::size_t>(n) + 1);
      for (int w = 0; w <= n; ++w)
        for (std::size_t i = 0; i < tuples[static_cast<std::size_t>(w)].size(); ++i) {
          const auto& t = tuples[static_cast<std::size_t>(w)][i];
          std::vector<int> ext;
          if (w < n) {
            std::vector<int> u = t;
            u.push_back(0);
            for (int e = 0; e < n; ++e) {
              if (contains(t, e)) continue;
              u.back() = e;
              int j = pos[static_cast<std::size_t>(w) + 1].at(u);
              ext.push_back(colour[side][static_cast<std::size_t>(w) + 1][static_cast<std::size_t>(j)]);
            }
            std::sort(ext.begin(), ext.end());
            ext.erase(std::unique(ext.begin(), ext.end()), ext.end());
          }
          int own = colour[side][static_cast<std::size_t>(w)][i];
          auto [it, fresh] =
              dict.emplace(std::make_pair(own, std::move(ext)), static_cast<int>(dict.size()));
          if (fresh) ++next_width_colours[static_cast<std::size_t>(w)];
          next[side][static_cast<std::size_t>(w)].push_back(it->second);
        }
    }
    bool moved = next_width_colours != width_colours;
    colour[0] = std::move(next[0]);
    colour[1] = std::move(next[1]);
    width_colours = std::move(next_width_colours);
    if (!moved) break;
  }

  return colour[0][0][0] == colour[1][0][0];
}

}  // namespace scott
