#include "scott/vocabulary.hpp"

#include <algorithm>

namespace scott {

void Vocabulary::add(const std::string& name, int arity) {
  if (name.empty()) throw Error("vocabulary: empty symbol name");
  if (arity < 0) throw Error("vocabulary: negative arity for " + name);
  if (find(name)) throw Error("vocabulary: duplicate symbol " + name);
  Symbol s{name, arity};
  auto it = std::lower_bound(symbols_.begin(), symbols_.end(), s,
                             [](const Symbol& a, const Symbol& b) { return a.name < b.name; });
  symbols_.insert(it, std::move(s));
}

bool Vocabulary::ensure_zero_ary() {
  if (has_zero_ary()) return false;
  add(kUnitName, 0);
  return true;
}

std::optional<int> Vocabulary::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (symbols_[i].name == name) return i;
  return std::nullopt;
}

int Vocabulary::max_arity() const {
  int m = 0;
  for (const auto& s : symbols_) m = std::max(m, s.arity);
  return m;
}

bool Vocabulary::has_zero_ary() const {
  for (const auto& s : symbols_)
    if (s.arity == 0) return true;
  return false;
}

namespace {
// width^exp without overflow surprises at the widths we ever see.
long long ipow(long long base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}
}  // namespace

long long Vocabulary::instance_count(int width) const {
  if (width < 0) throw Error("instance_count: negative width");
  long long total = 0;
  for (const auto& s : symbols_) total += ipow(width, s.arity);
  return total;
}

long long Vocabulary::instance_index(int width, int sym, const std::vector<int>& args) const {
  const Symbol& s = symbols_.at(sym);
  if (static_cast<int>(args.size()) != s.arity)
    throw Error("instance_index: arity mismatch for " + s.name);
  long long offset = 0;
  for (int i = 0; i < sym; ++i) offset += ipow(width, symbols_[i].arity);
  long long local = 0;
  for (int a : args) {
    if (a < 0 || a >= width) throw Error("instance_index: argument out of width");
    local = local * width + a;
  }
  return offset + local;
}

std::pair<int, std::vector<int>> Vocabulary::instance_at(int width, long long index) const {
  for (int sym = 0; sym < size(); ++sym) {
    long long block = ipow(width, symbols_[sym].arity);
    if (index < block) {
      std::vector<int> args(symbols_[sym].arity);
      for (int i = symbols_[sym].arity - 1; i >= 0; --i) {
        args[i] = static_cast<int>(index % width);
        index /= width;
      }
      return {sym, args};
    }
    index -= block;
  }
  throw Error("instance_at: index out of range");
}

unsigned long long count_atomic_types(const Vocabulary& vocab, int width) {
  long long instances = vocab.instance_count(width);
  if (instances >= 64)
    throw Error("count_atomic_types: 2^" + std::to_string(instances) +
                " overflows 64 bits at width " + std::to_string(width));
  return 1ULL << instances;
}

}  // namespace scott
