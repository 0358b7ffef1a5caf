#include "scott/diagram.hpp"

namespace scott {

AtomicDiagram::AtomicDiagram(const Vocabulary& vocab, int w) : width(w) {
  long long n = vocab.instance_count(w);
  bits.assign(static_cast<size_t>((n + 63) / 64), 0);
}

std::uint64_t AtomicDiagram::hash() const {
  std::uint64_t h = static_cast<std::uint64_t>(width) * 0x100000001b3ULL;
  for (std::uint64_t w : bits) h = hash_mix(h, w);
  return h;
}

std::string AtomicDiagram::hex(const Vocabulary& vocab) const {
  static const char* digits = "0123456789abcdef";
  long long n = vocab.instance_count(width);
  long long nibbles = (n + 3) / 4;
  std::string out;
  out.reserve(static_cast<size_t>(nibbles));
  for (long long i = 0; i < nibbles; ++i) {
    int v = 0;
    for (int b = 0; b < 4; ++b) {
      long long inst = i * 4 + b;
      if (inst < n && sign(inst)) v |= 1 << b;
    }
    out.push_back(digits[v]);
  }
  if (out.empty()) out = "-";  // width-0 over an empty signature cannot occur, but keep parseable
  return out;
}

AtomicDiagram AtomicDiagram::from_hex(const Vocabulary& vocab, int width, const std::string& hex) {
  AtomicDiagram d(vocab, width);
  long long n = vocab.instance_count(width);
  long long nibbles = (n + 3) / 4;
  if (hex == "-" && nibbles == 0) return d;
  if (static_cast<long long>(hex.size()) != nibbles)
    throw Error("diagram: bad hex length");
  for (long long i = 0; i < nibbles; ++i) {
    char c = hex[static_cast<size_t>(i)];
    int v;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'f')
      v = c - 'a' + 10;
    else
      throw Error("diagram: bad hex digit");
    for (int b = 0; b < 4; ++b) {
      long long inst = i * 4 + b;
      if (inst < n) d.set_sign(inst, (v >> b) & 1);
      else if ((v >> b) & 1)
        throw Error("diagram: hex sets bits past instance count");
    }
  }
  return d;
}

}  // namespace scott
