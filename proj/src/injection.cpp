#include "scott/injection.hpp"

#include <algorithm>

namespace scott {

Injection::Injection(int target, std::vector<int> imgs)
    : target_width(target), images(std::move(imgs)) {
  std::vector<bool> seen(static_cast<size_t>(target_width), false);
  for (int v : images) {
    if (v < 0 || v >= target_width) throw Error("injection: image out of range");
    if (seen[static_cast<size_t>(v)]) throw Error("injection: repeated image");
    seen[static_cast<size_t>(v)] = true;
  }
}

bool Injection::is_identity() const {
  if (target_width != source_width()) return false;
  for (int i = 0; i < source_width(); ++i)
    if (images[static_cast<size_t>(i)] != i) return false;
  return true;
}

Injection Injection::identity(int n) {
  std::vector<int> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  return Injection(n, std::move(v));
}

Injection Injection::compose(const Injection& inner) const {
  if (inner.target_width != source_width())
    throw Error("injection: compose width mismatch");
  std::vector<int> v;
  v.reserve(inner.images.size());
  for (int i : inner.images) v.push_back(images[static_cast<size_t>(i)]);
  return Injection(target_width, std::move(v));
}

Injection Injection::inverse() const {
  if (!is_permutation()) throw Error("injection: inverse of non-permutation");
  std::vector<int> v(images.size());
  for (int i = 0; i < source_width(); ++i)
    v[static_cast<size_t>(images[static_cast<size_t>(i)])] = i;
  return Injection(target_width, std::move(v));
}

Injection Injection::extended(int y) const {
  // j u {(x_m, y)} viewed into X_{n+1}; y may be x_n or any unused variable.
  std::vector<int> v = images;
  v.push_back(y);
  return Injection(target_width + 1, std::move(v));
}

std::vector<int> Injection::cotargets() const {
  std::vector<bool> hit(static_cast<size_t>(target_width), false);
  for (int v : images) hit[static_cast<size_t>(v)] = true;
  std::vector<int> out;
  for (int i = 0; i < target_width; ++i)
    if (!hit[static_cast<size_t>(i)]) out.push_back(i);
  return out;
}

std::uint64_t Injection::hash() const {
  std::uint64_t h = static_cast<std::uint64_t>(target_width);
  for (int v : images) h = hash_mix(h, static_cast<std::uint64_t>(v) + 1);
  return h;
}

std::string Injection::str() const {
  std::string s = "[";
  for (size_t i = 0; i < images.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(images[i]);
  }
  s += "]->" + std::to_string(target_width);
  return s;
}

Injection Injection::parse(const std::string& text) {
  auto arrow = text.find("->");
  if (arrow == std::string::npos) throw Error("injection: expected ->");
  int target = std::stoi(text.substr(arrow + 2));
  std::vector<int> imgs;
  std::string body = text.substr(0, arrow);
  size_t pos = 0;
  while (pos < body.size()) {
    size_t comma = body.find(',', pos);
    if (comma == std::string::npos) comma = body.size();
    std::string tok = body.substr(pos, comma - pos);
    if (!tok.empty()) imgs.push_back(std::stoi(tok));
    pos = comma + 1;
  }
  return Injection(target, std::move(imgs));
}

std::vector<Injection> all_injections(int m, int n) {
  std::vector<Injection> out;
  if (m > n) return out;
  std::vector<int> cur;
  std::vector<bool> used(static_cast<size_t>(n), false);
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == m) {
      out.emplace_back(n, cur);
      return;
    }
    for (int v = 0; v < n; ++v) {
      if (used[static_cast<size_t>(v)]) continue;
      used[static_cast<size_t>(v)] = true;
      cur.push_back(v);
      self(self);
      cur.pop_back();
      used[static_cast<size_t>(v)] = false;
    }
  };
  rec(rec);
  return out;
}

std::vector<Injection> all_permutations(int n) { return all_injections(n, n); }

}  // namespace scott
