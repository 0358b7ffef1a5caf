#include "scott/formula_store.hpp"

#include <algorithm>

namespace scott {

FormulaStore::FormulaStore(Vocabulary vocab) : vocab_(std::move(vocab)) {
  if (!vocab_.has_zero_ary())
    throw Error("formula store: signature needs a 0-ary symbol");
}

const FormulaNode& FormulaStore::node(FormulaId id) const {
  std::lock_guard lk(mutex_);
  return node_unlocked(id);
}

const FormulaNode& FormulaStore::node_unlocked(FormulaId id) const {
  if (id >= nodes_.size()) throw Error("formula store: bad id");
  return nodes_[id];
}

std::size_t FormulaStore::size() const {
  std::lock_guard lk(mutex_);
  return nodes_.size();
}

FormulaId FormulaStore::intern_level0(const AtomicDiagram& d) {
  std::lock_guard lk(mutex_);
  return intern_level0_unlocked(d);
}

FormulaId FormulaStore::intern_level0_unlocked(const AtomicDiagram& d) {
  long long want = vocab_.instance_count(d.width);
  if (static_cast<long long>(d.bits.size()) != (want + 63) / 64)
    throw Error("intern_level0: diagram sized for a different signature or width");
  std::uint64_t h = d.hash();
  auto& bucket = level0_index_[h];
  for (FormulaId id : bucket)
    if (nodes_[id].diagram == d) return id;
  FormulaNode n;
  n.kind = NodeKind::Level0;
  n.width = d.width;
  n.level = LevelIndex::finite(0);
  n.diagram = d;
  nodes_.push_back(std::move(n));
  FormulaId id = static_cast<FormulaId>(nodes_.size() - 1);
  bucket.push_back(id);
  return id;
}

FormulaId FormulaStore::intern_successor(FormulaId parent, std::vector<FormulaId> children) {
  std::lock_guard lk(mutex_);
  return intern_successor_unlocked(parent, std::move(children));
}

FormulaId FormulaStore::intern_successor_unlocked(FormulaId parent,
                                                  std::vector<FormulaId> children) {
  const FormulaNode& p = node_unlocked(parent);
  if (p.level.after_limit && p.level.k == UINT32_MAX)
    throw Error("intern_successor: level overflow");
  std::sort(children.begin(), children.end());
  children.erase(std::unique(children.begin(), children.end()), children.end());
  for (FormulaId c : children) {
    const FormulaNode& cn = node_unlocked(c);
    if (cn.width != p.width + 1)
      throw Error("intern_successor: child width must be parent width + 1");
    if (!(cn.level == p.level))
      throw Error("intern_successor: children must sit at the parent's level");
  }
  std::uint64_t h = hash_mix(0x5343u, parent);
  for (FormulaId c : children) h = hash_mix(h, c);
  auto& bucket = successor_index_[h];
  for (FormulaId id : bucket) {
    const FormulaNode& n = nodes_[id];
    if (n.parent == parent && n.children == children) return id;
  }
  FormulaNode n;
  n.kind = NodeKind::Successor;
  n.width = p.width;
  n.level = p.level.next();
  n.parent = parent;
  n.children = std::move(children);
  nodes_.push_back(std::move(n));
  FormulaId id = static_cast<FormulaId>(nodes_.size() - 1);
  bucket.push_back(id);
  return id;
}

FormulaId FormulaStore::intern_limit(std::vector<FormulaId> entries) {
  std::lock_guard lk(mutex_);
  return intern_limit_unlocked(std::move(entries));
}

FormulaId FormulaStore::intern_limit_unlocked(std::vector<FormulaId> entries) {
  if (entries.empty()) throw Error("intern_limit: no entries");
  int w = node_unlocked(entries[0]).width;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const FormulaNode& e = node_unlocked(entries[i]);
    if (e.width != w) throw Error("intern_limit: entries of mixed width");
    if (!(e.level == LevelIndex::finite(static_cast<std::uint32_t>(i))))
      throw Error("intern_limit: entry " + std::to_string(i) + " not at level " +
                  std::to_string(i));
  }
  for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
    if (v_project_unlocked(entries[i + 1], LevelIndex::finite(static_cast<std::uint32_t>(i))) !=
        entries[i])
      throw Error("intern_limit: entries not coherent under vertical projection");
  }
  std::uint64_t h = 0x4c494dULL;
  for (FormulaId e : entries) h = hash_mix(h, e);
  auto& bucket = limit_index_[h];
  for (FormulaId id : bucket)
    if (nodes_[id].entries == entries) return id;
  FormulaNode n;
  n.kind = NodeKind::LimitPath;
  n.width = w;
  n.level = LevelIndex::omega();
  n.entries = std::move(entries);
  nodes_.push_back(std::move(n));
  FormulaId id = static_cast<FormulaId>(nodes_.size() - 1);
  bucket.push_back(id);
  return id;
}

std::vector<FormulaId> FormulaStore::e_set(FormulaId id) const {
  std::lock_guard lk(mutex_);
  const FormulaNode& n = node_unlocked(id);
  if (n.kind != NodeKind::Successor)
    throw Error("e_set: formula at level " + n.level.str() + " has no extension set");
  return n.children;
}

FormulaId FormulaStore::v_project(FormulaId id, LevelIndex target) {
  std::lock_guard lk(mutex_);
  return v_project_unlocked(id, target);
}

FormulaId FormulaStore::v_project_unlocked(FormulaId id, LevelIndex target) {
  const FormulaNode* n = &node_unlocked(id);
  if (target > n->level)
    throw Error("v_project: target level " + target.str() + " above formula level " +
                n->level.str());
  while (!(n->level == target)) {
    if (n->kind == NodeKind::Successor) {
      id = n->parent;
      n = &node_unlocked(id);
    } else if (n->kind == NodeKind::LimitPath) {
      // target is finite here (target < omega)
      if (target.k >= n->entries.size())
        throw Error("v_project: path does not record level " + target.str());
      id = n->entries[target.k];
      n = &node_unlocked(id);
    } else {
      throw Error("v_project: internal descent error");
    }
  }
  return id;
}

FormulaId FormulaStore::h_project(FormulaId id, const Injection& j) {
  std::lock_guard lk(mutex_);
  return h_project_unlocked(id, j);
}

FormulaId FormulaStore::h_project_unlocked(FormulaId id, const Injection& j) {
  const FormulaNode& n = node_unlocked(id);
  if (j.target_width != n.width)
    throw Error("h_project: injection targets width " + std::to_string(j.target_width) +
                ", formula has width " + std::to_string(n.width));
  if (j.is_identity()) return id;

  std::uint64_t h = hash_mix(hash_mix(0x48u, id), j.hash());
  auto& bucket = h_memo_[h];
  for (const auto& [key, value] : bucket)
    if (key.first == id && key.second == j) return value;

  FormulaId result = kNoFormula;
  int m = j.source_width();
  switch (n.kind) {
    case NodeKind::Level0: {
      AtomicDiagram d(vocab_, m);
      for (int sym = 0; sym < vocab_.size(); ++sym) {
        int arity = vocab_.symbol(sym).arity;
        if (arity > 0 && m == 0) continue;  // no instances over the empty tuple
        std::vector<int> args(static_cast<size_t>(arity), 0);
        while (true) {
          std::vector<int> mapped;
          mapped.reserve(args.size());
          for (int a : args) mapped.push_back(j.images[static_cast<size_t>(a)]);
          if (n.diagram.sign(vocab_.instance_index(n.width, sym, mapped)))
            d.set_sign(vocab_.instance_index(m, sym, args), true);
          bool done = true;
          for (int i = arity - 1; i >= 0; --i) {
            if (++args[static_cast<size_t>(i)] < m) {
              done = false;
              break;
            }
            args[static_cast<size_t>(i)] = 0;
          }
          if (done || arity == 0) break;
        }
      }
      result = intern_level0_unlocked(d);
      break;
    }
    case NodeKind::Successor: {
      FormulaId parent_image = h_project_unlocked(n.parent, j);
      std::vector<FormulaId> child_images;
      // The fresh variable x_m may land on any variable of X_{n+1} that j
      // does not hit, including x_n itself. Placements inside X_n factor
      // through the parent (one level down, along j with one more image);
      // routing them that way rather than through the children keeps the
      // projection truthful even when the extension set is empty, as at
      // the width cap of a finite structure. When children exist the two
      // routes agree.
      for (int y : j.cotargets()) {
        std::vector<int> imgs = j.images;
        imgs.push_back(y);
        child_images.push_back(
            h_project_unlocked(n.parent, Injection(n.width, std::move(imgs))));
      }
      for (FormulaId c : n.children)
        child_images.push_back(h_project_unlocked(c, j.extended(n.width)));
      result = intern_successor_unlocked(parent_image, std::move(child_images));
      break;
    }
    case NodeKind::LimitPath: {
      std::vector<FormulaId> entries;
      entries.reserve(n.entries.size());
      for (FormulaId e : n.entries) entries.push_back(h_project_unlocked(e, j));
      result = intern_limit_unlocked(std::move(entries));
      break;
    }
  }
  h_memo_[h].push_back({{id, j}, result});
  return result;
}

int FormulaStore::compare(FormulaId a, FormulaId b) {
  std::lock_guard lk(mutex_);
  return compare_unlocked(a, b);
}

int FormulaStore::compare_unlocked(FormulaId a, FormulaId b) {
  if (a == b) return 0;
  std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
  auto it = compare_memo_.find(key);
  if (it != compare_memo_.end()) return it->second;

  const FormulaNode& na = node_unlocked(a);
  const FormulaNode& nb = node_unlocked(b);
  int r = 0;
  if (na.level != nb.level) {
    r = na.level < nb.level ? -1 : 1;
  } else if (na.width != nb.width) {
    r = na.width < nb.width ? -1 : 1;
  } else if (na.kind != nb.kind) {
    r = static_cast<int>(na.kind) < static_cast<int>(nb.kind) ? -1 : 1;
  } else {
    switch (na.kind) {
      case NodeKind::Level0:
        r = na.diagram.bits < nb.diagram.bits ? -1 : 1;  // equal impossible: interned
        break;
      case NodeKind::Successor: {
        r = compare_unlocked(na.parent, nb.parent);
        if (r == 0) {
          auto ca = canonical_children_unlocked(a);
          auto cb = canonical_children_unlocked(b);
          for (std::size_t i = 0; r == 0 && i < ca.size() && i < cb.size(); ++i)
            r = compare_unlocked(ca[i], cb[i]);
          if (r == 0) r = ca.size() < cb.size() ? -1 : (ca.size() > cb.size() ? 1 : 0);
        }
        break;
      }
      case NodeKind::LimitPath: {
        for (std::size_t i = 0; r == 0 && i < na.entries.size() && i < nb.entries.size(); ++i)
          r = compare_unlocked(na.entries[i], nb.entries[i]);
        if (r == 0)
          r = na.entries.size() < nb.entries.size()
                  ? -1
                  : (na.entries.size() > nb.entries.size() ? 1 : 0);
        break;
      }
    }
  }
  if (r == 0) throw Error("compare: distinct ids with equal structure (interner broken)");
  compare_memo_[key] = r;
  compare_memo_[(static_cast<std::uint64_t>(b) << 32) | a] = -r;
  return r;
}

std::vector<FormulaId> FormulaStore::canonical_children(FormulaId id) {
  std::lock_guard lk(mutex_);
  return canonical_children_unlocked(id);
}

std::vector<FormulaId> FormulaStore::canonical_children_unlocked(FormulaId id) {
  auto it = canon_children_.find(id);
  if (it != canon_children_.end()) return it->second;
  std::vector<FormulaId> c = node_unlocked(id).children;
  std::sort(c.begin(), c.end(),
            [&](FormulaId x, FormulaId y) { return compare_unlocked(x, y) < 0; });
  canon_children_[id] = c;
  return c;
}

std::string FormulaStore::render(FormulaId id) {
  std::lock_guard lk(mutex_);
  return render_unlocked(id);
}

std::string FormulaStore::render_unlocked(FormulaId id) {
  const FormulaNode& n = node_unlocked(id);
  switch (n.kind) {
    case NodeKind::Level0: {
      std::string out;
      long long count = vocab_.instance_count(n.width);
      for (long long i = 0; i < count; ++i) {
        auto [sym, args] = vocab_.instance_at(n.width, i);
        if (!out.empty()) out += " ∧ ";
        if (!n.diagram.sign(i)) out += "¬";
        out += vocab_.symbol(sym).name;
        if (!args.empty()) {
          out += "(";
          for (std::size_t k = 0; k < args.size(); ++k) {
            if (k) out += ",";
            out += "x" + std::to_string(args[k]);
          }
          out += ")";
        }
      }
      for (int i = 0; i < n.width; ++i)
        for (int k = i + 1; k < n.width; ++k)
          out += " ∧ x" + std::to_string(i) + "≠x" + std::to_string(k);
      return out;
    }
    case NodeKind::Successor: {
      std::string xn = "x" + std::to_string(n.width);
      std::string out = render_unlocked(n.parent);
      auto kids = canonical_children_unlocked(id);
      for (FormulaId c : kids)
        out += " ∧ (∃" + xn + " " + render_unlocked(c) + ")";
      std::string guard;
      for (int i = 0; i < n.width; ++i) {
        if (!guard.empty()) guard += " ∧ ";
        guard += xn + "≠x" + std::to_string(i);
      }
      std::string body;
      for (FormulaId c : kids) {
        if (!body.empty()) body += " ∨ ";
        body += "(" + render_unlocked(c) + ")";
      }
      if (body.empty()) body = "⊥";
      out += " ∧ (∀" + xn + " ";
      if (guard.empty())
        out += body.size() > 2 ? "(" + body + ")" : body;
      else
        out += "(" + guard + " → " + body + ")";
      out += ")";
      return out;
    }
    case NodeKind::LimitPath: {
      // Paths are infinite conjunctions; show the deepest recorded stage.
      return "⋀α<ω[" + render_unlocked(n.entries.back()) + "]";
    }
  }
  throw Error("render: unreachable");
}

}  // namespace scott
