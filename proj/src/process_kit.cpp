#include "scott/process_kit.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace scott {

namespace {

Injection initial_segment(int m, int n) {
  std::vector<int> imgs(static_cast<std::size_t>(m));
  std::iota(imgs.begin(), imgs.end(), 0);
  return Injection(n, std::move(imgs));
}

// j with one more image y; the target width stays j.target_width.
Injection with_image(const Injection& j, int y) {
  std::vector<int> imgs = j.images;
  imgs.push_back(y);
  return Injection(j.target_width, std::move(imgs));
}

bool hits(const Injection& j, int y) {
  return std::find(j.images.begin(), j.images.end(), y) != j.images.end();
}

std::vector<FormulaId> canonical(FormulaStore& store, std::vector<FormulaId> ids) {
  std::sort(ids.begin(), ids.end(),
            [&store](FormulaId a, FormulaId b) { return store.compare(a, b) < 0; });
  return ids;
}

std::vector<FormulaId> as_set(std::vector<FormulaId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::string id_str(FormulaId f) { return "#" + std::to_string(f); }

std::uint64_t pack_pair(FormulaId a, FormulaId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Width-(w+1) formulas of `row` bucketed by their initial-segment
// projection to width w.
std::unordered_map<FormulaId, std::vector<FormulaId>> fiber_over(FormulaStore& store,
                                                                 const Level& row, int w) {
  std::unordered_map<FormulaId, std::vector<FormulaId>> out;
  if (!row.has_width(w + 1)) return out;
  Injection iw = initial_segment(w, w + 1);
  for (FormulaId up : row.at(w + 1)) out[store.h_project(up, iw)].push_back(up);
  return out;
}

class Validator {
 public:
  explicit Validator(const ScottProcess& p) : p_(p), store_(*p.store), lis_(p.level_indices()) {
    for (LevelIndex li : lis_)
      if (p_.row(li).total() > 0) nonempty_ = true;
  }

  ValidationReport run() {
    ValidationReport rep;
    rep.conditions.push_back(guard("1a", [this](ConditionReport& c) { check_1a(c); }));
    rep.conditions.push_back(guard("1b", [this](ConditionReport& c) { check_1b(c); }));
    rep.conditions.push_back(guard("1c", [this](ConditionReport& c) { check_1c(c); }));
    rep.conditions.push_back(guard("1d", [this](ConditionReport& c) { check_1d(c); }));
    rep.conditions.push_back(guard("1e", [this](ConditionReport& c) { check_1e(c); }));
    rep.conditions.push_back(guard("2a", [this](ConditionReport& c) { check_2a(c); }));
    rep.conditions.push_back(guard("2b", [this](ConditionReport& c) { check_2b(c); }));
    rep.conditions.push_back(guard("2c", [this](ConditionReport& c) { check_2c(c); }));
    return rep;
  }

 private:
  template <class F>
  ConditionReport guard(const char* name, F body) {
    ConditionReport c;
    c.name = name;
    try {
      body(c);
    } catch (const std::exception& e) {
      c.verdict = Verdict::Fail;
      c.detail = std::string("check aborted: ") + e.what();
    }
    return c;
  }

  bool truncated() const { return p_.truncated_width.has_value(); }
  bool known_empty(int n) const { return truncated() && n > *p_.truncated_width; }

  static void fail(ConditionReport& c, LevelIndex li, int width, std::string what,
                   std::vector<FormulaId> ids) {
    c.verdict = Verdict::Fail;
    c.level = li;
    c.detail = "level " + li.str() + ", width " + std::to_string(width) + ": " + std::move(what);
    c.formulas = std::move(ids);
  }

  // Every recorded formula carries the cell it is filed under.
  void check_1a(ConditionReport& c) {
    for (LevelIndex li : lis_) {
      const Level& row = p_.row(li);
      for (int n = 0; n <= row.max_width(); ++n) {
        for (FormulaId f : canonical(store_, row.at(n))) {
          const FormulaNode& node = store_.node(f);
          if (node.width != n || node.level != li) {
            fail(c, li, n,
                 id_str(f) + " is a width-" + std::to_string(node.width) + " level-" +
                     node.level.str() + " formula",
                 {f});
            return;
          }
          NodeKind want = NodeKind::Successor;
          if (li.is_finite() && li.k == 0) want = NodeKind::Level0;
          if (li.is_omega()) want = NodeKind::LimitPath;
          if (node.kind != want) {
            fail(c, li, n, id_str(f) + " has the wrong node shape for this level", {f});
            return;
          }
        }
      }
    }
  }

  // Extension sets live one level down.
  void check_1b(ConditionReport& c) {
    for (LevelIndex li : lis_) {
      if (!li.is_successor()) continue;
      LevelIndex prev = li.prev();
      if (!p_.has_row(prev)) continue;
      const Level& row = p_.row(li);
      const Level& below = p_.row(prev);
      for (int n = 0; n <= row.max_width(); ++n) {
        bool have = below.has_width(n + 1);
        if (!have && !known_empty(n + 1)) continue;
        for (FormulaId f : canonical(store_, row.at(n))) {
          if (store_.node(f).kind != NodeKind::Successor) continue;  // 1a's complaint
          for (FormulaId e : canonical(store_, store_.e_set(f))) {
            if (!have || !below.contains(n + 1, e)) {
              fail(c, li, n,
                   "one-point extension " + id_str(e) + " of " + id_str(f) +
                       " is not recorded at level " + prev.str(),
                   {f, e});
              return;
            }
          }
        }
      }
    }
  }

  // Lower levels are exactly the vertical projections of higher ones.
  void check_1c(ConditionReport& c) {
    for (std::size_t ai = 0; ai < lis_.size(); ++ai) {
      for (std::size_t bi = ai + 1; bi < lis_.size(); ++bi) {
        LevelIndex alpha = lis_[ai], beta = lis_[bi];
        const Level& low = p_.row(alpha);
        const Level& high = p_.row(beta);
        int top = std::min(low.max_width(), high.max_width());
        for (int n = 0; n <= top; ++n) {
          std::vector<FormulaId> expected = as_set(low.at(n));
          std::vector<FormulaId> image;
          for (FormulaId f : canonical(store_, high.at(n))) {
            FormulaId down = store_.v_project(f, alpha);
            if (!std::binary_search(expected.begin(), expected.end(), down)) {
              fail(c, alpha, n,
                   id_str(f) + " at level " + beta.str() + " projects to " + id_str(down) +
                       ", which is not recorded",
                   {f, down});
              return;
            }
            image.push_back(down);
          }
          image = as_set(std::move(image));
          if (image != expected) {
            std::vector<FormulaId> missing;
            std::set_difference(expected.begin(), expected.end(), image.begin(), image.end(),
                                std::back_inserter(missing));
            FormulaId worst = canonical(store_, missing).front();
            fail(c, alpha, n,
                 id_str(worst) + " is not the projection of anything at level " + beta.str(),
                 {worst});
            return;
          }
        }
      }
    }
  }

  // Closure under variable permutations.
  void check_1d(ConditionReport& c) {
    for (LevelIndex li : lis_) {
      const Level& row = p_.row(li);
      for (int n = 2; n <= row.max_width(); ++n) {
        std::vector<Injection> perms = all_permutations(n);
        for (FormulaId f : canonical(store_, row.at(n))) {
          for (const Injection& sigma : perms) {
            if (sigma.is_identity()) continue;
            FormulaId img = store_.h_project(f, sigma);
            if (!row.contains(n, img)) {
              fail(c, li, n,
                   "permuting " + id_str(f) + " by " + sigma.str() + " gives " + id_str(img) +
                       ", which is not recorded",
                   {f, img});
              return;
            }
          }
        }
      }
    }
  }

  // Narrower sets are exactly the initial segments of wider ones.
  void check_1e(ConditionReport& c) {
    for (LevelIndex li : lis_) {
      const Level& row = p_.row(li);
      for (int n = 1; n <= row.max_width(); ++n) {
        for (int m = 0; m < n; ++m) {
          std::vector<FormulaId> expected = as_set(row.at(m));
          std::vector<FormulaId> image;
          Injection im = initial_segment(m, n);
          for (FormulaId f : canonical(store_, row.at(n))) {
            FormulaId down = store_.h_project(f, im);
            if (!std::binary_search(expected.begin(), expected.end(), down)) {
              fail(c, li, m,
                   "the width-" + std::to_string(m) + " initial segment of " + id_str(f) +
                       " is " + id_str(down) + ", which is not recorded",
                   {f, down});
              return;
            }
            image.push_back(down);
          }
          image = as_set(std::move(image));
          if (image != expected) {
            std::vector<FormulaId> missing;
            std::set_difference(expected.begin(), expected.end(), image.begin(), image.end(),
                                std::back_inserter(missing));
            FormulaId worst = canonical(store_, missing).front();
            fail(c, li, m,
                 id_str(worst) + " is not an initial segment of any width-" + std::to_string(n) +
                     " formula",
                 {worst});
            return;
          }
        }
      }
    }
    if (c.verdict == Verdict::Pass && truncated() && nonempty_) {
      c.verdict = Verdict::Vacuous;
      c.detail = "widths above " + std::to_string(*p_.truncated_width) +
                 " are empty, so nonempty narrower sets cannot be their initial segments; those "
                 "instances are exempt";
    }
  }

  // Extension sets are exactly the projected width-up fibers, level by level.
  void check_2a(ConditionReport& c) {
    for (LevelIndex li : lis_) {
      if (!li.is_successor()) continue;
      LevelIndex prev = li.prev();
      const Level& row = p_.row(li);
      for (int n = 0; n <= row.max_width(); ++n) {
        if (!row.has_width(n + 1) && !known_empty(n + 1)) continue;
        auto fibers = fiber_over(store_, row, n);
        for (FormulaId f : canonical(store_, row.at(n))) {
          if (store_.node(f).kind != NodeKind::Successor) continue;
          std::vector<FormulaId> lhs = as_set(store_.e_set(f));
          std::vector<FormulaId> rhs;
          auto it = fibers.find(f);
          if (it != fibers.end())
            for (FormulaId up : it->second) rhs.push_back(store_.v_project(up, prev));
          rhs = as_set(std::move(rhs));
          if (lhs == rhs) continue;
          std::vector<FormulaId> only_lhs, only_rhs;
          std::set_difference(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(),
                              std::back_inserter(only_lhs));
          std::set_difference(rhs.begin(), rhs.end(), lhs.begin(), lhs.end(),
                              std::back_inserter(only_rhs));
          if (!only_lhs.empty()) {
            FormulaId e = canonical(store_, only_lhs).front();
            fail(c, li, n,
                 "extension " + id_str(e) + " of " + id_str(f) +
                     " is not the projection of any width-up formula over it",
                 {f, e});
          } else {
            FormulaId e = canonical(store_, only_rhs).front();
            fail(c, li, n,
                 "the width-up fiber over " + id_str(f) + " projects onto " + id_str(e) +
                     ", which its extension set lacks",
                 {f, e});
          }
          return;
        }
      }
    }
  }

  // Extension sets of lower projections are covered by projected fibers.
  void check_2b(ConditionReport& c) {
    for (std::size_t bi = 0; bi < lis_.size(); ++bi) {
      LevelIndex beta = lis_[bi];
      const Level& row = p_.row(beta);
      for (int n = 0; n <= row.max_width(); ++n) {
        if (!row.has_width(n + 1) && !known_empty(n + 1)) continue;
        auto fibers = fiber_over(store_, row, n);
        for (std::size_t gi = 0; gi <= bi; ++gi) {
          LevelIndex gamma = lis_[gi];
          if (!gamma.is_successor()) continue;
          LevelIndex gprev = gamma.prev();
          for (FormulaId f : canonical(store_, row.at(n))) {
            FormulaId down = store_.v_project(f, gamma);
            if (store_.node(down).kind != NodeKind::Successor) {
              fail(c, gamma, n,
                   "the level-" + gamma.str() + " projection of " + id_str(f) +
                       " carries no extension set",
                   {f, down});
              return;
            }
            std::unordered_set<FormulaId> rhs;
            auto it = fibers.find(f);
            if (it != fibers.end())
              for (FormulaId up : it->second) rhs.insert(store_.v_project(up, gprev));
            for (FormulaId e : canonical(store_, store_.e_set(down))) {
              if (!rhs.count(e)) {
                fail(c, gamma, n,
                     "extension " + id_str(e) + " of the level-" + gamma.str() +
                         " projection of " + id_str(f) + " (level " + beta.str() +
                         ") is not realized by any width-up formula there",
                     {f, e});
                return;
              }
            }
          }
        }
      }
    }
  }

  // Any two formulas of one level sit inside a common wider formula.
  void check_2c(ConditionReport& c) {
    for (LevelIndex li : lis_) {
      const Level& row = p_.row(li);
      int top = row.max_width();
      for (int n = 0; n <= top; ++n) {
        for (int m = 0; m <= top; ++m) {
          if (n + m > top) continue;
          if (row.at(n).empty() || row.at(m).empty()) continue;
          std::unordered_set<std::uint64_t> covered;
          Injection in = initial_segment(n, n + m);
          for (FormulaId t : row.at(n + m)) {
            FormulaId left = store_.h_project(t, in);
            for (const Injection& j : all_injections(m, n + m))
              covered.insert(pack_pair(left, store_.h_project(t, j)));
          }
          for (FormulaId f : canonical(store_, row.at(n))) {
            for (FormulaId g : canonical(store_, row.at(m))) {
              if (!covered.count(pack_pair(f, g))) {
                fail(c, li, n,
                     "no width-" + std::to_string(n + m) + " formula extends " + id_str(f) +
                         " (width " + std::to_string(n) + ") while containing " + id_str(g) +
                         " (width " + std::to_string(m) + ")",
                     {f, g});
                return;
              }
            }
          }
        }
      }
    }
    if (c.verdict == Verdict::Pass && truncated() && nonempty_) {
      c.verdict = Verdict::Vacuous;
      c.detail = "pairs of total width above " + std::to_string(*p_.truncated_width) +
                 " have no common extension there; those instances are exempt";
    }
  }

  const ScottProcess& p_;
  FormulaStore& store_;
  std::vector<LevelIndex> lis_;
  bool nonempty_ = false;
};

}  // namespace

std::string ConditionReport::line() const {
  std::string v = verdict == Verdict::Pass     ? "PASS"
                  : verdict == Verdict::Fail   ? "FAIL"
                                               : "VACUOUS";
  std::string out = v + " " + name;
  if (!detail.empty()) out += "  " + detail;
  return out;
}

bool ValidationReport::ok() const {
  for (const ConditionReport& c : conditions)
    if (c.verdict == Verdict::Fail) return false;
  return true;
}

const ConditionReport& ValidationReport::condition(const std::string& name) const {
  for (const ConditionReport& c : conditions)
    if (c.name == name) return c;
  throw Error("no condition named " + name);
}

std::string ValidationReport::str() const {
  std::string out;
  for (const ConditionReport& c : conditions) {
    out += c.line();
    out += '\n';
  }
  return out;
}

ValidationReport validate_process(const ScottProcess& p) {
  if (!p.store) throw Error("validate_process: process has no formula store");
  return Validator(p).run();
}

FormulaId unique_sentence(const ScottProcess& p, LevelIndex alpha) {
  if (!p.has_row(alpha)) throw Error("unique_sentence: level " + alpha.str() + " is not recorded");
  const Level& row = p.row(alpha);
  if (!row.has_width(0) || row.at(0).size() != 1)
    throw Error("unique_sentence: level " + alpha.str() + " does not hold exactly one sentence");
  return row.at(0)[0];
}

Level maximal_completion(const ScottProcess& p) {
  if (!p.store) throw Error("maximal_completion: process has no formula store");
  if (p.level_indices().empty()) throw Error("maximal_completion: empty process");
  FormulaStore& store = *p.store;
  const Level& last = p.row(p.last_level());
  int maxw = last.max_width();
  if (maxw < 0) throw Error("maximal_completion: the last level records no widths");
  // Building the cell at width w consumes the recorded width-(w+1) fiber,
  // so the completion always loses the top width.
  int top = maxw - 1;
  if (top < 0)
    throw Error("maximal_completion: no width survives losing the top one");
  Level next;
  next.by_width.resize(static_cast<std::size_t>(top) + 1);
  for (int n = 0; n <= top; ++n) {
    auto fibers = fiber_over(store, last, n);
    for (FormulaId f : last.at(n)) {
      auto it = fibers.find(f);
      std::vector<FormulaId> children = it == fibers.end() ? std::vector<FormulaId>{} : it->second;
      next.insert(n, store.intern_successor(f, std::move(children)));
    }
  }
  return next;
}

std::string AmalgamationWitness::describe(FormulaStore& store) const {
  std::ostringstream os;
  os << "width-" << (m + 1) << " formula " << id_str(theta) << " extends " << id_str(phi)
     << " = h(" << id_str(psi) << ", " << j.str() << ") but is not a projection of any width-"
     << (n + 1) << " formula over " << id_str(psi) << "; " << store.render(theta);
  return os.str();
}

AmalgamationCheck is_amalgamative(FormulaStore& store, const Level& level,
                                  std::optional<long long> truncated_width) {
  AmalgamationCheck out;
  int maxw = level.max_width();
  auto exempt = [&](int w) { return truncated_width && w > *truncated_width; };
  std::vector<std::unordered_map<FormulaId, std::vector<FormulaId>>> fibers(
      static_cast<std::size_t>(std::max(maxw, 0)) + 1);
  for (int w = 0; w < maxw; ++w) fibers[static_cast<std::size_t>(w)] = fiber_over(store, level, w);
  for (int m = 0; m <= maxw; ++m) {
    if (m + 1 > maxw || exempt(m + 1)) continue;
    for (int n = m; n <= maxw; ++n) {
      if (n + 1 > maxw || exempt(n + 1)) continue;
      out.checked_up_to_width = std::max(out.checked_up_to_width, n);
      for (FormulaId psi : canonical(store, level.at(n))) {
        const auto& over_psi = fibers[static_cast<std::size_t>(n)];
        auto psi_it = over_psi.find(psi);
        for (const Injection& j : all_injections(m, n)) {
          FormulaId phi = store.h_project(psi, j);
          auto lhs_it = fibers[static_cast<std::size_t>(m)].find(phi);
          if (lhs_it == fibers[static_cast<std::size_t>(m)].end()) continue;
          std::unordered_set<FormulaId> rhs;
          if (psi_it != over_psi.end()) {
            for (FormulaId rho : psi_it->second) {
              for (int y = 0; y <= n; ++y) {
                if (hits(j, y)) continue;
                std::vector<int> imgs = j.images;
                imgs.push_back(y);
                rhs.insert(store.h_project(rho, Injection(n + 1, std::move(imgs))));
              }
            }
          }
          for (FormulaId theta : canonical(store, lhs_it->second)) {
            if (!rhs.count(theta)) {
              out.amalgamative = false;
              out.witness = AmalgamationWitness{m, n, phi, psi, j, theta};
              return out;
            }
          }
        }
      }
    }
  }
  return out;
}

CompletionResult extend_by_completion(const ScottProcess& p) {
  CompletionResult out;
  AmalgamationCheck check = is_amalgamative(*p.store, p.row(p.last_level()), p.truncated_width);
  ScottProcess grown = p;
  grown.append_row(maximal_completion(p));
  grown.structure_derived = false;
  ValidationReport report = validate_process(grown);
  if (report.ok() != check.amalgamative) {
    std::string failing;
    for (const ConditionReport& c : report.conditions)
      if (c.verdict == Verdict::Fail) {
        failing = c.line();
        break;
      }
    throw Error(std::string("extend_by_completion: amalgamation check says ") +
                (check.amalgamative ? "yes" : "no") + " but the completed process " +
                (report.ok() ? "validates" : ("fails: " + failing)));
  }
  if (check.amalgamative)
    out.process = std::move(grown);
  else
    out.witness = check.witness;
  return out;
}

namespace {

Amalgam amalgamate_rec(FormulaStore& store, const Level& level, FormulaId psi, FormulaId theta,
                       const Injection& j, const Injection& k) {
  int n = store.width(psi);
  int m = j.source_width();
  if (n == m) {
    Amalgam out;
    out.rho = theta;
    out.k2 = Injection::identity(store.width(theta));
    out.j2 = k.compose(j.inverse());
    return out;
  }
  // Arrange for the last variable of psi to be off the common part, peel
  // it, solve the smaller instance, then put the variable back.
  Injection f = Injection::identity(n);
  if (hits(j, n - 1)) {
    int free = -1;
    for (int y = n - 1; y >= 0; --y)
      if (!hits(j, y)) {
        free = y;
        break;
      }
    std::vector<int> imgs(static_cast<std::size_t>(n));
    std::iota(imgs.begin(), imgs.end(), 0);
    std::swap(imgs[static_cast<std::size_t>(n - 1)], imgs[static_cast<std::size_t>(free)]);
    f = Injection(n, std::move(imgs));
  }
  FormulaId psi0 = store.h_project(psi, f);
  Injection j0 = f.compose(j);
  FormulaId psi1 = store.h_project(psi0, initial_segment(n - 1, n));
  Injection j0n(n - 1, j0.images);
  Amalgam rec = amalgamate_rec(store, level, psi1, theta, j0n, k);
  int q0 = store.width(rec.rho);
  // The peeled variable may already have an image in rho.
  for (int y : rec.j2.cotargets()) {
    Injection jy = with_image(rec.j2, y);
    if (store.h_project(rec.rho, jy) == psi0) {
      Amalgam out;
      out.rho = rec.rho;
      out.j2 = jy.compose(f);
      out.k2 = rec.k2;
      return out;
    }
  }
  // Otherwise lift rho one width through the level's fibers.
  if (level.has_width(q0 + 1)) {
    Injection iq = initial_segment(q0, q0 + 1);
    Injection j2_up(q0 + 1, rec.j2.images);
    for (FormulaId rho : canonical(store, level.at(q0 + 1))) {
      if (store.h_project(rho, iq) != rec.rho) continue;
      for (int y = 0; y <= q0; ++y) {
        if (hits(j2_up, y)) continue;
        Injection jy = with_image(j2_up, y);
        if (store.h_project(rho, jy) == psi0) {
          Amalgam out;
          out.rho = rho;
          out.j2 = jy.compose(f);
          out.k2 = iq.compose(rec.k2);
          return out;
        }
      }
    }
  }
  throw Error("amalgamate: no joint extension at width " + std::to_string(q0 + 1) +
              "; the level does not amalgamate these formulas");
}

}  // namespace

Amalgam amalgamate(FormulaStore& store, const Level& level, FormulaId psi, FormulaId theta,
                   const Injection& j, const Injection& k) {
  if (j.target_width != store.width(psi) || k.target_width != store.width(theta) ||
      j.source_width() != k.source_width())
    throw Error("amalgamate: injection shapes do not match the formulas");
  if (store.h_project(psi, j) != store.h_project(theta, k))
    throw Error("amalgamate: the common projections differ");
  Amalgam out = amalgamate_rec(store, level, psi, theta, j, k);
  if (store.h_project(out.rho, out.j2) != psi || store.h_project(out.rho, out.k2) != theta ||
      out.j2.compose(j) != out.k2.compose(k))
    throw Error("amalgamate: internal: the construction broke its own contract");
  return out;
}

std::vector<FormulaId> f_set(const ScottProcess& p, FormulaId phi, LevelIndex alpha, int k) {
  if (k < 0) throw Error("f_set: negative width step");
  FormulaStore& store = *p.store;
  int m = store.width(phi);
  LevelIndex beta = store.level(phi);
  if (!p.has_row(beta) || !p.row(beta).has_width(m) || !p.row(beta).contains(m, phi))
    throw Error("f_set: the formula is not part of the process");
  LevelIndex start = alpha;
  for (int i = 0; i < k; ++i) start = start.next();
  if (beta < start) throw Error("f_set: level plus width step exceeds the formula's level");

  // Chase extension sets down: each step trades one level for one width.
  std::vector<FormulaId> frontier = {store.v_project(phi, start)};
  for (int i = 0; i < k; ++i) {
    std::vector<FormulaId> next;
    for (FormulaId f : frontier)
      for (FormulaId e : store.e_set(f)) next.push_back(e);
    frontier = as_set(std::move(next));
  }

  // Independently: project the width-(m+k) fiber over phi down to alpha.
  const Level& row = p.row(beta);
  std::vector<FormulaId> proj;
  if (row.has_width(m + k)) {
    Injection im = initial_segment(m, m + k);
    for (FormulaId t : row.at(m + k))
      if (store.h_project(t, im) == phi) proj.push_back(store.v_project(t, alpha));
    proj = as_set(std::move(proj));
  } else if (p.truncated_width && m + k > *p.truncated_width) {
    // known empty
  } else {
    throw Error("f_set: width " + std::to_string(m + k) + " at level " + beta.str() +
                " is not recorded");
  }
  if (proj != frontier)
    throw Error("f_set: extension chase and fiber projection disagree (" +
                std::to_string(frontier.size()) + " vs " + std::to_string(proj.size()) + ")");
  return canonical(store, std::move(frontier));
}

bool injective_beyond(const ScottProcess& p, FormulaId phi) {
  FormulaStore& store = *p.store;
  LevelIndex beta = store.level(phi);
  LevelIndex up = beta.next();
  if (!p.has_row(beta) || !p.has_row(up))
    throw Error("injective_beyond: needs the formula's level and the next one");
  int m = store.width(phi);
  const Level& row = p.row(beta);
  const Level& above = p.row(up);
  if (!above.has_width(m))
    throw Error("injective_beyond: the next level does not record width " + std::to_string(m));
  for (int n = m; n <= row.max_width() && n <= above.max_width(); ++n) {
    std::unordered_map<FormulaId, int> preimages;
    for (FormulaId r : above.at(n)) ++preimages[store.v_project(r, beta)];
    std::vector<Injection> js = all_injections(m, n);
    for (FormulaId psi : row.at(n)) {
      bool relevant = false;
      for (const Injection& jj : js)
        if (store.h_project(psi, jj) == phi) {
          relevant = true;
          break;
        }
      if (relevant && preimages[psi] != 1) return false;
    }
  }
  return true;
}

RankReport process_rank(const ScottProcess& p) {
  RankReport rep = scan_rank_evidence(p);
  FormulaStore& store = *p.store;
  int levels = static_cast<int>(p.rows.size());
  int max_w = 0;
  for (const Level& r : p.rows) max_w = std::max(max_w, r.max_width());
  for (int t = 0; t <= levels - 2 + max_w && !rep.prerank; ++t) {
    for (int l = 0; l + 1 < levels && l <= t; ++l) {
      int w = t - l;
      if (!p.rows[static_cast<std::size_t>(l)].has_width(w) ||
          !p.rows[static_cast<std::size_t>(l) + 1].has_width(w))
        continue;
      for (FormulaId f : canonical(store, p.rows[static_cast<std::size_t>(l)].at(w))) {
        if (injective_beyond(p, f)) {
          rep.prerank = RankReport::PrerankCertificate{l, w, f, t};
          break;
        }
      }
      if (rep.prerank) break;
    }
  }
  return rep;
}

Path path_of(const ScottProcess& p, FormulaId top) {
  FormulaStore& store = *p.store;
  Path out;
  out.width = store.width(top);
  LevelIndex lv = store.level(top);
  int finite_rows = static_cast<int>(p.rows.size());
  int depth = lv.is_finite() ? std::min<int>(static_cast<int>(lv.k), finite_rows - 1)
                             : finite_rows - 1;
  for (int a = 0; a <= depth; ++a)
    out.entries.push_back(store.v_project(top, LevelIndex::finite(a)));
  return out;
}

FormulaId intern_path(FormulaStore& store, const Path& path) {
  if (path.entries.empty()) throw Error("intern_path: empty path");
  return store.intern_limit(path.entries);
}

Level isolated_paths(const ScottProcess& p) {
  if (!p.stabilized)
    throw Error("isolated_paths: the process carries no stabilization certificate");
  FormulaStore& store = *p.store;
  const Level& deep = p.rows.back();
  int cap = std::min(p.stabilized->width, deep.max_width());
  Level out;
  out.by_width.resize(static_cast<std::size_t>(std::max(cap, -1)) + 1);
  for (int n = 0; n <= cap; ++n)
    for (FormulaId f : deep.at(n)) out.insert(n, intern_path(store, path_of(p, f)));
  return out;
}

std::vector<Path> minimal_set(const ScottProcess& p, const Path& rho) {
  if (!p.stabilized)
    throw Error("minimal_set: the process carries no stabilization certificate");
  FormulaStore& store = *p.store;
  const Level& deep = p.rows.back();
  int cap = std::min(p.stabilized->width, deep.max_width());
  if (static_cast<int>(rho.entries.size()) != static_cast<int>(p.rows.size()))
    throw Error("minimal_set: the path does not span the recorded finite levels");
  if (rho.width > cap)
    throw Error("minimal_set: path width exceeds the stability certificate");
  if (!deep.has_width(rho.width) || !deep.contains(rho.width, rho.entries.back()))
    throw Error("minimal_set: the path's deepest entry is not in the process");

  FormulaId start = intern_path(store, rho);
  std::vector<FormulaId> pending = {start};
  std::set<FormulaId> seen = {start};
  while (!pending.empty()) {
    FormulaId cur = pending.back();
    pending.pop_back();
    int w = store.width(cur);
    for (int w2 = 0; w2 <= w; ++w2) {
      for (const Injection& jj : all_injections(w2, w)) {
        FormulaId img = store.h_project(cur, jj);
        if (seen.insert(img).second) pending.push_back(img);
      }
    }
    // Stability makes the deepest row's fiber the extension step at the limit.
    if (w + 1 <= cap) {
      FormulaId top = store.node(cur).entries.back();
      Injection iw = initial_segment(w, w + 1);
      for (FormulaId up : deep.at(w + 1)) {
        if (store.h_project(up, iw) != top) continue;
        FormulaId lifted = intern_path(store, path_of(p, up));
        if (seen.insert(lifted).second) pending.push_back(lifted);
      }
    }
  }
  std::vector<FormulaId> ids(seen.begin(), seen.end());
  std::sort(ids.begin(), ids.end(), [&store](FormulaId a, FormulaId b) {
    if (store.width(a) != store.width(b)) return store.width(a) < store.width(b);
    return store.compare(a, b) < 0;
  });
  std::vector<Path> out;
  out.reserve(ids.size());
  for (FormulaId f : ids) {
    Path q;
    q.width = store.width(f);
    q.entries = store.node(f).entries;
    out.push_back(std::move(q));
  }
  return out;
}

ScottProcess extend_at_limit(const ScottProcess& p, const Path& rho) {
  if (!p.limit_rows.empty())
    throw Error("extend_at_limit: the process already has limit rows");
  FormulaStore& store = *p.store;
  std::vector<Path> ms = minimal_set(p, rho);
  int cap = std::min(p.stabilized->width, p.rows.back().max_width());
  // Keep the widths whose fibers the closure provably covers in full; the
  // closure reaches total width cap, so rho's own width is the loss.
  int keep = std::max(cap - rho.width, 0);
  Level row;
  row.by_width.resize(static_cast<std::size_t>(keep) + 1);
  for (const Path& q : ms)
    if (q.width <= keep) row.insert(q.width, intern_path(store, q));
  ScottProcess out = p;
  out.limit_rows.push_back(std::move(row));
  out.structure_derived = false;
  return out;
}

std::optional<std::string> e_fiber_mismatch(const ScottProcess& p) {
  FormulaStore& store = *p.store;
  std::vector<LevelIndex> lis = p.level_indices();
  for (std::size_t bi = 0; bi < lis.size(); ++bi) {
    LevelIndex beta = lis[bi];
    const Level& row = p.row(beta);
    for (int n = 0; n <= row.max_width(); ++n) {
      bool have = row.has_width(n + 1);
      if (!have && !(p.truncated_width && n + 1 > *p.truncated_width)) continue;
      auto fibers = fiber_over(store, row, n);
      for (std::size_t gi = 0; gi <= bi; ++gi) {
        LevelIndex gamma = lis[gi];
        if (!gamma.is_successor()) continue;
        for (FormulaId f : canonical(store, row.at(n))) {
          FormulaId down = store.v_project(f, gamma);
          if (store.node(down).kind != NodeKind::Successor)
            return "level " + gamma.str() + " projection of " + id_str(f) +
                   " carries no extension set";
          std::vector<FormulaId> lhs = as_set(store.e_set(down));
          std::vector<FormulaId> rhs;
          auto it = fibers.find(f);
          if (it != fibers.end())
            for (FormulaId up : it->second) rhs.push_back(store.v_project(up, gamma.prev()));
          rhs = as_set(std::move(rhs));
          if (lhs != rhs)
            return "width " + std::to_string(n) + ", level " + beta.str() + " down to " +
                   gamma.str() + ": extension set of the projection of " + id_str(f) + " has " +
                   std::to_string(lhs.size()) + " members, the projected fiber " +
                   std::to_string(rhs.size());
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace scott
