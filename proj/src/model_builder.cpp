#include "scott/model_builder.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "scott/common.hpp"

namespace scott {

namespace {

Injection initial_segment(int m, int n) {
  std::vector<int> imgs(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) imgs[static_cast<std::size_t>(i)] = i;
  return Injection(n, std::move(imgs));
}

// i_m u {(x_m, x_y)} into X_n.
Injection one_point(int m, int n, int y) {
  std::vector<int> imgs(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) imgs[static_cast<std::size_t>(i)] = i;
  imgs.push_back(y);
  return Injection(n, std::move(imgs));
}

std::vector<FormulaId> canonical(FormulaStore& store, std::vector<FormulaId> ids) {
  std::sort(ids.begin(), ids.end(),
            [&](FormulaId a, FormulaId b) { return store.compare(a, b) < 0; });
  return ids;
}

// Width-up members of `row` projecting onto phi under the initial segment,
// in canonical order so every choice below is schedule independent.
std::vector<FormulaId> fiber_over(FormulaStore& store, const Level& row, FormulaId phi) {
  int n = store.width(phi);
  if (!row.has_width(n + 1)) return {};
  std::vector<FormulaId> out;
  for (FormulaId t : row.at(n + 1))
    if (store.h_project(t, initial_segment(n, n + 1)) == phi) out.push_back(t);
  return canonical(store, std::move(out));
}

// The sub-levels alpha whose extension sets drive the construction: the
// predecessor of a successor top level (which subsumes everything below
// it), every computed finite level below a limit one.
std::vector<LevelIndex> driving_levels(const ScottProcess& p) {
  LevelIndex top = p.last_level();
  if (top.is_successor()) return {top.prev()};
  if (top.is_omega()) {
    std::vector<LevelIndex> out;
    for (std::size_t a = 0; a + 1 < p.rows.size(); ++a)
      out.push_back(LevelIndex::finite(static_cast<std::uint32_t>(a)));
    return out;
  }
  return {};  // level-0 top: nothing below
}

std::string id_str(FormulaId id) { return "#" + std::to_string(id); }

void spawn_obligations(FormulaStore& store, const std::vector<LevelIndex>& drive,
                       FormulaId phi, int m, std::vector<ThreadObligation>& obs) {
  for (LevelIndex alpha : drive) {
    FormulaId proj = store.v_project(phi, alpha.next());
    for (FormulaId psi : canonical(store, store.e_set(proj))) {
      ThreadObligation ob;
      ob.m = m;
      ob.alpha = alpha;
      ob.psi = psi;
      obs.push_back(std::move(ob));
    }
  }
}

// Marks obligations discharged by the chain's newest formula (index n).
void audit_obligations(FormulaStore& store, const std::vector<FormulaId>& chain, int n,
                       std::vector<ThreadObligation>& obs) {
  for (ThreadObligation& ob : obs) {
    if (ob.met || ob.m >= n) continue;
    for (int y = ob.m; y < n && !ob.met; ++y) {
      FormulaId img =
          store.v_project(store.h_project(chain[static_cast<std::size_t>(n)],
                                          one_point(ob.m, n, y)),
                          ob.alpha);
      if (img == ob.psi) {
        ob.met = true;
        ob.witness_n = n;
        ob.witness_y = y;
      }
    }
  }
}

void audit_goals(FormulaStore& store, const std::vector<FormulaId>& chain, int n,
                 std::vector<CompletionGoal>& goals) {
  for (CompletionGoal& g : goals) {
    if (g.met || g.width > n) continue;
    for (const Injection& j : all_injections(g.width, n)) {
      if (store.h_project(chain[static_cast<std::size_t>(n)], j) == g.target) {
        g.met = true;
        g.witness_n = n;
        g.witness_j = j;
        break;
      }
    }
  }
}

std::string obligation_line(const ThreadObligation& ob) {
  std::ostringstream out;
  out << "obligation m=" << ob.m << " alpha=" << ob.alpha.str() << " psi=" << id_str(ob.psi);
  if (ob.met)
    out << " met n=" << ob.witness_n << " y=" << ob.witness_y;
  else if (ob.blocked)
    out << " blocked: " << ob.note;
  else
    out << " pending";
  return out.str();
}

std::string goal_line(const CompletionGoal& g) {
  std::ostringstream out;
  out << "goal width=" << g.width << " target=" << id_str(g.target);
  if (g.met)
    out << " met n=" << g.witness_n << " j=" << g.witness_j.str();
  else if (g.blocked)
    out << " blocked: " << g.note;
  else
    out << " pending";
  return out.str();
}

// Shared machinery for the single-thread and model-pair builders. Appends
// keep the obligation and goal ledgers current.
struct ThreadBuilder {
  const ScottProcess& p;
  FormulaStore& store;
  const Level& top;
  LevelIndex delta;
  std::vector<LevelIndex> drive;
  int elements;
  Thread t;
  bool exhausted = false;  // the top row ran out of widths or fibers

  ThreadBuilder(const ScottProcess& pp, int n)
      : p(pp),
        store(*pp.store),
        top(pp.row(pp.last_level())),
        delta(pp.last_level()),
        drive(driving_levels(pp)),
        elements(n) {
    if (pp.rows.empty()) throw Error("thread: process has no rows");
    if (n < 0) throw Error("thread: negative element budget");
    t.store = &store;
    append(unique_sentence(p, delta));
    int cap = std::min(elements, top.max_width());
    for (int w = 0; w <= cap; ++w) {
      std::vector<FormulaId> row = top.at(w);
      for (FormulaId f : canonical(store, std::move(row))) {
        CompletionGoal g;
        g.target = f;
        g.width = w;
        t.goals.push_back(std::move(g));
      }
    }
    audit_goals(store, t.formulas, 0, t.goals);
  }

  int width() const { return t.width(); }

  void append(FormulaId phi) {
    t.formulas.push_back(phi);
    int n = width();
    audit_obligations(store, t.formulas, n, t.obligations);
    audit_goals(store, t.formulas, n, t.goals);
    spawn_obligations(store, drive, phi, n, t.obligations);
  }

  ThreadObligation* next_obligation() {
    for (ThreadObligation& ob : t.obligations)
      if (!ob.met && !ob.blocked) return &ob;
    return nullptr;
  }

  CompletionGoal* next_goal() {
    for (CompletionGoal& g : t.goals)
      if (!g.met && !g.blocked) return &g;
    return nullptr;
  }

  // The width-up fiber over the current deepest formula; empty plus
  // `exhausted` when the top row cannot extend any further.
  std::vector<FormulaId> frontier() {
    int n = width();
    if (!top.has_width(n + 1)) {
      t.notes.push_back("top row computes no width-" + std::to_string(n + 1) +
                        " formulas; extension stops at width " + std::to_string(n));
      exhausted = true;
      return {};
    }
    std::vector<FormulaId> fiber = fiber_over(store, top, t.formulas.back());
    if (fiber.empty()) {
      t.notes.push_back("the width-" + std::to_string(n) +
                        " formula has an empty extension set; the thread exists only up to "
                        "this width (the structure has no further distinct elements)");
      exhausted = true;
    }
    return fiber;
  }

  bool serve(ThreadObligation& ob) {
    std::vector<FormulaId> fiber = frontier();
    if (fiber.empty()) return false;
    int n = width();
    for (FormulaId cand : fiber) {
      FormulaId img = store.v_project(
          store.h_project(cand, one_point(ob.m, n + 1, n)), ob.alpha);
      if (img == ob.psi) {
        append(cand);
        return true;
      }
    }
    throw Error("thread: obligation " + obligation_line(ob) + " has no witness in the width-" +
                std::to_string(n + 1) +
                " fiber; the process data contradicts the extension property");
  }

  bool serve(CompletionGoal& g) {
    int n = width();
    int q = n + g.width;
    if (q > elements) {
      g.blocked = true;
      g.note = "pairing at width " + std::to_string(q) + " exceeds the element budget";
      return false;
    }
    if (q > top.max_width()) {
      g.blocked = true;
      g.note = "pairing at width " + std::to_string(q) + " exceeds the computed rows";
      return false;
    }
    std::vector<FormulaId> joint;
    for (FormulaId theta : top.at(q))
      if (store.h_project(theta, initial_segment(n, q)) == t.formulas.back())
        joint.push_back(theta);
    for (FormulaId theta : canonical(store, std::move(joint))) {
      for (const Injection& j : all_injections(g.width, q)) {
        if (store.h_project(theta, j) != g.target) continue;
        for (int s = n + 1; s <= q; ++s) append(store.h_project(theta, initial_segment(s, q)));
        if (!g.met) {  // the audit normally catches it at the last append
          g.met = true;
          g.witness_n = q;
          g.witness_j = j;
        }
        return true;
      }
    }
    throw Error("thread: no width-" + std::to_string(q) + " pairing realizes " +
                goal_line(g) + " over the current prefix; the pairing condition fails");
  }

  bool extend_canonically() {
    std::vector<FormulaId> fiber = frontier();
    if (fiber.empty()) return false;
    append(fiber.front());
    return true;
  }

  void summarize() {
    int om = 0, gm = 0;
    for (const ThreadObligation& ob : t.obligations) om += ob.met ? 1 : 0;
    for (const CompletionGoal& g : t.goals) gm += g.met ? 1 : 0;
    t.notes.push_back("obligations met " + std::to_string(om) + "/" +
                      std::to_string(t.obligations.size()) + "; goals met " +
                      std::to_string(gm) + "/" + std::to_string(t.goals.size()));
  }

  Thread run() {
    while (width() < elements && !exhausted) {
      if (ThreadObligation* ob = next_obligation()) {
        if (!serve(*ob)) break;
        continue;
      }
      if (CompletionGoal* g = next_goal()) {
        serve(*g);  // either appends or blocks the goal; both make progress
        continue;
      }
      if (!extend_canonically()) break;
    }
    summarize();
    return std::move(t);
  }
};

MultiplicityStructure realize_formula(FormulaStore& store, FormulaId deepest,
                                      std::vector<std::string> names) {
  FormulaId base = store.v_project(deepest, LevelIndex::finite(0));
  const FormulaNode& node = store.node(base);
  const Vocabulary& vocab = store.vocab();
  int n = node.width;
  if (names.empty()) {
    int digits = n > 10 ? static_cast<int>(std::to_string(n - 1).size()) : 1;
    for (int i = 0; i < n; ++i) {
      std::string d = std::to_string(i);
      names.push_back("c" + std::string(static_cast<std::size_t>(digits) - d.size(), '0') + d);
    }
  }
  if (static_cast<int>(names.size()) != n)
    throw Error("realize: " + std::to_string(names.size()) + " names for " + std::to_string(n) +
                " elements");
  ConcreteStructure c;
  c.vocab = vocab;
  c.size = n;
  c.facts.assign(static_cast<std::size_t>(vocab.size()), {});
  c.element_names = std::move(names);
  for (long long idx = 0; idx < vocab.instance_count(n); ++idx) {
    if (!node.diagram.sign(idx)) continue;
    auto [sym, args] = vocab.instance_at(n, idx);
    c.facts[static_cast<std::size_t>(sym)].insert(args);
  }
  return as_multiplicity_structure(c);
}

}  // namespace

bool Thread::obligations_met() const {
  for (const ThreadObligation& ob : obligations)
    if (!ob.met) return false;
  return true;
}

bool Thread::complete() const {
  for (const CompletionGoal& g : goals)
    if (!g.met) return false;
  return true;
}

std::string Thread::ledger() const {
  std::ostringstream out;
  for (const ThreadObligation& ob : obligations) out << obligation_line(ob) << "\n";
  for (const CompletionGoal& g : goals) out << goal_line(g) << "\n";
  for (const std::string& n : notes) out << "note: " << n << "\n";
  return out.str();
}

Thread build_thread(const ScottProcess& p, int elements) {
  return ThreadBuilder(p, elements).run();
}

MultiplicityStructure realize_model(const Thread& t, std::vector<std::string> names) {
  if (!t.store || t.formulas.empty()) throw Error("realize: empty thread");
  return realize_formula(*t.store, t.formulas.back(), std::move(names));
}

// ---------------------------------------------------------------------------
// Model pairs

namespace {

// Runs the outer thread while steering a subsequence of its indices so
// that their order-preserving H-projections thread through the
// replacement row.
struct PairBuilder {
  ThreadBuilder tb;
  const Level& sub;
  ModelPair r;

  PairBuilder(const ScottProcess& p, const Level& sub_level, int elements)
      : tb(p, elements), sub(sub_level) {
    r.inner_formulas.push_back(tb.t.formulas[0]);  // the shared sentence
    int cap = std::min(elements, sub.max_width());
    for (int w = 0; w <= cap; ++w) {
      std::vector<FormulaId> row = sub.at(w);
      for (FormulaId f : canonical(tb.store, std::move(row))) {
        CompletionGoal g;
        g.target = f;
        g.width = w;
        r.inner_goals.push_back(std::move(g));
      }
    }
    spawn_obligations(tb.store, tb.drive, r.inner_formulas[0], 0, r.inner_obligations);
    audit_goals(tb.store, r.inner_formulas, 0, r.inner_goals);
  }

  int sub_width() const { return static_cast<int>(r.inner_formulas.size()) - 1; }

  // The embedding of the inner prefix into the outer one, optionally
  // adjoining the outer index `extra` as the next inner element.
  Injection chosen_injection(int target, int inner_width, int extra = -1) const {
    std::vector<int> imgs(r.chosen.begin(), r.chosen.begin() + inner_width);
    if (extra >= 0) imgs.push_back(extra);
    return Injection(target, std::move(imgs));
  }

  void append_inner(FormulaId sigma) {
    r.inner_formulas.push_back(sigma);
    int m = sub_width();
    audit_obligations(tb.store, r.inner_formulas, m, r.inner_obligations);
    audit_goals(tb.store, r.inner_formulas, m, r.inner_goals);
    spawn_obligations(tb.store, tb.drive, sigma, m, r.inner_obligations);
  }

  ThreadObligation* next_inner_obligation() {
    for (ThreadObligation& ob : r.inner_obligations)
      if (!ob.met && !ob.blocked) return &ob;
    return nullptr;
  }

  CompletionGoal* next_inner_goal() {
    for (CompletionGoal& g : r.inner_goals)
      if (!g.met && !g.blocked) return &g;
    return nullptr;
  }

  // One outer extension that simultaneously advances the inner thread:
  // the candidate's projection to the chosen indices plus the new point
  // must land in the replacement row. Returns false when no candidate
  // works (the fiber itself still has members).
  bool y_step(FormulaId cand, int n) {
    FormulaId sigma =
        tb.store.h_project(cand, chosen_injection(n + 1, sub_width(), n));
    if (!sub.has_width(sub_width() + 1) || !sub.contains(sub_width() + 1, sigma)) return false;
    tb.append(cand);
    r.chosen.push_back(n);
    append_inner(sigma);
    return true;
  }

  // Outer append that joins the chosen set whenever the replacement row
  // absorbs the candidate's projection.
  void absorb(FormulaId cand) {
    if (!y_step(cand, tb.width())) tb.append(cand);
  }

  bool serve_outer(ThreadObligation& ob) {
    std::vector<FormulaId> fiber = tb.frontier();
    if (fiber.empty()) return false;
    int n = tb.width();
    for (FormulaId cand : fiber) {
      FormulaId img = tb.store.v_project(
          tb.store.h_project(cand, one_point(ob.m, n + 1, n)), ob.alpha);
      if (img == ob.psi) {
        absorb(cand);
        return true;
      }
    }
    throw Error("thread: obligation " + obligation_line(ob) + " has no witness in the width-" +
                std::to_string(n + 1) + " fiber");
  }

  bool serve_outer(CompletionGoal& g) {
    int n = tb.width();
    int q = n + g.width;
    if (q > tb.elements) {
      g.blocked = true;
      g.note = "pairing at width " + std::to_string(q) + " exceeds the element budget";
      return true;
    }
    if (q > tb.top.max_width()) {
      g.blocked = true;
      g.note = "pairing at width " + std::to_string(q) + " exceeds the computed rows";
      return true;
    }
    std::vector<FormulaId> joint;
    for (FormulaId theta : tb.top.at(q))
      if (tb.store.h_project(theta, initial_segment(n, q)) == tb.t.formulas.back())
        joint.push_back(theta);
    for (FormulaId theta : canonical(tb.store, std::move(joint))) {
      for (const Injection& j : all_injections(g.width, q)) {
        if (tb.store.h_project(theta, j) != g.target) continue;
        for (int s = n + 1; s <= q; ++s)
          absorb(tb.store.h_project(theta, initial_segment(s, q)));
        if (!g.met) {
          g.met = true;
          g.witness_n = q;
          g.witness_j = j;
        }
        return true;
      }
    }
    throw Error("thread: no width-" + std::to_string(q) + " pairing realizes " + goal_line(g));
  }

  bool serve_inner(ThreadObligation& ob) {
    std::vector<FormulaId> fiber = tb.frontier();
    if (fiber.empty()) return false;
    int n = tb.width();
    if (!sub.has_width(sub_width() + 1)) {
      ob.blocked = true;
      ob.note = "replacement row computes no width-" + std::to_string(sub_width() + 1) +
                " formulas";
      return true;
    }
    for (FormulaId cand : fiber) {
      FormulaId img = tb.store.v_project(
          tb.store.h_project(cand, chosen_injection(n + 1, ob.m, n)), ob.alpha);
      if (img != ob.psi) continue;
      if (y_step(cand, n)) return true;
    }
    ob.blocked = true;
    ob.note = "no extension discharges it while keeping the inner thread inside the "
              "replacement row";
    return true;
  }

  bool serve_inner(CompletionGoal& g) {
    int m = sub_width();
    int q = m + g.width;
    if (q > sub.max_width() || tb.width() + g.width > tb.elements) {
      g.blocked = true;
      g.note = "pairing at inner width " + std::to_string(q) + " exceeds the budget";
      return true;
    }
    std::vector<FormulaId> joint;
    for (FormulaId theta : sub.at(q))
      if (tb.store.h_project(theta, initial_segment(m, q)) == r.inner_formulas.back())
        joint.push_back(theta);
    for (FormulaId theta : canonical(tb.store, std::move(joint))) {
      bool hits = false;
      for (const Injection& j : all_injections(g.width, q))
        if (tb.store.h_project(theta, j) == g.target) {
          hits = true;
          break;
        }
      if (!hits) continue;
      // walk the outer thread up the initial segments of theta
      bool progressed = true;
      for (int s = m + 1; s <= q && progressed; ++s) {
        FormulaId target = tb.store.h_project(theta, initial_segment(s, q));
        progressed = false;
        std::vector<FormulaId> fiber = tb.frontier();
        int n = tb.width();
        for (FormulaId cand : fiber) {
          FormulaId sigma =
              tb.store.h_project(cand, chosen_injection(n + 1, sub_width(), n));
          if (sigma != target) continue;
          tb.append(cand);
          r.chosen.push_back(n);
          append_inner(sigma);
          progressed = true;
          break;
        }
      }
      if (!g.met && progressed) {
        g.met = true;
        g.witness_n = sub_width();
      }
      if (!progressed && !g.met) {
        g.blocked = true;
        g.note = "outer thread found no lift for the inner pairing";
      }
      return true;
    }
    g.blocked = true;
    g.note = "no inner pairing over the current inner prefix";
    return true;
  }

  bool extend_idle() {
    std::vector<FormulaId> fiber = tb.frontier();
    if (fiber.empty()) return false;
    int n = tb.width();
    if (sub.has_width(sub_width() + 1))
      for (FormulaId cand : fiber)
        if (y_step(cand, n)) return true;
    tb.append(fiber.front());
    return true;
  }

  ModelPair run() {
    while (tb.width() < tb.elements && !tb.exhausted) {
      if (ThreadObligation* ob = tb.next_obligation()) {
        if (!serve_outer(*ob)) break;
        continue;
      }
      if (ThreadObligation* ob = next_inner_obligation()) {
        if (!serve_inner(*ob)) break;
        continue;
      }
      if (CompletionGoal* g = next_inner_goal()) {
        serve_inner(*g);
        continue;
      }
      if (CompletionGoal* g = tb.next_goal()) {
        serve_outer(*g);
        continue;
      }
      if (!extend_idle()) break;
    }
    tb.summarize();
    int om = 0;
    for (const ThreadObligation& ob : r.inner_obligations) om += ob.met ? 1 : 0;
    r.notes.push_back("inner obligations met " + std::to_string(om) + "/" +
                      std::to_string(r.inner_obligations.size()) + "; inner width " +
                      std::to_string(sub_width()) + " over outer width " +
                      std::to_string(tb.width()));
    r.outer_thread = std::move(tb.t);
    r.outer = realize_model(r.outer_thread);
    std::vector<std::string> names;
    for (int y : r.chosen) names.push_back("c" + std::to_string(y));
    r.inner = realize_formula(tb.store, r.inner_formulas.back(), std::move(names));
    return std::move(r);
  }
};

}  // namespace

bool ModelPair::inner_obligations_met() const {
  for (const ThreadObligation& ob : inner_obligations)
    if (!ob.met) return false;
  return true;
}

std::string ModelPair::ledger() const {
  std::ostringstream out;
  out << "outer thread:\n" << outer_thread.ledger();
  out << "inner thread:\n";
  for (const ThreadObligation& ob : inner_obligations) out << obligation_line(ob) << "\n";
  for (const CompletionGoal& g : inner_goals) out << goal_line(g) << "\n";
  for (const std::string& n : notes) out << "note: " << n << "\n";
  return out.str();
}

ModelPair build_model_pair(const ScottProcess& p, const Level& sub_level, int elements) {
  if (p.rows.empty()) throw Error("model pair: process has no rows");
  const Level& top = p.row(p.last_level());
  if (sub_level.max_width() > top.max_width())
    throw Error("model pair: replacement row is wider than the top row");
  for (int w = 0; w <= sub_level.max_width(); ++w)
    for (FormulaId f : sub_level.at(w))
      if (!top.contains(w, f))
        throw Error("model pair: replacement formula " + id_str(f) +
                    " at width " + std::to_string(w) + " is not in the top row");
  ScottProcess swapped = p.with_last_row(sub_level);
  ValidationReport rep = validate_process(swapped);
  if (!rep.ok()) {
    for (const ConditionReport& c : rep.conditions)
      if (c.verdict == Verdict::Fail)
        throw Error("model pair: replacement level rejected: " + c.line());
  }
  return PairBuilder(p, sub_level, elements).run();
}

// ---------------------------------------------------------------------------
// Weavings

Injection subset_injection(std::uint32_t a, std::uint32_t b) {
  if ((a & ~b) != 0) throw Error("subset_injection: not a subset");
  std::vector<int> imgs;
  for (std::uint32_t rest = a; rest != 0; rest &= rest - 1) {
    int bit = std::countr_zero(rest);
    imgs.push_back(std::popcount(b & ((1u << bit) - 1u)));
  }
  return Injection(std::popcount(b), std::move(imgs));
}

namespace {

std::string mask_str(std::uint32_t mask) {
  std::string out = "{";
  bool first = true;
  for (std::uint32_t rest = mask; rest != 0; rest &= rest - 1) {
    if (!first) out += ",";
    out += std::to_string(std::countr_zero(rest));
    first = false;
  }
  return out + "}";
}

std::string weaving_line(const WeavingObligation& ob) {
  std::ostringstream out;
  out << "fiber a=" << mask_str(ob.a) << " psi=" << id_str(ob.psi);
  if (ob.met)
    out << " met b=" << mask_str(ob.witness_b) << " y=" << ob.witness_y;
  else
    out << " pending";
  return out.str();
}

// j_{a,b} u {(x_{|a|}, y)} for |b| = |a| + 1, y the unique free slot.
Injection subset_extension(std::uint32_t a, std::uint32_t b, int* y_out = nullptr) {
  Injection j = subset_injection(a, b);
  int y = j.cotargets().at(0);
  if (y_out) *y_out = y;
  std::vector<int> imgs = j.images;
  imgs.push_back(y);
  return Injection(j.target_width, std::move(imgs));
}

struct WeaveBuilder {
  FormulaStore& store;
  const Level& top;
  int K;
  long long effort;
  WeavingFamily w;
  std::vector<bool> assigned;

  WeaveBuilder(const ScottProcess& p, int k, long long eff)
      : store(*p.store), top(p.row(p.last_level())), K(k), effort(eff) {
    w.store = &store;
    w.index_budget = K;
    w.assignment.assign(1u << K, kNoFormula);
    assigned.assign(1u << K, false);
  }

  void assign(std::uint32_t mask, FormulaId phi) {
    if (assigned[mask]) {
      if (w.assignment[mask] != phi)
        throw Error("weaving: conflicting assignment at " + mask_str(mask) +
                    " (merge broke coherence)");
      return;
    }
    w.assignment[mask] = phi;
    assigned[mask] = true;
    audit(mask, phi);
    if (std::popcount(mask) < K) {
      for (FormulaId psi : fiber_over(store, top, phi)) {
        WeavingObligation ob;
        ob.a = mask;
        ob.psi = psi;
        // supersets assigned before this mask can already witness it
        for (int beta = 0; beta < K && !ob.met; ++beta) {
          std::uint32_t b = mask | (1u << beta);
          if (b == mask || !assigned[b]) continue;
          int y = -1;
          if (store.h_project(w.assignment[b], subset_extension(mask, b, &y)) == psi) {
            ob.met = true;
            ob.witness_b = b;
            ob.witness_y = y;
          }
        }
        w.ledger.push_back(std::move(ob));
      }
    }
  }

  void audit(std::uint32_t b, FormulaId phi_b) {
    int nb = std::popcount(b);
    for (WeavingObligation& ob : w.ledger) {
      if (ob.met || std::popcount(ob.a) + 1 != nb || (ob.a & b) != ob.a) continue;
      int y = -1;
      if (store.h_project(phi_b, subset_extension(ob.a, b, &y)) == ob.psi) {
        ob.met = true;
        ob.witness_b = b;
        ob.witness_y = y;
      }
    }
  }

  // Joint extension at exactly the union's width, constrained by both
  // order embeddings. The amalgamation recursion is tried first; its
  // output is usable whenever it lands at the right width without
  // identifying the two new points.
  FormulaId merge(std::uint32_t cur, std::uint32_t nb, std::uint32_t c) {
    Injection ja = subset_injection(cur, nb);
    Injection jc = subset_injection(c, nb);
    FormulaId phi_cur = w.assignment[cur], phi_c = w.assignment[c];
    std::uint32_t d = cur & c;
    int nbw = std::popcount(nb);
    try {
      Amalgam am = amalgamate(store, top, phi_cur, phi_c, subset_injection(d, cur),
                              subset_injection(d, c));
      if (store.width(am.rho) == nbw) {
        std::vector<int> s(static_cast<std::size_t>(nbw), -1);
        int t = 0;
        int pos_cur = 0, pos_c = 0;
        bool usable = true;
        for (std::uint32_t rest = nb; rest != 0; rest &= rest - 1, ++t) {
          std::uint32_t elem = 1u << std::countr_zero(rest);
          if (cur & elem)
            s[static_cast<std::size_t>(t)] = am.j2.images[static_cast<std::size_t>(pos_cur)];
          else
            s[static_cast<std::size_t>(t)] = am.k2.images[static_cast<std::size_t>(pos_c)];
          if (cur & elem) ++pos_cur;
          if (c & elem) ++pos_c;
        }
        std::vector<int> seen = s;
        std::sort(seen.begin(), seen.end());
        for (std::size_t i = 0; i + 1 < seen.size(); ++i)
          if (seen[i] == seen[i + 1]) usable = false;
        if (usable) {
          FormulaId cand = store.h_project(am.rho, Injection(nbw, s));
          if (store.h_project(cand, ja) == phi_cur && store.h_project(cand, jc) == phi_c)
            return cand;
        }
      }
    } catch (const Error&) {
      // fall through to the direct search
    }
    if (!top.has_width(nbw))
      throw Error("weaving: merge needs width " + std::to_string(nbw) +
                  " but the top row stops earlier");
    FormulaId best = kNoFormula;
    for (FormulaId theta : top.at(nbw)) {
      if (--effort < 0) throw Error("weaving: merge effort exhausted");
      if (store.h_project(theta, ja) != phi_cur || store.h_project(theta, jc) != phi_c) continue;
      if (best == kNoFormula || store.compare(theta, best) < 0) best = theta;
    }
    if (best == kNoFormula)
      throw Error("weaving: no joint extension of " + mask_str(cur) + " and " + mask_str(c) +
                  " at width " + std::to_string(nbw));
    return best;
  }

  void add_index(int idx) {
    std::uint32_t existing = idx == 0 ? 0u : ((1u << idx) - 1u);
    std::uint32_t b0 = 0;
    WeavingObligation* serve = nullptr;
    for (WeavingObligation& ob : w.ledger)
      if (!ob.met) {
        serve = &ob;
        break;
      }
    if (serve) {
      b0 = serve->a | (1u << idx);
      assign(b0, serve->psi);  // audit inside marks it met via b0
    } else {
      b0 = 1u << idx;
      std::vector<FormulaId> fiber = fiber_over(store, top, w.assignment[0]);
      if (fiber.empty()) throw Error("weaving: the top row has no width-1 formulas");
      assign(b0, fiber.front());
    }
    for (std::uint32_t s = b0;; s = (s - 1) & b0) {
      if (!assigned[s]) assign(s, store.h_project(w.assignment[b0], subset_injection(s, b0)));
      if (s == 0) break;
    }
    std::uint32_t cur = b0;
    for (std::uint32_t rest = existing & ~b0; rest != 0; rest &= rest - 1) {
      std::uint32_t pi = 1u << std::countr_zero(rest);
      std::uint32_t nb = cur | pi;
      std::uint32_t c = nb & ~(1u << idx);
      FormulaId merged = merge(cur, nb, c);
      assign(nb, merged);
      for (std::uint32_t s = nb;; s = (s - 1) & nb) {
        if (!assigned[s]) assign(s, store.h_project(merged, subset_injection(s, nb)));
        if (s == 0) break;
      }
      cur = nb;
    }
  }
};

}  // namespace

FormulaId WeavingFamily::at(std::uint32_t mask) const {
  if (mask >= assignment.size()) throw Error("weaving: mask out of range");
  return assignment[mask];
}

int WeavingFamily::met_count() const {
  int out = 0;
  for (const WeavingObligation& ob : ledger) out += ob.met ? 1 : 0;
  return out;
}

std::string WeavingFamily::ledger_text() const {
  std::ostringstream out;
  for (const WeavingObligation& ob : ledger) out << weaving_line(ob) << "\n";
  for (const std::string& n : notes) out << "note: " << n << "\n";
  return out.str();
}

WeavingFamily build_weaving(const ScottProcess& p, int index_budget, long long effort) {
  if (p.rows.empty()) throw Error("weaving: process has no rows");
  if (index_budget < 0 || index_budget > 16)
    throw Error("weaving: index budget must be between 0 and 16");
  const Level& top = p.row(p.last_level());
  if (top.max_width() < index_budget)
    throw Error("weaving: index budget " + std::to_string(index_budget) +
                " needs top-row widths up to " + std::to_string(index_budget) +
                ", computed only to " + std::to_string(top.max_width()));
  AmalgamationCheck chk = is_amalgamative(*p.store, top, p.truncated_width);
  if (!chk.amalgamative)
    throw Error("weaving: the top level does not amalgamate: " +
                chk.witness->describe(*p.store));
  WeaveBuilder b(p, index_budget, effort);
  b.assign(0, unique_sentence(p, p.last_level()));
  for (int idx = 0; idx < index_budget; ++idx) b.add_index(idx);
  int met = b.w.met_count();
  b.w.notes.push_back("fiber demands met " + std::to_string(met) + "/" +
                      std::to_string(b.w.ledger.size()) + " within " +
                      std::to_string(index_budget) + " indices");
  if (top.has_width(index_budget + 1))
    b.w.notes.push_back("width-" + std::to_string(index_budget) +
                        " fibers are outside the index budget and spawn no demands");
  return std::move(b.w);
}

bool WeavingReport::ok() const { return widths_ok && membership_ok && projections_ok; }

std::string WeavingReport::str() const {
  std::ostringstream out;
  out << (widths_ok ? "PASS" : "FAIL") << " widths\n";
  out << (membership_ok ? "PASS" : "FAIL") << " membership\n";
  out << (projections_ok ? "PASS" : "FAIL") << " projections\n";
  out << (extension_ok ? "PASS" : "PEND") << " extension demands (" << obligations_met
      << " met, " << obligations_pending << " pending)\n";
  out << (ledger_ok ? "PASS" : "FAIL") << " ledger recheck\n";
  out << (cover_ok ? "PASS" : "PEND") << " top-row coverage\n";
  out << (semantics_ok ? "PASS" : "FAIL") << " realized atomic diagrams\n";
  for (const std::string& f : failures) out << "counterexample: " << f << "\n";
  for (const std::string& l : lines) out << l << "\n";
  return out.str();
}

WeavingReport verify_weaving(const WeavingFamily& w, const ScottProcess& p) {
  WeavingReport rep;
  if (!w.store || p.store != w.store) throw Error("verify_weaving: store mismatch");
  FormulaStore& store = *w.store;
  const Level& top = p.row(p.last_level());
  int K = w.index_budget;
  std::uint32_t full = K >= 32 ? 0xffffffffu : ((1u << K) - 1u);

  auto fail = [&rep](bool& flag, const std::string& msg) {
    flag = false;
    if (rep.failures.size() < 20) rep.failures.push_back(msg);
  };

  for (std::uint32_t a = 0; a <= full; ++a) {
    FormulaId phi = w.at(a);
    if (phi == kNoFormula) {
      fail(rep.widths_ok, "no assignment at " + mask_str(a));
      continue;
    }
    if (store.width(phi) != std::popcount(a))
      fail(rep.widths_ok, "width of " + id_str(phi) + " at " + mask_str(a));
    int n = store.width(phi);
    if (!top.has_width(n) || !top.contains(n, phi))
      fail(rep.membership_ok, id_str(phi) + " at " + mask_str(a) + " is not in the top row");
    if (a == 0 && full == 0) break;
  }

  for (std::uint32_t b = 0; b <= full; ++b) {
    for (std::uint32_t a = b;; a = (a - 1) & b) {
      if (store.h_project(w.at(b), subset_injection(a, b)) != w.at(a))
        fail(rep.projections_ok,
             "H(phi_" + mask_str(b) + ", j_{" + mask_str(a) + "," + mask_str(b) + "}) != phi_" +
                 mask_str(a));
      if (a == 0) break;
    }
    if (b == full) break;
  }

  // strong extension demands inside the index set, independent of the ledger
  for (std::uint32_t a = 0; a <= full; ++a) {
    if (std::popcount(a) >= K) {
      if (a == full) break;
      continue;
    }
    for (FormulaId psi : fiber_over(store, top, w.at(a))) {
      bool met = false;
      for (int beta = 0; beta < K && !met; ++beta) {
        if (a & (1u << beta)) continue;
        std::uint32_t b = a | (1u << beta);
        if (store.h_project(w.at(b), subset_extension(a, b)) == psi) met = true;
      }
      if (met)
        ++rep.obligations_met;
      else
        ++rep.obligations_pending;
    }
    if (a == full) break;
  }
  rep.extension_ok = rep.obligations_pending == 0;

  for (const WeavingObligation& ob : w.ledger) {
    bool met = false;
    for (int beta = 0; beta < K && !met; ++beta) {
      if (ob.a & (1u << beta)) continue;
      std::uint32_t b = ob.a | (1u << beta);
      if (store.h_project(w.at(b), subset_extension(ob.a, b)) == ob.psi) met = true;
    }
    if (met != ob.met)
      fail(rep.ledger_ok, "ledger entry disagrees with recheck: " + weaving_line(ob));
    if (ob.met) {
      int y = -1;
      if (store.h_project(w.at(ob.witness_b), subset_extension(ob.a, ob.witness_b, &y)) !=
              ob.psi ||
          y != ob.witness_y)
        fail(rep.ledger_ok, "recorded witness fails: " + weaving_line(ob));
    }
  }

  for (int width = 0; width <= std::min(K, top.max_width()); ++width) {
    for (FormulaId psi : top.at(width)) {
      bool reached = false;
      for (std::uint32_t a = 0; a <= full && !reached; ++a) {
        if (std::popcount(a) != width) {
          if (a == full) break;
          continue;
        }
        for (const Injection& j : all_permutations(width))
          if (store.h_project(w.at(a), j) == psi) {
            reached = true;
            break;
          }
        if (a == full) break;
      }
      if (!reached) {
        rep.cover_ok = false;
        if (rep.failures.size() < 20)
          rep.failures.push_back("top formula " + id_str(psi) + " of width " +
                                 std::to_string(width) + " is not H-reached");
      }
    }
  }

  // realized prefix: atomic diagrams must match exactly
  MultiplicityStructure realized = realize_weaving(w);
  for (std::uint32_t a = 0; a <= full; ++a) {
    AbstractTuple tuple;
    for (std::uint32_t rest = a; rest != 0; rest &= rest - 1)
      tuple.push_back(std::countr_zero(rest));
    const FormulaNode& base = store.node(store.v_project(w.at(a), LevelIndex::finite(0)));
    if (!(atomic_diagram(realized, tuple) == base.diagram))
      fail(rep.semantics_ok, "atomic diagram of " + mask_str(a) + " differs from phi_a");
    if (a == full) break;
  }

  // deeper levels of a re-analysis are reported for information; the
  // analyzer classifies every tuple only when its budget covers the
  // realized domain, so large index budgets skip this
  if (K <= 5 && p.rows.size() > 1) {
    int budget = std::max(1, K);
    ScottProcess rp = analyze(store, realized, {.budget = budget});
    for (int lvl = 1; lvl <= budget && lvl < static_cast<int>(p.rows.size()); ++lvl) {
      int match = 0, total = 0;
      for (std::uint32_t a = 0; a <= full; ++a) {
        AbstractTuple tuple;
        for (std::uint32_t rest = a; rest != 0; rest &= rest - 1)
          tuple.push_back(std::countr_zero(rest));
        ++total;
        if (rp.tuple_type(lvl, tuple) ==
            store.v_project(w.at(a), LevelIndex::finite(static_cast<std::uint32_t>(lvl))))
          ++match;
        if (a == full) break;
      }
      rep.lines.push_back("realized prefix level " + std::to_string(lvl) + ": " +
                          std::to_string(match) + "/" + std::to_string(total) +
                          " tuple types match the assignments");
    }
  }
  return rep;
}

MultiplicityStructure realize_weaving(const WeavingFamily& w) {
  if (!w.store || w.assignment.empty()) throw Error("realize: empty weaving");
  std::uint32_t full = static_cast<std::uint32_t>(w.assignment.size()) - 1u;
  return realize_formula(*w.store, w.assignment[full], {});
}

}  // namespace scott
