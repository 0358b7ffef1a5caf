#include "scott/analyze.hpp"

#include <algorithm>
#include <random>

namespace scott {

namespace {

bool can_extend(const MultiplicityStructure& s, const AbstractTuple& t, int cls) {
  const Multiplicity& m = s.class_mult[static_cast<std::size_t>(cls)];
  if (m.omega) return true;
  long long used = std::count(t.begin(), t.end(), cls);
  return used < m.value;
}

}  // namespace

// Scans row sizes for the least level from which no width refines any
// further. Works for both cell layouts; coverage is read off the rows.
RankReport scan_rank_evidence(const ScottProcess& p) {
  RankReport r;
  if (p.rows.empty()) {
    r.budget_exhausted = true;
    return r;
  }
  int w0 = p.rows[0].max_width();
  int max_top = 0;
  for (int n = 0; n <= w0; ++n) {
    RankReport::WidthEvidence ev;
    ev.width = n;
    int top = 0;
    for (std::size_t a = 0; a < p.rows.size(); ++a)
      if (p.rows[a].has_width(n)) top = static_cast<int>(a);
    ev.top_level = top;
    max_top = std::max(max_top, top);
    int sf = top;
    while (sf >= 1 && p.rows[static_cast<std::size_t>(sf)].at(n).size() ==
                          p.rows[static_cast<std::size_t>(sf - 1)].at(n).size())
      --sf;
    ev.stable_from = sf;
    ev.witnessed = sf < top;
    r.evidence.push_back(ev);
  }

  for (int lam = 0; lam <= max_top; ++lam) {
    bool any = false, ok = true;
    for (const auto& ev : r.evidence) {
      if (ev.top_level < lam + 1) continue;
      any = true;
      if (ev.stable_from > lam) ok = false;
    }
    if (!any) break;
    if (!ok) continue;
    r.rank = static_cast<std::uint32_t>(lam);
    int cert = -1;
    for (const auto& ev : r.evidence) {
      if (ev.width == cert + 1 && ev.top_level >= lam + 1) cert = ev.width;
    }
    r.certified_width = cert;
    break;
  }
  r.budget_exhausted = !r.rank.has_value();
  r.exact = r.rank.has_value() && p.truncated_width.has_value() &&
            *p.truncated_width <= r.certified_width;
  return r;
}

ScottProcess analyze(FormulaStore& store, const MultiplicityStructure& s,
                     const AnalyzeOptions& opts) {
  if (opts.budget < 0) throw Error("budget must be nonnegative");
  const int budget = opts.budget;
  const bool rectangle = s.is_finite() && s.domain_size() <= budget;
  const int width_cap = rectangle ? static_cast<int>(s.domain_size()) : budget;
  auto max_width_at = [&](int level) { return rectangle ? width_cap : budget - level; };

  std::vector<std::vector<AbstractTuple>> tuples(static_cast<std::size_t>(width_cap) + 1);
  for (int n = 0; n <= width_cap; ++n) tuples[static_cast<std::size_t>(n)] = enumerate_tuples(s, n);

  std::mt19937_64 rng(opts.shuffle_seed);
  if (opts.schedule == Schedule::Reversed)
    for (auto& v : tuples) std::reverse(v.begin(), v.end());
  else if (opts.schedule == Schedule::Shuffled)
    for (auto& v : tuples) std::shuffle(v.begin(), v.end(), rng);

  auto width_order = [&](int level) {
    std::vector<int> ws(static_cast<std::size_t>(max_width_at(level)) + 1);
    for (std::size_t i = 0; i < ws.size(); ++i) ws[i] = static_cast<int>(i);
    if (opts.schedule == Schedule::Reversed)
      std::reverse(ws.begin(), ws.end());
    else if (opts.schedule == Schedule::Shuffled)
      std::shuffle(ws.begin(), ws.end(), rng);
    return ws;
  };

  ScottProcess p;
  p.store = &store;
  p.budget = budget;
  p.structure_derived = true;
  if (s.is_finite()) p.truncated_width = s.domain_size();
  p.rows.resize(static_cast<std::size_t>(budget) + 1);
  p.tuple_maps.resize(static_cast<std::size_t>(budget) + 1);

  p.rows[0].by_width.resize(static_cast<std::size_t>(max_width_at(0)) + 1);
  for (int n : width_order(0)) {
    for (const auto& t : tuples[static_cast<std::size_t>(n)]) {
      FormulaId id = store.intern_level0(atomic_diagram(s, t));
      p.tuple_maps[0][t] = id;
      p.rows[0].insert(n, id);
    }
  }

  for (int a = 1; a <= budget; ++a) {
    auto& row = p.rows[static_cast<std::size_t>(a)];
    row.by_width.resize(static_cast<std::size_t>(max_width_at(a)) + 1);
    const auto& below = p.tuple_maps[static_cast<std::size_t>(a - 1)];
    for (int n : width_order(a)) {
      for (const auto& t : tuples[static_cast<std::size_t>(n)]) {
        FormulaId parent = below.at(t);
        std::vector<FormulaId> children;
        AbstractTuple ext = t;
        ext.push_back(0);
        for (std::size_t c = 0; c < s.class_names.size(); ++c) {
          if (!can_extend(s, t, static_cast<int>(c))) continue;
          ext.back() = static_cast<int>(c);
          children.push_back(below.at(ext));
        }
        FormulaId id = store.intern_successor(parent, children);
        p.tuple_maps[static_cast<std::size_t>(a)][t] = id;
        row.insert(n, id);
      }
    }
  }

  RankReport scan = scan_rank_evidence(p);
  if (scan.rank) p.stabilized = Stabilization{static_cast<int>(*scan.rank), scan.certified_width};
  p.budget_exhausted = scan.budget_exhausted;
  return p;
}

ScottProcess analyze_to_stabilization(FormulaStore& store, const MultiplicityStructure& s,
                                      int initial_budget, int budget_cap) {
  if (initial_budget < 1 || budget_cap < initial_budget) throw Error("bad budget range");
  AnalyzeOptions opts;
  opts.budget = initial_budget;
  ScottProcess p = analyze(store, s, opts);
  while (!p.stabilized && opts.budget < budget_cap) {
    opts.budget = std::min(budget_cap, opts.budget * 2);
    p = analyze(store, s, opts);
  }
  return p;
}

RankReport rank_of_structure(const ScottProcess& p) {
  if (!p.structure_derived) throw Error("rank evidence requires an analyzer-produced process");
  return scan_rank_evidence(p);
}

std::string RankReport::summary() const {
  if (!rank) return "rank undetermined: refinement still moving at the computed horizon";
  std::string out = "rank " + std::to_string(*rank);
  if (exact)
    out += " (exact)";
  else
    out += " (certified for widths <= " + std::to_string(certified_width) +
           "; wider behaviour beyond budget)";
  return out;
}

}  // namespace scott
