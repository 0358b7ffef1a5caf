#include "scott/process.hpp"

#include <algorithm>

namespace scott {

const std::vector<FormulaId>& Level::at(int n) const {
  if (!has_width(n)) throw Error("level has no width " + std::to_string(n));
  return by_width[static_cast<std::size_t>(n)];
}

bool Level::contains(int n, FormulaId id) const {
  if (!has_width(n)) return false;
  const auto& v = by_width[static_cast<std::size_t>(n)];
  return std::binary_search(v.begin(), v.end(), id);
}

void Level::insert(int n, FormulaId id) {
  if (n < 0) throw Error("negative width");
  if (n >= static_cast<int>(by_width.size())) by_width.resize(static_cast<std::size_t>(n) + 1);
  auto& v = by_width[static_cast<std::size_t>(n)];
  auto it = std::lower_bound(v.begin(), v.end(), id);
  if (it == v.end() || *it != id) v.insert(it, id);
}

std::size_t Level::total() const {
  std::size_t s = 0;
  for (const auto& v : by_width) s += v.size();
  return s;
}

std::vector<LevelIndex> ScottProcess::level_indices() const {
  std::vector<LevelIndex> out;
  for (std::size_t i = 0; i < rows.size(); ++i) out.push_back(LevelIndex::finite(static_cast<std::uint32_t>(i)));
  for (std::size_t i = 0; i < limit_rows.size(); ++i) out.push_back(LevelIndex::omega_plus(static_cast<std::uint32_t>(i)));
  return out;
}

bool ScottProcess::has_row(LevelIndex li) const {
  if (li.is_finite()) return li.k < rows.size();
  return li.k < limit_rows.size();
}

const Level& ScottProcess::row(LevelIndex li) const {
  if (!has_row(li)) throw Error("process has no level " + li.str());
  return li.is_finite() ? rows[li.k] : limit_rows[li.k];
}

Level& ScottProcess::row(LevelIndex li) {
  if (!has_row(li)) throw Error("process has no level " + li.str());
  return li.is_finite() ? rows[li.k] : limit_rows[li.k];
}

LevelIndex ScottProcess::last_level() const {
  if (!limit_rows.empty()) return LevelIndex::omega_plus(static_cast<std::uint32_t>(limit_rows.size() - 1));
  if (rows.empty()) throw Error("empty process");
  return LevelIndex::finite(static_cast<std::uint32_t>(rows.size() - 1));
}

FormulaId ScottProcess::tuple_type(int level, const AbstractTuple& t) const {
  if (level < 0 || level >= static_cast<int>(tuple_maps.size()))
    throw Error("no tuple map at level " + std::to_string(level));
  const auto& m = tuple_maps[static_cast<std::size_t>(level)];
  auto it = m.find(t);
  if (it == m.end()) throw Error("tuple not classified at level " + std::to_string(level));
  return it->second;
}

ScottProcess ScottProcess::prefix(int levels) const {
  if (levels < 1 || levels > static_cast<int>(rows.size()))
    throw Error("prefix length out of range");
  ScottProcess p;
  p.store = store;
  p.rows.assign(rows.begin(), rows.begin() + levels);
  p.budget = levels - 1;
  p.truncated_width = truncated_width;
  p.structure_derived = structure_derived;
  if (levels <= static_cast<int>(tuple_maps.size()))
    p.tuple_maps.assign(tuple_maps.begin(), tuple_maps.begin() + levels);
  if (stabilized && stabilized->level < levels - 1) p.stabilized = stabilized;
  return p;
}

ScottProcess ScottProcess::with_last_row(Level replacement) const {
  ScottProcess p;
  p.store = store;
  p.rows = rows;
  p.limit_rows = limit_rows;
  p.budget = budget;
  p.truncated_width = truncated_width;
  if (!p.limit_rows.empty())
    p.limit_rows.back() = std::move(replacement);
  else if (!p.rows.empty())
    p.rows.back() = std::move(replacement);
  else
    throw Error("empty process");
  return p;
}

void ScottProcess::append_row(Level r) {
  if (!limit_rows.empty())
    limit_rows.push_back(std::move(r));
  else
    rows.push_back(std::move(r));
}

}  // namespace scott
