#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "scott/analyze.hpp"
#include "scott/ef_oracle.hpp"
#include "scott/encode.hpp"
#include "scott/model_builder.hpp"
#include "scott/process_kit.hpp"

namespace {

using namespace scott;

constexpr int kUsageError = 2;
constexpr int kSemanticError = 1;

// Input that cannot be read or parsed is a usage problem (exit 2), as
// opposed to semantic failures discovered on well-formed input (exit 1).
struct UsageError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool looks_like_dump(const std::string& text) {
  return text.rfind("scottdump ", 0) == 0;
}

MultiplicityStructure parse_structure(const std::string& text) {
  try {
    return load_structure(text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

// A process plus the store it lives in; structure inputs are analyzed,
// dump inputs are decoded.
struct Loaded {
  std::unique_ptr<FormulaStore> store;
  ScottProcess process;
  bool from_dump = false;
};

Loaded load_process(const std::string& path, const AnalyzeOptions& opts) {
  std::string text = read_file(path);
  Loaded out;
  if (looks_like_dump(text)) {
    try {
      out.store = std::make_unique<FormulaStore>(dump_vocabulary(text));
      out.process = decode_process(*out.store, text);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    out.from_dump = true;
  } else {
    MultiplicityStructure s = parse_structure(text);
    out.store = std::make_unique<FormulaStore>(s.vocab);
    out.process = analyze(*out.store, s, opts);
  }
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write " + out_path);
  out << text;
}

// Canonical in-row reference, stable across interning orders.
std::string ordinal(FormulaStore& store, const Level& row, FormulaId id) {
  int w = store.width(id);
  std::vector<FormulaId> cell = row.at(w);
  std::sort(cell.begin(), cell.end(),
            [&](FormulaId a, FormulaId b) { return store.compare(a, b) < 0; });
  auto it = std::find(cell.begin(), cell.end(), id);
  if (it == cell.end()) throw Error("formula is not in the row");
  return "w" + std::to_string(w) + "#" + std::to_string(it - cell.begin());
}

std::vector<FormulaId> sorted_cell(FormulaStore& store, const Level& row, int w) {
  std::vector<FormulaId> cell = row.at(w);
  std::sort(cell.begin(), cell.end(),
            [&](FormulaId a, FormulaId b) { return store.compare(a, b) < 0; });
  return cell;
}

std::string row_sizes(const Level& row) {
  std::string out;
  for (int w = 0; w <= row.max_width(); ++w) {
    if (!out.empty()) out += " ";
    out += std::to_string(row.at(w).size());
  }
  return out;
}

std::string process_summary(const ScottProcess& p) {
  std::ostringstream out;
  if (p.truncated_width) out << "truncated: width " << *p.truncated_width << "\n";
  if (p.stabilized)
    out << "stabilized: level " << p.stabilized->level << " width " << p.stabilized->width
        << "\n";
  if (p.budget_exhausted) out << "budget exhausted: yes\n";
  for (LevelIndex a : p.level_indices())
    out << "level " << a.str() << ": " << row_sizes(p.row(a)) << "\n";
  return out.str();
}

std::string rank_phrase(const RankReport& r) {
  if (!r.rank) return "unresolved at this budget";
  std::string out = "rank: " + std::to_string(*r.rank);
  if (r.exact)
    out += " (exact)";
  else
    out += " (exact within width " + std::to_string(r.certified_width + 1) + ")";
  return out;
}

// Deepest finite level whose row reaches the requested width; threads and
// weavings build over that prefix.
int prefix_levels_for_width(const ScottProcess& p, int width) {
  for (int lvl = static_cast<int>(p.rows.size()) - 1; lvl >= 0; --lvl)
    if (p.rows[static_cast<std::size_t>(lvl)].max_width() >= width) return lvl + 1;
  return 0;
}

struct CommonFlags {
  std::string input;
  std::string sub_input;
  int budget = 6;
  int width = -1;
  int elements = 6;
  int index_budget = 4;
  std::string out_path;
  std::string format = "text";
  std::string schedule = "forward";

  AnalyzeOptions analyze_options() const {
    AnalyzeOptions opts;
    opts.budget = budget;
    if (schedule == "forward")
      opts.schedule = Schedule::Forward;
    else if (schedule == "reversed")
      opts.schedule = Schedule::Reversed;
    else if (schedule == "shuffled")
      opts.schedule = Schedule::Shuffled;
    else
      throw Error("unknown schedule " + schedule);
    return opts;
  }
};

std::string header(const std::string& command, const CommonFlags& f,
                   bool with_elements = false, bool with_index = false) {
  std::ostringstream out;
  out << "scottkit " << command << "\n";
  out << "input: " << f.input << "\n";
  if (!f.sub_input.empty()) out << "replacement: " << f.sub_input << "\n";
  out << "budget: " << f.budget << "\n";
  if (with_elements) out << "elements: " << f.elements << "\n";
  if (with_index) out << "index budget: " << f.index_budget << "\n";
  return out.str();
}

int cmd_analyze(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  if (f.format == "dump") {
    emit(encode_process(l.process), f.out_path);
    return 0;
  }
  std::ostringstream out;
  out << header("analyze", f);
  out << process_summary(l.process);
  emit(out.str(), f.out_path);
  return 0;
}

int cmd_rank(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  RankReport r =
      l.from_dump ? scan_rank_evidence(l.process) : rank_of_structure(l.process);
  std::ostringstream out;
  out << header("rank", f);
  out << rank_phrase(r) << "\n";
  if (r.prerank)
    out << "certificate bound: " << r.prerank->bound << " (level " << r.prerank->level
        << ", width " << r.prerank->width << ")\n";
  emit(out.str(), f.out_path);
  return r.rank ? 0 : kSemanticError;
}

int cmd_iso(const CommonFlags& f) {
  MultiplicityStructure a = parse_structure(read_file(f.input));
  MultiplicityStructure b = parse_structure(read_file(f.sub_input));
  bool same = iso_check(a, b);
  std::ostringstream out;
  out << "scottkit iso\n";
  out << "left: " << f.input << "\n";
  out << "right: " << f.sub_input << "\n";
  out << (same ? "isomorphic" : "not isomorphic") << "\n";
  emit(out.str(), f.out_path);
  return same ? 0 : kSemanticError;
}

int cmd_validate(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  ValidationReport rep = validate_process(l.process);
  std::ostringstream out;
  out << header("validate", f);
  out << rep.str();
  emit(out.str(), f.out_path);
  return rep.ok() ? 0 : kSemanticError;
}

int cmd_complete(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  CompletionResult res = extend_by_completion(l.process);
  if (!res.ok()) {
    std::ostringstream out;
    out << header("complete", f);
    out << "not amalgamative\n";
    out << "counterexample: " << res.witness->describe(*l.store) << "\n";
    emit(out.str(), f.out_path);
    return kSemanticError;
  }
  if (f.format == "dump") {
    emit(encode_process(*res.process), f.out_path);
    return 0;
  }
  std::ostringstream out;
  out << header("complete", f);
  out << "completed level " << res.process->last_level().str() << ": "
      << row_sizes(res.process->row(res.process->last_level())) << "\n";
  emit(out.str(), f.out_path);
  return 0;
}

int cmd_amalgamate(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  const Level& top = l.process.row(l.process.last_level());
  AmalgamationCheck chk = is_amalgamative(*l.store, top, l.process.truncated_width);
  std::ostringstream out;
  out << header("amalgamate", f);
  if (chk.amalgamative) {
    if (chk.checked_up_to_width < 0)
      out << "amalgamative: yes (top row too narrow to test, vacuous)\n";
    else
      out << "amalgamative: yes (checked to width " << chk.checked_up_to_width << ")\n";
    emit(out.str(), f.out_path);
    return 0;
  }
  out << "amalgamative: no\n";
  out << "counterexample: " << chk.witness->describe(*l.store) << "\n";
  emit(out.str(), f.out_path);
  return kSemanticError;
}

int cmd_fset(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  const ScottProcess& p = l.process;
  LevelIndex delta = p.last_level();
  if (delta.is_finite() && delta.k == 0)
    throw Error("fset needs a process with at least two levels");
  LevelIndex alpha = delta.prev();
  int w = f.width >= 0 ? f.width : 1;
  const Level& top = p.row(delta);
  if (w > top.max_width()) throw Error("top row has no width " + std::to_string(w));
  std::ostringstream out;
  out << header("fset", f);
  out << "width: " << w << "\n";
  for (FormulaId phi : sorted_cell(*l.store, top, w)) {
    std::vector<FormulaId> members = f_set(p, phi, alpha, 1);
    std::sort(members.begin(), members.end(), [&](FormulaId a, FormulaId b) {
      return l.store->compare(a, b) < 0;
    });
    out << "fset " << ordinal(*l.store, top, phi) << " at level " << alpha.str() << ":";
    for (FormulaId m : members) out << " " << ordinal(*l.store, p.row(alpha), m);
    out << "\n";
  }
  emit(out.str(), f.out_path);
  return 0;
}

int cmd_limit_extend(const CommonFlags& f) {
  std::string text = read_file(f.input);
  if (looks_like_dump(text)) throw UsageError("limit-extend expects a structure file");
  MultiplicityStructure s = parse_structure(text);
  auto store = std::make_unique<FormulaStore>(s.vocab);
  ScottProcess p = analyze_to_stabilization(*store, s, f.budget);
  if (!p.stabilized) {
    std::ostringstream out;
    out << header("limit-extend", f);
    out << "does not stabilize within the budget cap\n";
    emit(out.str(), f.out_path);
    return kSemanticError;
  }
  Path rho = path_of(p, unique_sentence(p, p.last_level()));
  ScottProcess q = extend_at_limit(p, rho);
  if (f.format == "dump") {
    emit(encode_process(q), f.out_path);
    return 0;
  }
  std::ostringstream out;
  out << header("limit-extend", f);
  out << process_summary(q);
  emit(out.str(), f.out_path);
  return 0;
}

int cmd_build_model(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  int levels = prefix_levels_for_width(l.process, f.elements);
  if (levels == 0)
    throw Error("no computed row reaches width " + std::to_string(f.elements) +
                "; raise --budget or lower --elements");
  ScottProcess p = l.process.prefix(levels);
  Thread t = build_thread(p, f.elements);
  std::ostringstream out;
  out << header("build-model", f, /*with_elements=*/true);
  out << "thread level: " << p.last_level().str() << "\n";
  out << "thread width: " << t.width() << "\n";
  int om = 0, gm = 0;
  for (const ThreadObligation& ob : t.obligations) om += ob.met ? 1 : 0;
  for (const CompletionGoal& g : t.goals) gm += g.met ? 1 : 0;
  out << "obligations met: " << om << "/" << t.obligations.size() << "\n";
  out << "goals met: " << gm << "/" << t.goals.size() << "\n";
  out << serialize_structure(realize_model(t));
  emit(out.str(), f.out_path);
  return 0;
}

int cmd_build_pair(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  int levels = prefix_levels_for_width(l.process, f.elements);
  if (levels == 0)
    throw Error("no computed row reaches width " + std::to_string(f.elements) +
                "; raise --budget or lower --elements");
  ScottProcess p = l.process.prefix(levels);
  Level sub;
  if (f.sub_input.empty()) {
    sub = p.row(p.last_level());
  } else {
    std::string text = read_file(f.sub_input);
    if (!looks_like_dump(text)) throw Error("replacement input must be a dump");
    ScottProcess q = decode_process(*l.store, text);
    sub = q.row(q.last_level());
  }
  ModelPair mp = build_model_pair(p, sub, f.elements);
  std::ostringstream out;
  out << header("build-pair", f, /*with_elements=*/true);
  out << "outer width: " << mp.outer_thread.width() << "\n";
  out << "inner width: " << static_cast<int>(mp.inner_formulas.size()) - 1 << "\n";
  out << "chosen:";
  for (int y : mp.chosen) out << " " << y;
  out << "\n";
  int om = 0;
  for (const ThreadObligation& ob : mp.inner_obligations) om += ob.met ? 1 : 0;
  out << "inner obligations met: " << om << "/" << mp.inner_obligations.size() << "\n";
  out << "outer:\n" << serialize_structure(mp.outer);
  out << "inner:\n" << serialize_structure(mp.inner);
  emit(out.str(), f.out_path);
  return 0;
}

int cmd_weave(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  int levels = prefix_levels_for_width(l.process, f.index_budget);
  if (levels == 0)
    throw Error("no computed row reaches width " + std::to_string(f.index_budget) +
                "; raise --budget or lower --index-budget");
  ScottProcess p = l.process.prefix(levels);
  std::ostringstream out;
  out << header("weave", f, /*with_elements=*/false, /*with_index=*/true);
  out << "level: " << p.last_level().str() << "\n";
  WeavingFamily w;
  try {
    w = build_weaving(p, f.index_budget);
  } catch (const Error& e) {
    out << "rejected: " << e.what() << "\n";
    emit(out.str(), f.out_path);
    return kSemanticError;
  }
  out << "demands met: " << w.met_count() << "/" << w.ledger.size() << "\n";
  WeavingReport rep = verify_weaving(w, p);
  out << rep.str();
  out << serialize_structure(realize_weaving(w));
  emit(out.str(), f.out_path);
  return rep.ok() ? 0 : kSemanticError;
}

int cmd_render(const CommonFlags& f) {
  Loaded l = load_process(f.input, f.analyze_options());
  const Level& top = l.process.row(l.process.last_level());
  int w = f.width >= 0 ? f.width : std::min(2, top.max_width());
  if (w > top.max_width()) throw Error("top row has no width " + std::to_string(w));
  std::ostringstream out;
  out << header("render", f);
  out << "level: " << l.process.last_level().str() << "\n";
  for (FormulaId id : sorted_cell(*l.store, top, w))
    out << ordinal(*l.store, top, id) << ": " << l.store->render(id) << "\n";
  emit(out.str(), f.out_path);
  return 0;
}

int cmd_count_types(const std::string& vocab_path, int n, const std::string& out_path) {
  std::istringstream in(read_file(vocab_path));
  Vocabulary vocab;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (tok == "vocab") continue;
      if (tok[0] == '#') break;
      auto slash = tok.rfind('/');
      if (slash == std::string::npos) throw UsageError("expected NAME/ARITY, got " + tok);
      try {
        vocab.add(tok.substr(0, slash), std::stoi(tok.substr(slash + 1)));
      } catch (const Error& e) {
        throw UsageError(e.what());
      } catch (const std::exception&) {
        throw UsageError("bad arity in " + tok);
      }
    }
  }
  emit(std::to_string(count_atomic_types(vocab, n)) + "\n", out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scott analysis toolkit"};
  app.require_subcommand(1);

  CommonFlags f;
  std::string vocab_path;
  int count_n = 2;

  auto add_common = [&f](CLI::App* cmd, bool needs_input = true) {
    if (needs_input) cmd->add_option("input", f.input, "structure or dump file")->required();
    cmd->add_option("--budget", f.budget, "level/width budget");
    cmd->add_option("--out", f.out_path, "write output to this file");
    cmd->add_option("--format", f.format, "text or dump")
        ->check(CLI::IsMember({"text", "dump"}));
  };

  CLI::App* analyze_cmd = app.add_subcommand("analyze", "compute the formula sets");
  add_common(analyze_cmd);
  analyze_cmd->add_option("--schedule", f.schedule, "interning order")
      ->check(CLI::IsMember({"forward", "reversed", "shuffled"}));

  CLI::App* rank_cmd = app.add_subcommand("rank", "rank with certification bound");
  add_common(rank_cmd);

  CLI::App* iso_cmd = app.add_subcommand("iso", "isomorphism check");
  iso_cmd->add_option("left", f.input, "structure file")->required();
  iso_cmd->add_option("right", f.sub_input, "structure file")->required();
  iso_cmd->add_option("--out", f.out_path, "write output to this file");

  CLI::App* validate_cmd = app.add_subcommand("validate", "check the process conditions");
  add_common(validate_cmd);

  CLI::App* complete_cmd = app.add_subcommand("complete", "extend by the maximal completion");
  add_common(complete_cmd);

  CLI::App* amalg_cmd = app.add_subcommand("amalgamate", "check the last level amalgamates");
  add_common(amalg_cmd);

  CLI::App* fset_cmd = app.add_subcommand("fset", "extension-closure sets one level down");
  add_common(fset_cmd);
  fset_cmd->add_option("--width", f.width, "starting width (default 1)");

  CLI::App* limit_cmd = app.add_subcommand("limit-extend", "extend a stabilized analysis");
  add_common(limit_cmd);

  CLI::App* model_cmd = app.add_subcommand("build-model", "thread out a finite model");
  add_common(model_cmd);
  model_cmd->add_option("--elements", f.elements, "model size");

  CLI::App* pair_cmd = app.add_subcommand("build-pair", "model plus threaded submodel");
  add_common(pair_cmd);
  pair_cmd->add_option("replacement", f.sub_input, "dump whose last row replaces the top");
  pair_cmd->add_option("--elements", f.elements, "outer model size");

  CLI::App* weave_cmd = app.add_subcommand("weave", "build and verify a weaving family");
  add_common(weave_cmd);
  weave_cmd->add_option("--index-budget", f.index_budget, "number of indices");

  CLI::App* render_cmd = app.add_subcommand("render", "print top-row formulas");
  add_common(render_cmd);
  render_cmd->add_option("--width", f.width, "width to render");

  CLI::App* count_cmd = app.add_subcommand("count-types", "number of atomic types");
  count_cmd->add_option("--vocab", vocab_path, "vocabulary file")->required();
  count_cmd->add_option("--n", count_n, "tuple width")->required();
  count_cmd->add_option("--out", f.out_path, "write output to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(f);
    if (*rank_cmd) return cmd_rank(f);
    if (*iso_cmd) return cmd_iso(f);
    if (*validate_cmd) return cmd_validate(f);
    if (*complete_cmd) return cmd_complete(f);
    if (*amalg_cmd) return cmd_amalgamate(f);
    if (*fset_cmd) return cmd_fset(f);
    if (*limit_cmd) return cmd_limit_extend(f);
    if (*model_cmd) return cmd_build_model(f);
    if (*pair_cmd) return cmd_build_pair(f);
    if (*weave_cmd) return cmd_weave(f);
    if (*render_cmd) return cmd_render(f);
    if (*count_cmd) return cmd_count_types(vocab_path, count_n, f.out_path);
  } catch (const UsageError& e) {
    std::cerr << "scottkit: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "scottkit: " << e.what() << "\n";
    return kSemanticError;
  }
  return kUsageError;
}
