#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const char* bin = std::getenv("SCOTTKIT_BIN");
  // ctest exports the variable; direct runs find the tool next to the tests
  std::string cmd = std::string(bin ? bin : "./scottkit") + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

bool has_line(const std::string& text, const std::string& line) {
  return ("\n" + text).find("\n" + line + "\n") != std::string::npos;
}

// fixture files, written once
const fs::path& dir() {
  static const fs::path d = [] {
    fs::path p = fs::temp_directory_path() / "scottkit_cli_fixtures";
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string fixture(const std::string& name, const std::string& text) {
  fs::path p = dir() / name;
  std::ofstream out(p);
  out << text;
  return p.string();
}

const std::string& g_struct() {
  static const std::string p = fixture("g.struct",
                                       "vocab R/2\n"
                                       "class a mult omega\nclass b mult omega\n"
                                       "elem a0 class a\nelem a1 class a\n"
                                       "elem b0 class b\nelem b1 class b\n"
                                       "fact R b0 b1\nfact R b1 b0\n");
  return p;
}

const std::string& clique_struct() {
  static const std::string p = fixture("clique.struct",
                                       "vocab R/2\n"
                                       "class k mult omega\n"
                                       "elem k0 class k\nelem k1 class k\n"
                                       "fact R k0 k1\nfact R k1 k0\n"
                                       "fact R k0 k0\nfact R k1 k1\n");
  return p;
}

const std::string& edge_struct() {
  static const std::string p = fixture("edge.struct",
                                       "vocab R/2\n"
                                       "class u mult 1\nclass v mult 1\n"
                                       "elem u class u\nelem v class v\n"
                                       "fact R u v\n");
  return p;
}

}  // namespace

TEST_CASE("rank reports the certified level and width") {
  RunResult r = run_cli("rank " + g_struct() + " --budget 4");
  CHECK(r.code == 0);
  CHECK_MESSAGE(has_line(r.out, "rank: 1 (exact within width 3)"), r.out);
}

TEST_CASE("count-types walks the powers of two") {
  std::string vocab = fixture("ex.vocab", "vocab S/0\nvocab R/2\n");
  CHECK(run_cli("count-types --vocab " + vocab + " --n 1").out == "4\n");
  CHECK(run_cli("count-types --vocab " + vocab + " --n 2").out == "32\n");
  RunResult r = run_cli("count-types --vocab " + vocab + " --n 3");
  CHECK(r.code == 0);
  CHECK(r.out == "1024\n");
  // bare NAME/ARITY tokens work too
  std::string bare = fixture("bare.vocab", "R/2 # a binary relation\n");
  CHECK(run_cli("count-types --vocab " + bare + " --n 1").out == "2\n");
}

TEST_CASE("iso distinguishes relabelings from genuine differences") {
  std::string relabeled = fixture("edge_relabeled.struct",
                                  "vocab R/2\n"
                                  "class p mult 1\nclass q mult 1\n"
                                  "elem p class p\nelem q class q\n"
                                  "fact R q p\n");
  std::string loop = fixture("loop.struct",
                             "vocab R/2\n"
                             "class u mult 1\nclass v mult 1\n"
                             "elem u class u\nelem v class v\n"
                             "fact R u u\n");
  RunResult same = run_cli("iso " + edge_struct() + " " + relabeled);
  CHECK(same.code == 0);
  CHECK(has_line(same.out, "isomorphic"));
  RunResult diff = run_cli("iso " + edge_struct() + " " + loop);
  CHECK(diff.code == 1);
  CHECK(has_line(diff.out, "not isomorphic"));
}

TEST_CASE("validate passes the analyzed blow-up") {
  RunResult r = run_cli("validate " + g_struct());
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS 1a") != std::string::npos);
  CHECK(r.out.find("PASS 2c") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("dumps are identical whatever the schedule") {
  std::string base = "analyze " + g_struct() + " --budget 4 --format dump";
  RunResult fwd = run_cli(base);
  RunResult rev = run_cli(base + " --schedule reversed");
  RunResult shuf = run_cli(base + " --schedule shuffled");
  CHECK(fwd.code == 0);
  CHECK(fwd.out.rfind("scottdump 1\n", 0) == 0);
  CHECK(fwd.out == rev.out);
  CHECK(fwd.out == shuf.out);
}

TEST_CASE("--out writes the report to a file") {
  fs::path target = dir() / "g.dump";
  std::error_code ec;
  fs::remove(target, ec);
  RunResult r = run_cli("analyze " + g_struct() + " --budget 4 --format dump --out " +
                        target.string());
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(target);
  REQUIRE(in.good());
  std::string first;
  std::getline(in, first);
  CHECK(first == "scottdump 1");
}

TEST_CASE("dumps round-trip through the analyze and rank commands") {
  fs::path dump = dir() / "roundtrip.dump";
  RunResult w = run_cli("analyze " + g_struct() + " --budget 4 --format dump --out " +
                        dump.string());
  REQUIRE(w.code == 0);
  RunResult r = run_cli("rank " + dump.string());
  CHECK(r.code == 0);
  CHECK_MESSAGE(has_line(r.out, "rank: 1 (exact within width 3)"), r.out);
}

TEST_CASE("weave reports its demands and the realized prefix") {
  RunResult r = run_cli("weave " + clique_struct() + " --index-budget 3 --budget 5");
  CHECK(r.code == 0);
  CHECK(r.out.find("demands met: ") != std::string::npos);
  CHECK(r.out.find("fact R e0 e1") != std::string::npos);
}

TEST_CASE("build-model rebuilds a finite structure") {
  RunResult r = run_cli("build-model " + edge_struct() + " --elements 2 --budget 3");
  CHECK(r.code == 0);
  CHECK(has_line(r.out, "thread width: 2"));
  CHECK(r.out.find("elem e0 class e0") != std::string::npos);
  CHECK(r.out.find("fact R e0 e1") != std::string::npos);
}

TEST_CASE("render prints the infinitary syntax of the top row") {
  RunResult r = run_cli("render " + edge_struct() + " --budget 3 --width 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("R(x0,x1)") != std::string::npos);
}

TEST_CASE("usage problems exit with 2, semantic refusals with 1") {
  CHECK(run_cli("rank " + dir().string() + "/no_such_file.struct").code == 2);
  CHECK(run_cli("no-such-command").code == 2);
  CHECK(run_cli("rank").code == 2);
  std::string bad = fixture("bad.struct", "vocab R/2\nclass a mult 0\n");
  CHECK(run_cli("rank " + bad).code == 2);
  std::string twin_broken = fixture("twin.struct",
                                    "vocab R/2\n"
                                    "class a mult omega\n"
                                    "elem a0 class a\nelem a1 class a\n"
                                    "fact R a0 a1\n");
  CHECK(run_cli("validate " + twin_broken).code == 2);
}
