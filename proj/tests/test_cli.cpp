#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "memviz/cli.hpp"

namespace fs = std::filesystem;
using memviz::cli::run;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("memviz_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string &name) const {
    return (path / name).string();
  }
  static int &counter() {
    static int c = 0;
    return c;
  }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "memviz");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string &path, const std::string &text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("gen walk3d then array3d scene") {
  TempDir dir;
  auto g = invoke({"gen", "walk3d", "--dims", "2,2,2", "--elem", "8", "-o",
                   dir / "t.txt"});
  REQUIRE(g.code == 0);
  auto s = invoke({"scene", dir / "t.txt", "--kind", "array3d", "--var", "V",
                   "--layout", "2x2x2x8", "-o", dir / "s.json"});
  REQUIRE(s.code == 0);
  auto j = nlohmann::json::parse(slurp(dir / "s.json"));
  CHECK(j["points"].size() == 8);
  CHECK(j["kind"] == "array3d");
  CHECK(j["source"] == dir / "t.txt");
}

TEST_CASE("usage errors exit 1") {
  TempDir dir;
  auto r = invoke({"frobnicate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"gen", "bmm", "--n", "4", "-o", dir / "x"}).code == 1);
  CHECK(invoke({"gen", "bmm", "--n", "4", "--block", "3", "-o", dir / "x"})
            .code == 1);
  CHECK(invoke({"gen", "walk3d", "--dims", "2,2", "-o", dir / "x"}).code == 1);
  CHECK(invoke({"gen", "random", "--seed", "1", "--events", "0", "-o",
                dir / "x"})
            .code == 1);
  CHECK(invoke({"scene", dir / "missing.txt", "--kind", "array2d", "-o",
                dir / "s.json"})
            .code == 1);
  CHECK(invoke({"scene", dir / "missing.txt", "--kind", "array2d", "--var",
                "B", "--layout", "2x2x2x8", "-o", dir / "s.json"})
            .code == 1);
  CHECK(invoke({"scene", dir / "missing.txt", "--kind", "cube", "-o",
                dir / "s.json"})
            .code == 1);
  CHECK(invoke({"parse", dir / "missing.txt"}).code == 1);
  CHECK_FALSE(fs::exists(dir / "x"));
}

TEST_CASE("help exits 0") {
  auto r = invoke({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("scene") != std::string::npos);
}

TEST_CASE("missing input exits 2") {
  TempDir dir;
  CHECK(invoke({"stats", dir / "nope.txt", "-o", dir / "s.csv"}).code == 2);
  CHECK(invoke({"parse", dir / "nope.txt", "--report", dir / "r.json"}).code ==
        2);
  CHECK_FALSE(fs::exists(dir / "s.csv"));
}

TEST_CASE("unwritable output exits 2") {
  TempDir dir;
  REQUIRE(invoke({"gen", "bmm", "--n", "2", "--block", "1", "-o",
                  dir / "t.txt"})
              .code == 0);
  CHECK(invoke({"stats", dir / "t.txt", "-o", dir / "no/such/dir/s.csv"})
            .code == 2);
}

TEST_CASE("parse report") {
  TempDir dir;
  spit(dir / "t.txt", "# header\n"
                      "L 0x1000 4 0 G main A 0\n"
                      "S 0x1004 4 0 G main A 1\n"
                      "L 0x2000 8 0 U main -\n"
                      "M 0x1000 4 0 G main A 0\n"
                      "L 0x3000 4 1 S f x\n"
                      "Q 0x3000 4 1 S f x\n");
  auto r = invoke({"parse", dir / "t.txt", "--drop-unattributed", "--report",
                   dir / "r.json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(slurp(dir / "r.json"));
  CHECK(j["lines_read"] == 7);
  CHECK(j["events_emitted"] == 4);
  CHECK(j["events_filtered"] == 1);
  CHECK(j["lines_skipped"] == 1);
  CHECK(j["lines_malformed"] == 1);
  CHECK(j["reduction_percent"].get<double>() == 20.0);
  CHECK(j["malformed_by_reason"]["UnknownOperation"] == 1);
  CHECK(r.err.find("line 7") != std::string::npos);

  auto kept = invoke({"parse", dir / "t.txt", "--keep-fn", "f,zzz",
                      "--keep-thread", "1", "--report", dir / "r2.json"});
  REQUIRE(kept.code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "r2.json"))["events_emitted"] == 1);
}

TEST_CASE("too many malformed lines exits 3") {
  TempDir dir;
  spit(dir / "t.txt", "junk\njunk\nL 0x10 4 0 G f v\n");
  ::setenv("MEMVIZ_MAX_MALFORMED", "1", 1);
  CHECK(invoke({"stats", dir / "t.txt", "-o", dir / "s.csv"}).code == 3);
  CHECK_FALSE(fs::exists(dir / "s.csv"));
  ::setenv("MEMVIZ_MAX_MALFORMED", "2", 1);
  CHECK(invoke({"stats", dir / "t.txt", "-o", dir / "s.csv"}).code == 0);
  ::setenv("MEMVIZ_MAX_MALFORMED", "lots", 1);
  CHECK(invoke({"stats", dir / "t.txt", "-o", dir / "s.csv"}).code == 1);
  ::unsetenv("MEMVIZ_MAX_MALFORMED");
  CHECK(invoke({"stats", dir / "t.txt", "-o", dir / "s.csv"}).code == 0);
}

TEST_CASE("layout mismatch exits 3") {
  TempDir dir;
  spit(dir / "t.txt", "L 0x100 8 0 G f M 0\nL 0x104 8 0 G f M\n");
  auto r = invoke({"scene", dir / "t.txt", "--kind", "array2d", "--var", "M",
                   "--layout", "2x2x8", "-o", dir / "s.json"});
  CHECK(r.code == 3);
  CHECK_FALSE(fs::exists(dir / "s.json"));
}

TEST_CASE("stats and store outputs") {
  TempDir dir;
  REQUIRE(invoke({"gen", "bmm", "--n", "2", "--block", "1", "-o",
                  dir / "t.txt"})
              .code == 0);
  REQUIRE(invoke({"stats", dir / "t.txt", "-o", dir / "s.csv"}).code == 0);
  std::istringstream csv(slurp(dir / "s.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line ==
        "address,variable,loads,stores,modifies,appearances,first_ts,last_ts");
  int rows = 0;
  while (std::getline(csv, line))
    ++rows;
  CHECK(rows == 12);

  REQUIRE(invoke({"store", dir / "t.txt", "--dump", dir / "d.json"}).code == 0);
  auto j = nlohmann::json::parse(slurp(dir / "d.json"));
  CHECK(j["lut"].size() == 12);
  CHECK(j["total_events"] == 24);
  CHECK(j["variable_order"] == nlohmann::json({"A", "B", "C"}));
  CHECK(j["by_address"]["0x100000"].size() == 2);
  CHECK(j["by_address"]["0x100000"][0]["op"] == "L");
}

TEST_CASE("scene base flag and empty scene") {
  TempDir dir;
  REQUIRE(invoke({"gen", "bmm", "--n", "4", "--block", "2", "-o",
                  dir / "t.txt"})
              .code == 0);
  auto r = invoke({"scene", dir / "t.txt", "--kind", "array2d", "--var", "B",
                   "--layout", "4x4x8", "--base", "0x0", "-o", dir / "s.json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(slurp(dir / "s.json"));
  CHECK(j["points"].empty());
  CHECK(j["out_of_layout"] == 64);

  auto none = invoke({"scene", dir / "t.txt", "--kind", "array2d", "--var",
                      "Nope", "--layout", "4x4x8", "-o", dir / "n.json"});
  CHECK(none.code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "n.json"))["points"].empty());
}

TEST_CASE("atomic writes leave no temp files") {
  TempDir dir;
  REQUIRE(invoke({"gen", "random", "--seed", "3", "--events", "50", "-o",
                  dir / "t.txt"})
              .code == 0);
  int entries = 0;
  for ([[maybe_unused]] const auto &e : fs::directory_iterator(dir.path))
    ++entries;
  CHECK(entries == 1);
}
