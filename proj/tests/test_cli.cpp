#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "whatif/json_io.hpp"
#include "whatif/plan.hpp"

using namespace whatif;
namespace fs = std::filesystem;

// Set WHATIF_REGENERATE_FIXTURES=1 to rewrite the golden plan.
namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(WHATIF_PLAN_BIN) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture(const std::string& name) { return (fs::path(WHATIF_FIXTURE_DIR) / name).string(); }

struct TempDir {
  fs::path path;
  TempDir() {
    char tmpl[] = "/tmp/whatif-cli-XXXXXX";
    path = ::mkdtemp(tmpl);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Plan JSON without the per-run identity fields.
Json normalized(Json plan) {
  plan.erase("id");
  plan.erase("created_at");
  return plan;
}

}  // namespace

TEST_CASE("run on the scenario fixture reproduces the golden plan") {
  const auto r = run("run --dataset " + fixture("scenario.json") + " --label golden");
  REQUIRE(r.code == 0);
  const auto plan = Json::parse(r.out);
  const auto text = canonical_dump(normalized(plan));
  const fs::path golden = fixture("scenario_plan.golden.json");
  if (std::getenv("WHATIF_REGENERATE_FIXTURES")) write_text_file(golden, text);
  CHECK(text == canonical_dump(read_json_file(golden)));
  CHECK(plan_from_json(plan).label == "golden");
}

TEST_CASE("validate reports a BOM cycle with exit code 2") {
  TempDir tmp;
  auto doc = read_json_file(fixture("scenario.json"));
  doc["bom_edges"].push_back({{"parent", "Board"}, {"child", "Laptop"}, {"quantity_per", 1}});
  write_text_file(tmp / "cyclic.json", doc.dump());
  const std::string cmd = std::string(WHATIF_PLAN_BIN) + " validate " + (tmp / "cyclic.json") + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) text.append(buf.data(), n);
  const int status = ::pclose(pipe);
  CHECK(WEXITSTATUS(status) == 2);
  CHECK(text.find("bom_cycle") != std::string::npos);
  CHECK(text.find("Laptop") != std::string::npos);
  CHECK(text.find("Board") != std::string::npos);

  CHECK(run("validate " + fixture("scenario.json")).code == 0);
  CHECK(run("validate " + (tmp / "missing.json")).code == 1);
  write_text_file(tmp / "broken.json", "{\"products\": ");
  CHECK(run("validate " + (tmp / "broken.json")).code == 1);
}

TEST_CASE("diff of a plan with itself is all zero") {
  TempDir tmp;
  REQUIRE(run("run --dataset " + fixture("scenario.json") + " --out " + (tmp / "p.json")).code == 0);
  const auto j = run("diff " + (tmp / "p.json") + " " + (tmp / "p.json") + " --level product");
  REQUIRE(j.code == 0);
  const auto d = Json::parse(j.out);
  for (const auto& [k, v] : d["kpis"].items()) CHECK(v["delta"] == 0.0);
  for (const auto& [k, v] : d["config"].items()) CHECK(v["unchanged"] == true);

  const auto table = run("diff " + (tmp / "p.json") + " " + (tmp / "p.json") + " --format table");
  REQUIRE(table.code == 0);
  CHECK(table.out.find("delay_rate       +0") != std::string::npos);
  CHECK(table.out.find("demand       +0") != std::string::npos);

  const auto detail = run("diff " + (tmp / "p.json") + " " + (tmp / "p.json") + " --level detail --product Laptop --dataset " +
                          fixture("scenario.json"));
  REQUIRE(detail.code == 0);
  CHECK(Json::parse(detail.out)["slice"]["tree"].size() == 6);
  CHECK(run("diff " + (tmp / "p.json") + " " + (tmp / "p.json") + " --level detail").code == 2);
  CHECK(run("diff " + (tmp / "p.json") + " " + (tmp / "nope.json")).code == 1);
}

TEST_CASE("run applies an edits file") {
  TempDir tmp;
  write_text_file(tmp / "edits.json",
                  R"([{"kind": "scale_capacity", "capacity_set": "F1-assembly", "percent": 50, "days": [0, 29]}])");
  const auto r = run("run --dataset " + fixture("scenario.json") + " --edits " + (tmp / "edits.json"));
  REQUIRE(r.code == 0);
  const auto plan = plan_from_json(Json::parse(r.out));
  REQUIRE(run("run --dataset " + fixture("scenario.json") + " --dump-lp " + (tmp / "lp.txt") + " --out " +
              (tmp / "p.json"))
              .code == 0);
  std::ifstream lp_text(tmp / "lp.txt");
  std::string first;
  std::getline(lp_text, first);
  CHECK(first == "minimize");
  CHECK(*plan.config.capacity_sets[0].daily_capacity[0] == doctest::Approx(90.0));

  write_text_file(tmp / "bad.json", R"([{"kind": "toggle_holiday", "factory": "F9", "day": 0}])");
  CHECK(run("run --dataset " + fixture("scenario.json") + " --edits " + (tmp / "bad.json")).code == 2);
  CHECK(run("run --dataset " + fixture("scenario.json") + " --bogus").code == 2);
}

TEST_CASE("gen is deterministic and its output validates") {
  TempDir tmp;
  const std::string args = "gen --products 60 --factories 3 --depth 2 --horizon 14 --seed 1 --out ";
  REQUIRE(run(args + (tmp / "a.json")).code == 0);
  REQUIRE(run(args + (tmp / "b.json")).code == 0);
  std::ifstream a(tmp / "a.json"), b(tmp / "b.json");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(run("validate " + (tmp / "a.json")).code == 0);
  CHECK(run("gen --products 0").code == 2);
}
