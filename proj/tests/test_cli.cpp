#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "geocume/error.hpp"
#include "geocume/experiment.hpp"
#include "geocume/report.hpp"
#include "geocume/verify.hpp"

using namespace geocume;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("geocume-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + GEOCUME_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("verify suites") {
    const VerifyReport r = cmd_verify("combinatorics");
    CHECK_FALSE(r.cases.empty());
    for (const auto& c : r.cases) {
      CAPTURE(c.name);
      CHECK(c.suite == "combinatorics");
      CHECK(c.pass());
      CHECK(c.cases > 0);
    }
    CHECK_THROWS_AS(cmd_verify("nonsense"), Error);
  }

  TEST_CASE("svg rendering is deterministic") {
    const Series s{"a", {100, 400, 1600}, {0.3, 0.2, 0.1}, {0.01, 0.02, 0.01}};
    const std::string a = render_svg("t <1>", "n", "y", {s}, true);
    CHECK(a == render_svg("t <1>", "n", "y", {s}, true));
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("<polyline") != std::string::npos);
    CHECK(a.find("t &lt;1&gt;") != std::string::npos);
    CHECK_NOTHROW((void)render_svg("empty", "x", "y", {}, false));
  }

  TEST_CASE("report from a run") {
    const fs::path out = scratch("report");
    const ExperimentConfig c = parse_config(R"({
      "name": "report", "process": {"kind": "poisson", "intensity": 1.0}, "score": {"kind": "count"},
      "n_grid": [50, 100, 200], "replicates": 200, "seed": 3, "checks": ["variance", "cumulants", "cumulant_growth", "clt"]})");
    RunOptions o;
    o.out = out;
    const RunSummary r = cmd_run(c, o);
    const auto files = cmd_report(r.csv.parent_path(), out / "plots");
    CHECK(files.size() == 3);
    for (const auto& f : files) {
      CHECK(fs::exists(f));
      CHECK(f.parent_path() == out / "plots");
    }
    CHECK(fs::exists(out / "plots" / "ks.svg"));
    CHECK_THROWS_AS(cmd_report(out / "missing.csv"), Error);
    std::ofstream(out / "bad.csv") << "a,b\n1,2\n";
    try {
      cmd_report(out / "bad.csv");
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::file);
    }
    fs::remove_all(out);
  }

  TEST_CASE("command line exit codes") {
    const fs::path out = scratch("exit");
    const std::string config = (fs::path(GEOCUME_CONFIG_DIR) / "poisson_count.json").string();
    CHECK(run_cli("verify combinatorics") == 0);
    CHECK(run_cli("") != 0);
    CHECK(run_cli("run --config /nonexistent.json") != 0);
    CHECK(run_cli("run --config " + config + " --out " + out.string() + " --bogus.key=1") == 2);
    CHECK(run_cli("sample --config " + config + " --out " + out.string() + " --replicates=500 --n_grid=[20,40,80]") ==
          0);
    CHECK(fs::exists(out / "cache"));
    fs::remove_all(out);
  }
}
