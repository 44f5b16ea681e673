#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "geocume/error.hpp"
#include "geocume/experiment.hpp"

using namespace geocume;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "schema": "geocume.experiment/1",
  "name": "small",
  "process": {"kind": "poisson", "d": 2, "intensity": 1.0},
  "score": {"kind": "count"},
  "n_grid": [50, 100, 200],
  "replicates": 40,
  "seed": 5,
  "checks": ["variance", "cumulants"]
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("geocume-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::logic_error("no error raised");
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("FNV-1a 64 reference vectors") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
  }

  TEST_CASE("parsing fills defaults and canonicalizes") {
    const ExperimentConfig c = parse_config(kSmall);
    CHECK(c.name == "small");
    CHECK(c.replicates == 40);
    CHECK(c.kmax == 4);
    CHECK(c.checks == std::vector<std::string>{"cumulants", "variance"});
    CHECK(std::isinf(c.gamma.a_hat));
    CHECK(c.digest == fnv1a_hex(c.canonical));
    CHECK(c.digest.size() == 16);
    // reparsing the canonical text is a fixed point
    CHECK(parse_config(c.canonical).canonical == c.canonical);
    // key order does not matter
    auto j = nlohmann::json::parse(kSmall);
    nlohmann::ordered_json reordered;
    for (auto it = j.rbegin(); it != j.rend(); ++it) reordered[it.key()] = *it;
    CHECK(parse_config(reordered.dump()).digest == c.digest);
  }

  TEST_CASE("sample digest tracks only the process and the seed") {
    const ExperimentConfig c = parse_config(kSmall);
    const ExperimentConfig more = parse_config(kSmall, {"--replicates=60"});
    CHECK(more.replicates == 60);
    CHECK(more.digest != c.digest);
    CHECK(more.sample_digest == c.sample_digest);
    const ExperimentConfig denser = parse_config(kSmall, {"--process.intensity=2"});
    CHECK(denser.process.intensity == 2.0);
    CHECK(denser.sample_digest != c.sample_digest);
    CHECK(parse_config(kSmall, {"seed=6"}).sample_digest != c.sample_digest);
    CHECK(parse_config(kSmall, {"--n_grid.0=25"}).n_grid.front() == 25.0);
    CHECK(parse_config(kSmall, {"--name=other"}).name == "other");
  }

  TEST_CASE("configuration errors") {
    CHECK(kind_of([] { parse_config("{"); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(kSmall, {"--nope=1"}); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(kSmall, {"--replicates"}); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(kSmall, {"--n_grid.7=1"}); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(kSmall, {"--n_grid=[50,100]"}); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(kSmall, {"--process.intensity=0"}); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(kSmall, {R"(--checks=["bogus"])"}); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(kSmall, {R"(--checks=["clt"])"}); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(kSmall, {R"(--checks=["concentration"])"}); }) == ErrorKind::config);
    auto j = nlohmann::json::parse(kSmall);
    j["extra"] = 1;
    CHECK(kind_of([&] { parse_config(j.dump()); }) == ErrorKind::config);
    j = nlohmann::json::parse(kSmall);
    j["score"] = {{"kind", "rsa"}, {"r", 0.5}};
    CHECK(kind_of([&] { parse_config(j.dump()); }) == ErrorKind::config);
    j["process"]["marks"] = true;
    CHECK(parse_config(j.dump()).process.marks);
    j["checks"] = {"cluster_decay"};
    j["cluster_decay"] = {{"edges", {0.5, 1.0}}};
    CHECK(kind_of([&] { parse_config(j.dump()); }) == ErrorKind::config);
    j["score"] = {{"kind", "k_coverage"}, {"k", 1}, {"r", 0.5}};
    j["cluster_decay"] = {{"edges", {0.5, 6.5}}};
    CHECK(kind_of([&] { parse_config(j.dump()); }) == ErrorKind::config);
    CHECK(kind_of([] { load_config("/nonexistent/config.json"); }) == ErrorKind::file);
  }

  TEST_CASE("shipped configurations parse") {
    for (const char* f : {"poisson_count.json", "poisson_coverage.json", "poisson_rsa.json", "ginibre_coverage.json",
                          "gibbs_hardcore.json"}) {
      CAPTURE(f);
      const ExperimentConfig c = load_config(fs::path(GEOCUME_CONFIG_DIR) / f);
      CHECK_FALSE(c.digest.empty());
    }
  }

  TEST_CASE("replicates are deterministic and keyed by n and index") {
    ExperimentConfig c = parse_config(kSmall, {"--process.marks=true"});
    CHECK(replicate_seed(5, 50.0, 0) == replicate_seed(5, 50.0, 0));
    CHECK_FALSE(replicate_seed(5, 50.0, 0) == replicate_seed(5, 100.0, 0));
    CHECK_FALSE(replicate_seed(5, 50.0, 0) == replicate_seed(5, 50.0, 1));
    const PointConfig a = generate_replicate(c, 50.0, 3);
    CHECK(a == generate_replicate(c, 50.0, 3));
    CHECK(a.has_marks());
    CHECK(a.seed == replicate_seed(5, 50.0, 3).value);
    CHECK(a.spec_digest == c.sample_digest);
    CHECK(a.window() == Window(2, 50.0));
  }

  TEST_CASE("sample plan merges the SLLN grid") {
    auto j = nlohmann::json::parse(kSmall);
    j["checks"] = {"slln"};
    j["slln"] = {{"n_grid", {25, 50, 100, 200, 400}}, {"replicates", 10}};
    const auto plan = sample_plan(parse_config(j.dump()));
    REQUIRE(plan.size() == 5);
    CHECK(plan[0] == std::pair<double, std::size_t>{25.0, 10});
    CHECK(plan[1] == std::pair<double, std::size_t>{50.0, 40});
    CHECK(plan[4] == std::pair<double, std::size_t>{400.0, 10});
  }

  TEST_CASE("sample cache: reuse and stale entries") {
    const fs::path dir = scratch("cache");
    const ExperimentConfig c = parse_config(kSmall);
    bool generated = false;
    const PointConfig first = cached_replicate(dir, c, 50.0, 0, &generated);
    CHECK(generated);
    CHECK(fs::exists(cache_path(dir, c, 50.0, 0)));
    const PointConfig again = cached_replicate(dir, c, 50.0, 0, &generated);
    CHECK_FALSE(generated);
    CHECK(again == first);
    CHECK(slurp(cache_path(dir, c, 50.0, 0)) == to_json_string(generate_replicate(c, 50.0, 0)));
    // an entry written under another seed cannot be read back
    fs::copy_file(cache_path(dir, c, 50.0, 0), cache_path(dir, c, 50.0, 0).parent_path() / "rep1.json");
    CHECK(kind_of([&] { cached_replicate(dir, c, 50.0, 1); }) == ErrorKind::stale_cache);
    const ExperimentConfig other = parse_config(kSmall, {"--seed=9"});
    fs::create_directories(cache_path(dir, other, 50.0, 0).parent_path());
    fs::copy_file(cache_path(dir, c, 50.0, 0), cache_path(dir, other, 50.0, 0));
    CHECK(kind_of([&] { cached_replicate(dir, other, 50.0, 0); }) == ErrorKind::stale_cache);
    fs::remove(cache_path(dir, c, 50.0, 1));
    RunOptions o;
    o.cache = dir;
    const SampleSummary s = cmd_sample(c, o);
    CHECK(s.reused == 1);
    CHECK(s.generated == 3 * 40 - 1);
    CHECK(cmd_sample(c, o).generated == 0);
    fs::remove_all(dir);
  }

  TEST_CASE("run output is deterministic across thread counts") {
    const fs::path a = scratch("run-a"), b = scratch("run-b");
    const ExperimentConfig c = parse_config(kSmall);
    RunOptions oa;
    oa.out = a;
    oa.threads = 1;
    RunOptions ob;
    ob.out = b;
    ob.threads = 3;
    const RunSummary ra = cmd_run(c, oa);
    const RunSummary rb = cmd_run(c, ob);
    CHECK(ra.csv == a / "results" / c.digest / "results.csv");
    CHECK(slurp(ra.csv) == slurp(rb.csv));
    CHECK(ra.rows == rb.rows);
    const std::string csv = slurp(ra.csv);
    CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    CHECK(csv.find(c.digest + ",5,variance,200,var_per_n,") != std::string::npos);
    CHECK(csv.find(",cumulants,50,k=4,") != std::string::npos);
    const auto summary = nlohmann::json::parse(slurp(ra.json));
    CHECK(summary["digest"] == c.digest);
    CHECK(summary["schema"] == std::string(kSummarySchema));
    CHECK(summary["seed_ledger"]["seeds"]["50"].size() == 40);
    CHECK(summary.contains("created"));
    CHECK(summary["checks"].contains("variance"));
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("output root resolution") {
    CHECK(resolve_output_root("explicit") == fs::path("explicit"));
    ::setenv("GEOCUME_OUT", "/tmp/from-env", 1);
    CHECK(resolve_output_root("") == fs::path("/tmp/from-env"));
    ::unsetenv("GEOCUME_OUT");
    CHECK(resolve_output_root("") == fs::path("geocume-out"));
  }

  TEST_CASE("parallel_for visits every index and rethrows the smallest failure") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    try {
      parallel_for(50, 3, [](std::size_t i) {
        if (i == 17 || i == 30) throw std::runtime_error(std::to_string(i));
      });
      FAIL("no exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "17");
    }
  }

  TEST_CASE("log keeps warnings") {
    std::ostringstream sink;
    Log log(&sink);
    log.info("a", "hello");
    log.warn("b", "careful \"quoted\"");
    CHECK(log.warnings() == std::vector<std::string>{"b: careful \"quoted\""});
    std::istringstream lines(sink.str());
    std::string line;
    while (std::getline(lines, line)) CHECK(nlohmann::json::parse(line).is_object());
  }
}
