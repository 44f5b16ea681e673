// geocume: sample, run, verify and report geometric-statistics experiments.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geocume/error.hpp"
#include "geocume/experiment.hpp"
#include "geocume/report.hpp"
#include "geocume/verify.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 1;
  std::string out;
  std::string cache;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "Root seed, overrides the configuration");
  cmd->add_option("--threads", args.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--out", args.out, "Output root (default: $GEOCUME_OUT, then ./geocume-out)");
  cmd->add_option("--cache", args.cache, "Sample cache root (default: <out>/cache)");
  cmd->allow_extras();
}

// Remaining `--a.b=value` or `--a.b value` tokens become configuration overrides.
std::vector<std::string> collect_overrides(const std::vector<std::string>& extras) {
  std::vector<std::string> overrides;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0) {
      throw geocume::Error(geocume::ErrorKind::config, "unexpected argument '" + tok + "'");
    }
    if (tok.find('=') != std::string::npos) {
      overrides.push_back(tok);
    } else if (i + 1 < extras.size()) {
      overrides.push_back(tok + "=" + extras[++i]);
    } else {
      throw geocume::Error(geocume::ErrorKind::config, "override '" + tok + "' has no value");
    }
  }
  return overrides;
}

geocume::ExperimentConfig load(const CommonArgs& args, const CLI::App* cmd) {
  auto overrides = collect_overrides(cmd->remaining());
  if (cmd->count("--seed") > 0) overrides.push_back("seed=" + std::to_string(args.seed));
  return geocume::load_config(args.config, overrides);
}

geocume::RunOptions options(const CommonArgs& args, geocume::Log* log) {
  geocume::RunOptions o;
  o.out = geocume::resolve_output_root(args.out);
  o.cache = args.cache;
  o.threads = args.threads;
  o.log = log;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric statistics experiments: sampling, checks, identity audits and reports"};
  app.require_subcommand(1);

  CommonArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Generate and cache the replicates of an experiment");
  add_common(sample, sample_args);

  CommonArgs run_args;
  auto* run = app.add_subcommand("run", "Evaluate the statistic and run the configured checks");
  add_common(run, run_args);

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "Run the deterministic identity audits");
  verify->add_option("suite", suite, "combinatorics, matrix, sigeom or all")
      ->check(CLI::IsMember({"combinatorics", "matrix", "sigeom", "all"}));

  std::string results;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Render SVG convergence plots from a results CSV");
  report->add_option("results", results, "results.csv or the directory holding it")->required();
  report->add_option("--out", report_out, "Directory for the SVG files (default: next to the CSV)");

  CLI11_PARSE(app, argc, argv);

  try {
    geocume::Log log(&std::cerr);
    if (*sample) {
      const auto config = load(sample_args, sample);
      const auto s = geocume::cmd_sample(config, options(sample_args, &log));
      std::cout << "digest " << config.digest << "\ncache " << s.cache_dir.string() << "\ngenerated " << s.generated
                << "\nreused " << s.reused << "\n";
      return 0;
    }
    if (*run) {
      const auto config = load(run_args, run);
      const auto r = geocume::cmd_run(config, options(run_args, &log));
      std::cout << "digest " << config.digest << "\nresults " << r.csv.string() << "\nsummary " << r.json.string()
                << "\nrows " << r.rows << "\nchecks " << (r.pass ? "pass" : "fail") << "\n";
      return 0;
    }
    if (*verify) {
      const auto rep = geocume::cmd_verify(suite);
      for (const auto& c : rep.cases) {
        std::cout << (c.pass() ? "PASS " : "FAIL ") << c.suite << "/" << c.name << " cases=" << c.cases
                  << " failures=" << c.failures;
        if (!c.pass()) std::cout << " first=" << c.first_failure;
        std::cout << "\n";
      }
      return rep.pass() ? 0 : 1;
    }
    if (*report) {
      for (const auto& f : geocume::cmd_report(results, report_out)) std::cout << f.string() << "\n";
      return 0;
    }
  } catch (const geocume::Error& e) {
    std::cerr << "geocume: " << e.what() << "\n";
    return e.kind() == geocume::ErrorKind::config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "geocume: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
