#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "geocume/dpp.hpp"
#include "geocume/estat.hpp"
#include "geocume/gibbs.hpp"
#include "geocume/kernel.hpp"
#include "geocume/pointproc.hpp"
#include "geocume/scores.hpp"

namespace geocume {

enum class ProcessKind { poisson, dpp, alpha_dpp, gibbs };

std::string to_string(ProcessKind kind);
ProcessKind process_kind_from_string(const std::string& name);

struct ProcessConfig {
  ProcessKind kind = ProcessKind::poisson;
  int d = 2;
  double intensity = 1.0;  // poisson
  KernelSpec kernel = KernelSpec::ginibre();
  int alpha_m = 1;  // alpha_dpp: alpha = -1/m
  GibbsSpec gibbs;
  DppParams dpp;
  McmcParams mcmc;
  bool marks = false;
};

struct SllnConfig {
  double eps = 0.2;
  std::vector<double> n_grid;  // geometric, at least five values
  std::size_t replicates = 30;
};

struct ClusterConfig {
  double n = 0.0;  // 0 selects the largest value of the main n grid
  std::vector<double> edges;
  std::uint64_t min_pairs = 50;
};

inline constexpr std::string_view kConfigSchema = "geocume.experiment/1";
inline constexpr std::string_view kSummarySchema = "geocume.summary/1";

/// Parsed and validated experiment configuration.
struct ExperimentConfig {
  std::string name;
  ProcessConfig process;
  ScoreModel score;
  TestFunction test_function;
  std::vector<double> n_grid;
  std::size_t replicates = 200;
  int kmax = 4;
  std::uint64_t seed = 1;
  std::vector<std::string> checks;
  /// EDC parameters a and a_hat; the remaining fields are copied from the score and process.
  GammaParams gamma;
  QuadratureParams quadrature;
  Tolerances tolerances;
  std::vector<double> concentration_s;
  SllnConfig slln;
  ClusterConfig cluster;

  /// Canonical JSON (sorted keys, all defaults filled in).
  std::string canonical;
  /// FNV-1a 64 of the canonical JSON, hex.
  std::string digest;
  /// FNV-1a 64 of the sampling-relevant part (process and seed), hex; keys the sample cache.
  std::string sample_digest;

  bool has_check(std::string_view check) const;
};

inline constexpr const char* kAllChecks[] = {"variance", "cumulants", "cumulant_growth", "clt",
                                             "concentration", "slln", "cluster_decay"};

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Parses a JSON configuration and applies `--a.b.c=value` style overrides to existing keys.
/// Override values are parsed as JSON when possible and taken as strings otherwise.
ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Stream of replicate `index` at window volume n.
RngSeed replicate_seed(std::uint64_t root, double n, std::uint64_t index);

/// One replicate of the configured process at window volume n.
PointConfig generate_replicate(const ExperimentConfig& config, double n, std::uint64_t index,
                               std::vector<std::string>* warnings = nullptr);

/// Thread-safe JSON-lines log; warnings are also kept for the run summary.
class Log {
 public:
  explicit Log(std::ostream* sink = nullptr) : sink_(sink) {}

  void info(std::string_view event, std::string_view message);
  void warn(std::string_view event, std::string_view message);
  std::vector<std::string> warnings() const;

 private:
  void write(std::string_view level, std::string_view event, std::string_view message);

  std::ostream* sink_;
  mutable std::mutex mutex_;
  std::vector<std::string> warnings_;
};

struct RunOptions {
  std::filesystem::path out;
  /// Sample cache root; empty selects out / "cache".
  std::filesystem::path cache;
  unsigned threads = 1;
  Log* log = nullptr;
};

/// Output root: explicit value, then GEOCUME_OUT, then "geocume-out".
std::filesystem::path resolve_output_root(const std::string& explicit_out);

/// Calls fn(i) for i in [0, count) on up to `threads` workers; rethrows the exception of
/// the smallest failing index.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

struct SampleSummary {
  std::size_t generated = 0;
  std::size_t reused = 0;
  std::filesystem::path cache_dir;
};

/// Every n value the configuration needs, with its replicate count.
std::vector<std::pair<double, std::size_t>> sample_plan(const ExperimentConfig& config);

/// Cache file of one replicate: <cache>/<sample digest>/n<n>/rep<index>.json.
std::filesystem::path cache_path(const std::filesystem::path& cache_root, const ExperimentConfig& config, double n,
                                 std::uint64_t index);

/// Loads a cached replicate, or generates and stores it. Throws stale-cache when the stored
/// digest or seed disagrees with the configuration.
PointConfig cached_replicate(const std::filesystem::path& cache_root, const ExperimentConfig& config, double n,
                             std::uint64_t index, bool* generated = nullptr, Log* log = nullptr);

SampleSummary cmd_sample(const ExperimentConfig& config, const RunOptions& options);

inline constexpr const char* kCsvHeader = "digest,root_seed,check,n,param,value,stderr,bound,pass";

struct RunSummary {
  std::filesystem::path csv;
  std::filesystem::path json;
  std::size_t rows = 0;
  bool pass = true;
};

/// Evaluates the statistic on every replicate and runs the configured checks. Writes
/// <out>/results/<digest>/results.csv and summary.json.
RunSummary cmd_run(const ExperimentConfig& config, const RunOptions& options);

}  // namespace geocume
