#include "geocume/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "geocume/error.hpp"

namespace geocume {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kMarkStream = 0x6d61726b;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::config, what); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      config_error("unknown key '" + where + "." + item.key() + "'");
    }
  }
}

template <class T>
T get(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error("'" + where + "." + key + "' has the wrong type");
  }
}

json section(const json& obj, const char* key) { return obj.contains(key) ? obj.at(key) : json::object(); }

// a_hat may be a number or the string "inf".
double get_decay(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_string() && v.get<std::string>() == "inf") return kInfiniteDecay;
  if (v.is_number()) return v.get<double>();
  config_error("'" + where + "." + key + "' must be a number or \"inf\"");
}

json decay_json(double v) { return std::isinf(v) ? json("inf") : json(v); }

KernelSpec parse_kernel(const json& j, int d) {
  check_keys(j, "process.kernel", {"kind", "amplitude", "rho", "ell", "radii", "values", "envelope"});
  const auto kind = kernel_kind_from_string(get<std::string>(j, "kind", "ginibre", "process.kernel"));
  switch (kind) {
    case KernelKind::ginibre:
      if (d != 2) config_error("the ginibre kernel needs d = 2");
      return KernelSpec::ginibre(get<double>(j, "amplitude", 1.0, "process.kernel"));
    case KernelKind::gaussian:
      return KernelSpec::gaussian(d, get<double>(j, "rho", 0.5, "process.kernel"),
                                  get<double>(j, "ell", 1.0, "process.kernel"));
    case KernelKind::tabulated: {
      const json env = section(j, "envelope");
      check_keys(env, "process.kernel.envelope", {"C", "c", "a_hat"});
      DecayEnvelope e;
      e.C = get<double>(env, "C", 1.0, "process.kernel.envelope");
      e.c = get<double>(env, "c", 1.0, "process.kernel.envelope");
      e.a_hat = get_decay(env, "a_hat", 1.0, "process.kernel.envelope");
      return KernelSpec::tabulated(d, get<std::vector<double>>(j, "radii", {}, "process.kernel"),
                                   get<std::vector<double>>(j, "values", {}, "process.kernel"), e);
    }
  }
  config_error("unknown kernel kind");
}

json kernel_json(const KernelSpec& k) {
  json j;
  j["kind"] = to_string(k.kind());
  switch (k.kind()) {
    case KernelKind::ginibre:
      j["amplitude"] = k.amplitude();
      break;
    case KernelKind::gaussian:
      j["rho"] = k.amplitude();
      j["ell"] = k.length_scale();
      break;
    case KernelKind::tabulated: {
      const DecayEnvelope e = k.envelope();
      j["radii"] = k.radii();
      j["values"] = k.values();
      j["envelope"] = {{"C", e.C}, {"c", e.c}, {"a_hat", decay_json(e.a_hat)}};
      break;
    }
  }
  return j;
}

ProcessConfig parse_process(const json& j) {
  check_keys(j, "process", {"kind", "d", "intensity", "kernel", "alpha_m", "gibbs", "dpp", "mcmc", "marks"});
  ProcessConfig p;
  p.kind = process_kind_from_string(get<std::string>(j, "kind", "poisson", "process"));
  p.d = get<int>(j, "d", 2, "process");
  if (p.d < 1 || p.d > 3) config_error("process.d must be 1, 2 or 3");
  p.marks = get<bool>(j, "marks", false, "process");
  switch (p.kind) {
    case ProcessKind::poisson:
      p.intensity = get<double>(j, "intensity", 1.0, "process");
      if (!(p.intensity > 0.0) || !std::isfinite(p.intensity)) config_error("process.intensity must be positive");
      break;
    case ProcessKind::alpha_dpp:
      p.alpha_m = get<int>(j, "alpha_m", 1, "process");
      if (p.alpha_m < 1) config_error("process.alpha_m must be >= 1");
      [[fallthrough]];
    case ProcessKind::dpp: {
      p.kernel = parse_kernel(section(j, "kernel"), p.d);
      const json dj = section(j, "dpp");
      check_keys(dj, "process.dpp", {"method", "cells_per_unit", "max_cells"});
      const auto method = get<std::string>(dj, "method", "automatic", "process.dpp");
      if (method == "automatic") {
        p.dpp.method = DppMethod::automatic;
      } else if (method == "grid") {
        p.dpp.method = DppMethod::grid;
      } else {
        config_error("process.dpp.method must be automatic or grid");
      }
      p.dpp.cells_per_unit = get<double>(dj, "cells_per_unit", 20.0, "process.dpp");
      p.dpp.max_cells = get<std::size_t>(dj, "max_cells", 4096, "process.dpp");
      if (!(p.dpp.cells_per_unit > 0.0) || p.dpp.max_cells == 0) config_error("process.dpp grid must be non-empty");
      break;
    }
    case ProcessKind::gibbs: {
      const json g = section(j, "gibbs");
      const std::string w = "process.gibbs";
      check_keys(g, w, {"class", "lambda", "beta", "s0", "c1", "c2", "phi_radii", "phi_values", "radius",
                        "min_distance"});
      p.gibbs.kind = gibbs_class_from_string(get<std::string>(g, "class", "hard_core", w));
      p.gibbs.lambda = get<double>(g, "lambda", 1.0, w);
      p.gibbs.beta = get<double>(g, "beta", 1.0, w);
      p.gibbs.s0 = get<double>(g, "s0", 0.0, w);
      p.gibbs.c1 = get<double>(g, "c1", 0.0, w);
      p.gibbs.c2 = get<double>(g, "c2", 0.0, w);
      p.gibbs.phi_radii = get<std::vector<double>>(g, "phi_radii", {}, w);
      p.gibbs.phi_values = get<std::vector<double>>(g, "phi_values", {}, w);
      p.gibbs.radius = get<double>(g, "radius", 0.0, w);
      p.gibbs.min_distance = get<double>(g, "min_distance", 0.0, w);
      p.gibbs.validate();
      const json m = section(j, "mcmc");
      check_keys(m, "process.mcmc", {"burn_in", "sweeps", "area_cells_per_radius"});
      p.mcmc.burn_in = get<std::uint64_t>(m, "burn_in", 0, "process.mcmc");
      p.mcmc.sweeps = get<std::uint64_t>(m, "sweeps", 40, "process.mcmc");
      p.mcmc.area_cells_per_radius = get<int>(m, "area_cells_per_radius", 16, "process.mcmc");
      if (p.mcmc.area_cells_per_radius < 1) config_error("process.mcmc.area_cells_per_radius must be >= 1");
      break;
    }
  }
  return p;
}

json process_json(const ProcessConfig& p) {
  json j;
  j["kind"] = to_string(p.kind);
  j["d"] = p.d;
  j["marks"] = p.marks;
  switch (p.kind) {
    case ProcessKind::poisson:
      j["intensity"] = p.intensity;
      break;
    case ProcessKind::alpha_dpp:
      j["alpha_m"] = p.alpha_m;
      [[fallthrough]];
    case ProcessKind::dpp:
      j["kernel"] = kernel_json(p.kernel);
      j["dpp"] = {{"method", p.dpp.method == DppMethod::grid ? "grid" : "automatic"},
                  {"cells_per_unit", p.dpp.cells_per_unit},
                  {"max_cells", p.dpp.max_cells}};
      break;
    case ProcessKind::gibbs:
      j["gibbs"] = {{"class", to_string(p.gibbs.kind)}, {"lambda", p.gibbs.lambda},
                    {"beta", p.gibbs.beta},             {"s0", p.gibbs.s0},
                    {"c1", p.gibbs.c1},                 {"c2", p.gibbs.c2},
                    {"phi_radii", p.gibbs.phi_radii},   {"phi_values", p.gibbs.phi_values},
                    {"radius", p.gibbs.radius},         {"min_distance", p.gibbs.min_distance}};
      j["mcmc"] = {{"burn_in", p.mcmc.burn_in},
                   {"sweeps", p.mcmc.sweeps},
                   {"area_cells_per_radius", p.mcmc.area_cells_per_radius}};
      break;
  }
  return j;
}

double default_a_hat(const ProcessConfig& p) {
  switch (p.kind) {
    case ProcessKind::poisson: return kInfiniteDecay;
    case ProcessKind::dpp:
    case ProcessKind::alpha_dpp: return p.kernel.envelope().a_hat;
    case ProcessKind::gibbs: return 1.0;
  }
  return kInfiniteDecay;
}

TestFunction parse_test_function(const json& j, int d) {
  check_keys(j, "test_function", {"kind", "height", "lo", "hi", "center", "width"});
  const auto kind = get<std::string>(j, "kind", "constant", "test_function");
  const double h = get<double>(j, "height", 1.0, "test_function");
  if (kind == "constant") return TestFunction::constant(h);
  if (kind == "box") {
    auto lo = get<std::vector<double>>(j, "lo", {}, "test_function");
    auto hi = get<std::vector<double>>(j, "hi", {}, "test_function");
    if (lo.size() != static_cast<std::size_t>(d)) config_error("test_function.lo must have d entries");
    return TestFunction::box(std::move(lo), std::move(hi), h);
  }
  if (kind == "bump") {
    auto c = get<std::vector<double>>(j, "center", {}, "test_function");
    if (c.size() != static_cast<std::size_t>(d)) config_error("test_function.center must have d entries");
    return TestFunction::bump(std::move(c), get<double>(j, "width", 0.5, "test_function"), h);
  }
  config_error("test_function.kind must be constant, box or bump");
}

json test_function_json(const TestFunction& f) {
  json j;
  j["height"] = f.height;
  switch (f.kind) {
    case TestFunctionKind::constant:
      j["kind"] = "constant";
      break;
    case TestFunctionKind::box:
      j["kind"] = "box";
      j["lo"] = f.lo;
      j["hi"] = f.hi;
      break;
    case TestFunctionKind::bump:
      j["kind"] = "bump";
      j["center"] = f.center;
      j["width"] = f.width;
      break;
  }
  return j;
}

bool is_geometric(const std::vector<double>& g) {
  if (g.size() < 2) return true;
  const double ratio = g[1] / g[0];
  for (std::size_t i = 2; i < g.size(); ++i) {
    if (std::abs(g[i] / g[i - 1] - ratio) > 1e-9 * ratio) return false;
  }
  return true;
}

bool strictly_increasing_positive(const std::vector<double>& g) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0) || !std::isfinite(g[i]) || (i > 0 && !(g[i] > g[i - 1]))) return false;
  }
  return true;
}

void validate(const ExperimentConfig& c) {
  if (c.n_grid.empty() || !strictly_increasing_positive(c.n_grid)) {
    config_error("n_grid must be non-empty, positive and strictly increasing");
  }
  if (c.kmax < 1 || c.kmax > kMaxCumulantOrder) config_error("kmax must be in 1..6");
  if (c.score.requires_marks() && !c.process.marks) {
    config_error("score '" + to_string(c.score.kind) + "' needs a marked process (process.marks = true)");
  }
  if (c.quadrature.cells_per_r < 1) config_error("quadrature.cells_per_r must be >= 1");
  for (const auto& check : c.checks) {
    if (std::find_if(std::begin(kAllChecks), std::end(kAllChecks), [&](const char* k) { return check == k; }) ==
        std::end(kAllChecks)) {
      config_error("unknown check '" + check + "'");
    }
  }
  const auto reps = c.replicates;
  if (c.has_check("variance") && (c.n_grid.size() < 3 || reps < 20)) {
    config_error("variance check needs three n values and 20 replicates");
  }
  if ((c.has_check("cumulants") || c.has_check("cumulant_growth")) &&
      reps < static_cast<std::size_t>(10 * c.kmax)) {
    config_error("cumulant checks need at least 10 * kmax replicates");
  }
  if (c.has_check("cumulant_growth") && c.kmax > 4) config_error("cumulant_growth needs kmax <= 4");
  if (c.has_check("clt") && (c.n_grid.size() < 2 || reps < 200)) {
    config_error("clt check needs two n values and 200 replicates");
  }
  if (c.has_check("concentration")) {
    if (reps < 500) config_error("concentration check needs 500 replicates");
    if (c.concentration_s.empty()) config_error("concentration_s must be non-empty");
    for (std::size_t i = 0; i < c.concentration_s.size(); ++i) {
      if (!(c.concentration_s[i] >= 0.0) || (i > 0 && !(c.concentration_s[i] > c.concentration_s[i - 1]))) {
        config_error("concentration_s must be non-negative and increasing");
      }
    }
  }
  if (c.has_check("slln")) {
    if (c.slln.n_grid.size() < 5 || !strictly_increasing_positive(c.slln.n_grid) || !is_geometric(c.slln.n_grid)) {
      config_error("slln.n_grid must be geometric with at least five values");
    }
    if (!(c.slln.eps > 0.0)) config_error("slln.eps must be positive");
    if (c.slln.replicates < 2) config_error("slln.replicates must be >= 2");
  }
  if (c.has_check("cluster_decay")) {
    if (!stabilization_radius_bound(c.score)) {
      config_error("cluster_decay needs a score with a bounded stabilization radius");
    }
    if (c.cluster.edges.size() < 2 || !strictly_increasing_positive(c.cluster.edges)) {
      config_error("cluster_decay.edges must be positive and increasing, at least two");
    }
    if (c.cluster.n != 0.0 && std::find(c.n_grid.begin(), c.n_grid.end(), c.cluster.n) == c.n_grid.end()) {
      config_error("cluster_decay.n must be 0 or a value of n_grid");
    }
    const double n = c.cluster.n != 0.0 ? c.cluster.n : *std::max_element(c.n_grid.begin(), c.n_grid.end());
    const double half = 0.5 * std::pow(n, 1.0 / c.process.d);
    if (!c.cluster.edges.empty() && !(c.cluster.edges.back() + *stabilization_radius_bound(c.score) < half)) {
      config_error("cluster_decay: largest edge plus the stabilization radius must stay below half the window side");
    }
  }
}

ExperimentConfig from_json(const json& j) {
  check_keys(j, "config", {"schema", "name", "process", "score", "test_function", "n_grid", "replicates", "kmax",
                           "seed", "checks", "edc", "quadrature", "tolerances", "concentration_s", "slln",
                           "cluster_decay"});
  const auto schema = get<std::string>(j, "schema", std::string(kConfigSchema), "config");
  if (schema != kConfigSchema) config_error("unsupported schema '" + schema + "'");
  ExperimentConfig c;
  c.name = get<std::string>(j, "name", "experiment", "config");
  c.process = parse_process(section(j, "process"));

  const json s = section(j, "score");
  check_keys(s, "score", {"kind", "k", "r", "b", "beta", "gamma1", "gamma2"});
  c.score.kind = score_kind_from_string(get<std::string>(s, "kind", "count", "score"));
  c.score.k = get<int>(s, "k", 1, "score");
  c.score.r = get<double>(s, "r", 0.5, "score");
  c.score.b = get<double>(s, "b", 0.0, "score");
  c.score.beta = get<double>(s, "beta", 0.0, "score");
  c.score.gamma1 = get<double>(s, "gamma1", 0.0, "score");
  c.score.gamma2 = get<double>(s, "gamma2", 0.0, "score");
  c.score.validate();

  c.test_function = parse_test_function(section(j, "test_function"), c.process.d);
  c.n_grid = get<std::vector<double>>(j, "n_grid", {}, "config");
  c.replicates = get<std::size_t>(j, "replicates", 200, "config");
  c.kmax = get<int>(j, "kmax", 4, "config");
  c.seed = get<std::uint64_t>(j, "seed", 1, "config");
  c.checks = get<std::vector<std::string>>(j, "checks", {"variance", "cumulants"}, "config");
  std::sort(c.checks.begin(), c.checks.end());
  c.checks.erase(std::unique(c.checks.begin(), c.checks.end()), c.checks.end());

  const json e = section(j, "edc");
  check_keys(e, "edc", {"a", "a_hat"});
  c.gamma.a = get<double>(e, "a", 0.0, "edc");
  c.gamma.a_hat = get_decay(e, "a_hat", default_a_hat(c.process), "edc");
  c.gamma.b = c.score.b;
  c.gamma.beta = c.score.beta;
  c.gamma.gamma1 = c.score.gamma1;
  c.gamma.gamma2 = c.score.gamma2;
  c.gamma.d = c.process.d;

  const json q = section(j, "quadrature");
  check_keys(q, "quadrature", {"cells_per_r"});
  c.quadrature.cells_per_r = get<int>(q, "cells_per_r", 64, "quadrature");

  const json t = section(j, "tolerances");
  check_keys(t, "tolerances", {"n_stderr", "stabilization_rel", "growth_factor", "ks_noise_factor"});
  c.tolerances.n_stderr = get<double>(t, "n_stderr", 3.0, "tolerances");
  c.tolerances.stabilization_rel = get<double>(t, "stabilization_rel", 0.10, "tolerances");
  c.tolerances.growth_factor = get<double>(t, "growth_factor", 3.0, "tolerances");
  c.tolerances.ks_noise_factor = get<double>(t, "ks_noise_factor", 2.0, "tolerances");

  c.concentration_s =
      get<std::vector<double>>(j, "concentration_s", {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}, "config");

  const json sl = section(j, "slln");
  check_keys(sl, "slln", {"eps", "n_grid", "replicates"});
  c.slln.eps = get<double>(sl, "eps", 0.2, "slln");
  c.slln.n_grid = get<std::vector<double>>(sl, "n_grid", {}, "slln");
  c.slln.replicates = get<std::size_t>(sl, "replicates", 30, "slln");

  const json cl = section(j, "cluster_decay");
  check_keys(cl, "cluster_decay", {"n", "edges", "min_pairs"});
  c.cluster.n = get<double>(cl, "n", 0.0, "cluster_decay");
  c.cluster.edges = get<std::vector<double>>(cl, "edges", {}, "cluster_decay");
  c.cluster.min_pairs = get<std::uint64_t>(cl, "min_pairs", 50, "cluster_decay");

  validate(c);
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema"] = kConfigSchema;
  j["name"] = c.name;
  j["process"] = process_json(c.process);
  j["score"] = {{"kind", to_string(c.score.kind)}, {"k", c.score.k},
                {"r", c.score.r},                  {"b", c.score.b},
                {"beta", c.score.beta},            {"gamma1", c.score.gamma1},
                {"gamma2", c.score.gamma2}};
  j["test_function"] = test_function_json(c.test_function);
  j["n_grid"] = c.n_grid;
  j["replicates"] = c.replicates;
  j["kmax"] = c.kmax;
  j["seed"] = c.seed;
  j["checks"] = c.checks;
  j["edc"] = {{"a", c.gamma.a}, {"a_hat", decay_json(c.gamma.a_hat)}};
  j["quadrature"] = {{"cells_per_r", c.quadrature.cells_per_r}};
  j["tolerances"] = {{"n_stderr", c.tolerances.n_stderr},
                     {"stabilization_rel", c.tolerances.stabilization_rel},
                     {"growth_factor", c.tolerances.growth_factor},
                     {"ks_noise_factor", c.tolerances.ks_noise_factor}};
  j["concentration_s"] = c.concentration_s;
  j["slln"] = {{"eps", c.slln.eps}, {"n_grid", c.slln.n_grid}, {"replicates", c.slln.replicates}};
  j["cluster_decay"] = {{"n", c.cluster.n}, {"edges", c.cluster.edges}, {"min_pairs", c.cluster.min_pairs}};
  return j;
}

void apply_override(json& root, const std::string& raw) {
  std::string text = raw;
  if (text.rfind("--", 0) == 0) text.erase(0, 2);
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) config_error("override '" + raw + "' must look like --a.b=value");
  const std::string path = text.substr(0, eq);
  const std::string value = text.substr(eq + 1);
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (node->is_object() && node->contains(key)) {
      node = &(*node)[key];
    } else if (node->is_array() && !key.empty() && std::all_of(key.begin(), key.end(), ::isdigit) &&
               std::stoul(key) < node->size()) {
      node = &(*node)[std::stoul(key)];
    } else {
      config_error("override path '" + path + "' does not name a configuration field");
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(value) : parsed;
}

ExperimentConfig finalize(const json& j) {
  ExperimentConfig c = from_json(j);
  const json canonical = to_json(c);
  c.canonical = canonical.dump();
  c.digest = fnv1a_hex(c.canonical);
  const json sampling = {{"schema", kConfigSchema}, {"process", canonical.at("process")}, {"seed", c.seed}};
  c.sample_digest = fnv1a_hex(sampling.dump());
  return c;
}

std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

}  // namespace

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::poisson: return "poisson";
    case ProcessKind::dpp: return "dpp";
    case ProcessKind::alpha_dpp: return "alpha_dpp";
    case ProcessKind::gibbs: return "gibbs";
  }
  return "poisson";
}

ProcessKind process_kind_from_string(const std::string& name) {
  if (name == "poisson") return ProcessKind::poisson;
  if (name == "dpp") return ProcessKind::dpp;
  if (name == "alpha_dpp") return ProcessKind::alpha_dpp;
  if (name == "gibbs") return ProcessKind::gibbs;
  throw Error(ErrorKind::config, "unknown process kind '" + name + "'");
}

bool ExperimentConfig::has_check(std::string_view check) const {
  return std::find(checks.begin(), checks.end(), check) != checks.end();
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides) {
  json raw = json::parse(json_text, nullptr, false);
  if (raw.is_discarded()) config_error("configuration is not valid JSON");
  try {
    json canonical = to_json(from_json(raw));
    for (const auto& o : overrides) apply_override(canonical, o);
    return finalize(canonical);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    config_error(e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::file, "cannot read configuration " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides);
}

RngSeed replicate_seed(std::uint64_t root, double n, std::uint64_t index) {
  return derive_seed(RngSeed{root}, {std::bit_cast<std::uint64_t>(n), index});
}

PointConfig generate_replicate(const ExperimentConfig& config, double n, std::uint64_t index,
                               std::vector<std::string>* warnings) {
  const RngSeed seed = replicate_seed(config.seed, n, index);
  const Window window(config.process.d, n);
  const ProcessConfig& p = config.process;
  PointConfig out;
  switch (p.kind) {
    case ProcessKind::poisson:
      out = sample_poisson(window, p.intensity, seed);
      break;
    case ProcessKind::dpp:
      out = sample_dpp(window, p.kernel, seed, p.dpp);
      break;
    case ProcessKind::alpha_dpp:
      out = sample_alpha_dpp(window, p.kernel, p.alpha_m, seed, p.dpp);
      break;
    case ProcessKind::gibbs: {
      GibbsResult r = sample_gibbs(window, p.gibbs, p.mcmc, seed);
      if (warnings) {
        for (auto& w : r.warnings) warnings->push_back(std::move(w));
      }
      out = std::move(r.config);
      break;
    }
  }
  if (p.marks) out = attach_marks(std::move(out), derive_seed(seed, {kMarkStream}));
  out.seed = seed.value;
  out.spec_digest = config.sample_digest;
  return out;
}

void Log::info(std::string_view event, std::string_view message) { write("info", event, message); }

void Log::warn(std::string_view event, std::string_view message) {
  write("warn", event, message);
  std::lock_guard lock(mutex_);
  warnings_.emplace_back(std::string(event) + ": " + std::string(message));
}

std::vector<std::string> Log::warnings() const {
  std::lock_guard lock(mutex_);
  return warnings_;
}

void Log::write(std::string_view level, std::string_view event, std::string_view message) {
  if (!sink_) return;
  std::lock_guard lock(mutex_);
  *sink_ << "{\"level\":" << quote(level) << ",\"event\":" << quote(event) << ",\"message\":" << quote(message)
         << "}\n";
  sink_->flush();
}

std::filesystem::path resolve_output_root(const std::string& explicit_out) {
  if (!explicit_out.empty()) return explicit_out;
  if (const char* env = std::getenv("GEOCUME_OUT"); env && *env) return env;
  return "geocume-out";
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::optional<std::size_t> failed_index;
  std::exception_ptr failure;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failed_index || i < *failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::pair<double, std::size_t>> sample_plan(const ExperimentConfig& config) {
  std::vector<std::pair<double, std::size_t>> plan;
  auto need = [&](double n, std::size_t count) {
    for (auto& [m, c] : plan) {
      if (m == n) {
        c = std::max(c, count);
        return;
      }
    }
    plan.emplace_back(n, count);
  };
  for (double n : config.n_grid) need(n, config.replicates);
  if (config.has_check("slln")) {
    for (double n : config.slln.n_grid) need(n, config.slln.replicates);
  }
  std::sort(plan.begin(), plan.end());
  return plan;
}

std::filesystem::path cache_path(const std::filesystem::path& cache_root, const ExperimentConfig& config, double n,
                                 std::uint64_t index) {
  return cache_root / config.sample_digest / ("n" + format_double(n)) / ("rep" + std::to_string(index) + ".json");
}

PointConfig cached_replicate(const std::filesystem::path& cache_root, const ExperimentConfig& config, double n,
                             std::uint64_t index, bool* generated, Log* log) {
  const auto path = cache_path(cache_root, config, n, index);
  const std::uint64_t expected_seed = replicate_seed(config.seed, n, index).value;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::file, "cannot read cache entry " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    PointConfig cached = point_config_from_json_string(text.str());
    if (cached.spec_digest != config.sample_digest) {
      throw Error(ErrorKind::stale_cache, "cache entry " + path.string() + " was written for digest '" +
                                              cached.spec_digest + "', expected '" + config.sample_digest + "'");
    }
    if (cached.seed != expected_seed || !(cached.window() == Window(config.process.d, n))) {
      throw Error(ErrorKind::stale_cache, "cache entry " + path.string() + " does not hold replicate " +
                                              std::to_string(index) + " at n = " + format_double(n));
    }
    if (generated) *generated = false;
    return cached;
  }
  std::vector<std::string> warnings;
  PointConfig fresh = generate_replicate(config, n, index, &warnings);
  if (log) {
    for (const auto& w : warnings) {
      log->warn("sampler", "n=" + format_double(n) + " rep=" + std::to_string(index) + ": " + w);
    }
  }
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::file, "cannot write cache entry " + tmp.string());
    out << to_json_string(fresh);
  }
  std::filesystem::rename(tmp, path);
  if (generated) *generated = true;
  return fresh;
}

SampleSummary cmd_sample(const ExperimentConfig& config, const RunOptions& options) {
  const auto cache_root = options.cache.empty() ? options.out / "cache" : options.cache;
  SampleSummary summary;
  summary.cache_dir = cache_root / config.sample_digest;
  for (const auto& [n, count] : sample_plan(config)) {
    std::vector<char> made(count, 0);
    parallel_for(count, options.threads, [&](std::size_t i) {
      bool generated = false;
      cached_replicate(cache_root, config, n, i, &generated, options.log);
      made[i] = generated ? 1 : 0;
    });
    const auto fresh = static_cast<std::size_t>(std::count(made.begin(), made.end(), 1));
    summary.generated += fresh;
    summary.reused += count - fresh;
    if (options.log) {
      options.log->info("sample", "n=" + format_double(n) + " generated=" + std::to_string(fresh) +
                                      " reused=" + std::to_string(count - fresh));
    }
  }
  return summary;
}

namespace {

struct Row {
  std::string check;
  std::optional<double> n;
  std::string param;
  std::optional<double> value;
  std::optional<double> stderr_;
  std::optional<double> bound;
  std::optional<bool> pass;
};

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

double statistic(const PointConfig& config, const std::vector<double>& xi, const TestFunction& f) {
  const double scale = 1.0 / config.window().side();
  std::vector<double> u(static_cast<std::size_t>(config.dimension()));
  double sum = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] == 0.0) continue;
    const auto x = config.point(i);
    for (std::size_t a = 0; a < u.size(); ++a) u[a] = x[a] * scale;
    sum += xi[i] * f(u);
  }
  return sum;
}

json gamma_json(const GammaParams& p, const GammaResult& r) {
  return {{"a", p.a},
          {"a_hat", decay_json(p.a_hat)},
          {"b", p.b},
          {"beta", p.beta},
          {"gamma1", p.gamma1},
          {"gamma2", p.gamma2},
          {"d", p.d},
          {"gamma", r.gamma},
          {"exponent", r.exponent},
          {"branch", r.branch},
          {"first_branch", r.first_branch},
          {"second_branch", r.second_branch}};
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

RunSummary cmd_run(const ExperimentConfig& config, const RunOptions& options) {
  const auto cache_root = options.cache.empty() ? options.out / "cache" : options.cache;
  Log fallback;
  Log& log = options.log ? *options.log : fallback;
  const double cluster_n = config.cluster.n != 0.0 ? config.cluster.n : config.n_grid.back();
  const bool want_cluster = config.has_check("cluster_decay");

  std::vector<std::pair<double, std::vector<double>>> values_by_n;
  std::vector<PointConfig> cluster_configs;
  std::vector<std::vector<double>> cluster_scores;
  for (const auto& [n, count] : sample_plan(config)) {
    std::vector<double> values(count);
    const bool keep = want_cluster && n == cluster_n;
    if (keep) {
      cluster_configs.assign(count, PointConfig{});
      cluster_scores.assign(count, {});
    }
    parallel_for(count, options.threads, [&](std::size_t i) {
      PointConfig pc = cached_replicate(cache_root, config, n, i, nullptr, &log);
      std::vector<double> xi = point_scores(pc, config.score, config.quadrature);
      values[i] = statistic(pc, xi, config.test_function);
      if (keep) {
        cluster_scores[i] = std::move(xi);
        cluster_configs[i] = std::move(pc);
      }
    });
    log.info("run", "n=" + format_double(n) + " replicates=" + std::to_string(count) + " done");
    values_by_n.emplace_back(n, std::move(values));
  }

  auto values_at = [&](double n) -> const std::vector<double>& {
    for (const auto& [m, v] : values_by_n) {
      if (m == n) return v;
    }
    throw Error(ErrorKind::argument, "no values for n = " + format_double(n));
  };
  std::vector<SampleSet> sets;
  for (double n : config.n_grid) {
    const auto& v = values_at(n);
    SampleSet s;
    s.n = n;
    s.values.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(config.replicates));
    for (std::size_t i = 0; i < config.replicates; ++i) s.seeds.push_back(replicate_seed(config.seed, n, i).value);
    sets.push_back(std::move(s));
  }

  std::vector<Row> rows;
  json check_pass = json::object();
  const Tolerances& tol = config.tolerances;
  const GammaResult gamma = gamma_exponent(config.gamma);
  rows.push_back({"gamma", std::nullopt, "gamma", gamma.gamma, std::nullopt, std::nullopt, std::nullopt});
  rows.push_back({"gamma", std::nullopt, "exponent", gamma.exponent, std::nullopt, std::nullopt, std::nullopt});
  rows.push_back({"gamma", std::nullopt, "branch", static_cast<double>(gamma.branch), std::nullopt, std::nullopt,
                  std::nullopt});

  if (config.has_check("variance")) {
    const VarianceReport r = variance_asymptotic_check(sets, tol);
    for (const auto& v : r.rows) {
      rows.push_back({"variance", v.n, "var_per_n", v.var_per_n, v.var_se, std::nullopt, std::nullopt});
      rows.push_back({"variance", v.n, "mean_per_n", v.mean_per_n, v.mean_se, std::nullopt, std::nullopt});
    }
    rows.push_back({"variance", r.rows.back().n, "last_gap", r.last_gap, std::nullopt, r.allowed, r.pass});
    check_pass["variance"] = r.pass;
  }
  if (config.has_check("cumulants")) {
    for (const auto& s : sets) {
      const CumulantReport c = sample_cumulants(s, config.kmax);
      for (int k = 1; k <= c.kmax(); ++k) {
        const auto kk = static_cast<std::size_t>(k - 1);
        rows.push_back({"cumulants", s.n, "k=" + std::to_string(k), c.kappa[kk], c.stderr_[kk], std::nullopt,
                        std::nullopt});
      }
    }
  }
  if (config.has_check("cumulant_growth")) {
    const GrowthReport r = cumulant_growth_check(sets, config.kmax, tol);
    for (const auto& g : r.rows) {
      rows.push_back({"cumulant_growth", g.n, "k=" + std::to_string(g.k), g.ratio, g.ratio_se, std::nullopt,
                      std::nullopt});
    }
    for (std::size_t k = 0; k < r.pass_by_k.size(); ++k) {
      rows.push_back({"cumulant_growth", std::nullopt, "k=" + std::to_string(k + 1), std::nullopt, std::nullopt,
                      tol.growth_factor, r.pass_by_k[k] != 0});
    }
    check_pass["cumulant_growth"] = r.pass;
  }
  if (config.has_check("clt")) {
    const CltReport r = clt_check(sets, tol);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const auto& k = r.rows[i];
      std::optional<double> bound;
      if (i > 0) bound = r.rows[i - 1].ks + tol.ks_noise_factor * k.noise_floor;
      rows.push_back({"clt", k.n, "ks", k.ks, k.noise_floor, bound, k.pass});
    }
    rows.push_back({"clt", std::nullopt, "improved", std::nullopt, std::nullopt, std::nullopt, r.improved});
    check_pass["clt"] = r.pass;
  }
  if (config.has_check("concentration")) {
    const ConcentrationReport r = concentration_check(sets, config.gamma, config.concentration_s);
    for (const auto& t : r.rows) {
      rows.push_back({"concentration", t.n, "s=" + format_double(t.s), t.frequency, std::nullopt, t.bound, t.pass});
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
      rows.push_back({"concentration", sets[i].n, "calibrated_C", r.calibrated_c[i], std::nullopt, 1.0,
                      r.calibrated_c[i] >= 1.0});
    }
    rows.push_back({"concentration", std::nullopt, "monotone", std::nullopt, std::nullopt, std::nullopt, r.monotone});
    check_pass["concentration"] = r.pass;
  }
  if (config.has_check("slln")) {
    std::vector<double> trajectory;
    std::vector<double> means;
    for (double n : config.slln.n_grid) {
      const auto& v = values_at(n);
      trajectory.push_back(v.front());
      double m = 0.0;
      for (std::size_t i = 0; i < config.slln.replicates; ++i) m += v[i];
      means.push_back(m / static_cast<double>(config.slln.replicates));
    }
    const SllnReport r = slln_check(config.slln.n_grid, trajectory, means, config.slln.eps);
    for (const auto& s : r.rows) {
      rows.push_back({"slln", s.n, "normalized", s.normalized, std::nullopt, std::nullopt, std::nullopt});
    }
    rows.push_back({"slln", std::nullopt, "eps=" + format_double(config.slln.eps), std::nullopt, std::nullopt,
                    std::nullopt, r.pass});
    check_pass["slln"] = r.pass;
  }
  if (want_cluster) {
    cluster_configs.resize(config.replicates);
    cluster_scores.resize(config.replicates);
    const double margin = stabilization_radius_bound(config.score).value_or(0.0);
    const ClusterDecayReport r = cluster_decay_check(cluster_configs, cluster_scores, config.cluster.edges,
                                                     config.cluster.min_pairs, margin, tol);
    for (const auto& w : r.warnings) log.warn("cluster_decay", w);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const auto& c = r.rows[i];
      std::optional<bool> pass;
      if (i + 1 == r.rows.size()) pass = r.pass;
      rows.push_back({"cluster_decay", cluster_n, "r=" + format_double(c.r_lo) + ".." + format_double(c.r_hi), c.gap,
                      c.gap_se, tol.n_stderr * c.gap_se, pass});
    }
    check_pass["cluster_decay"] = r.pass;
  }

  const auto dir = options.out / "results" / config.digest;
  std::filesystem::create_directories(dir);
  RunSummary summary;
  summary.csv = dir / "results.csv";
  summary.json = dir / "summary.json";
  {
    std::ofstream csv(summary.csv, std::ios::binary | std::ios::trunc);
    if (!csv) throw Error(ErrorKind::file, "cannot write " + summary.csv.string());
    csv << kCsvHeader << "\n";
    for (const auto& r : rows) {
      csv << config.digest << ',' << config.seed << ',' << r.check << ',' << cell(r.n) << ',' << r.param << ','
          << cell(r.value) << ',' << cell(r.stderr_) << ',' << cell(r.bound) << ','
          << (r.pass ? (*r.pass ? "true" : "false") : "") << "\n";
    }
  }
  for (const auto& [check, ok] : check_pass.items()) {
    if (!ok.get<bool>()) summary.pass = false;
  }
  summary.rows = rows.size();

  json seeds = json::object();
  for (const auto& [n, count] : sample_plan(config)) {
    json list = json::array();
    for (std::size_t i = 0; i < count; ++i) list.push_back(replicate_seed(config.seed, n, i).value);
    seeds[format_double(n)] = std::move(list);
  }
  json out;
  out["schema"] = kSummarySchema;
  out["name"] = config.name;
  out["digest"] = config.digest;
  out["sample_digest"] = config.sample_digest;
  out["root_seed"] = config.seed;
  out["config"] = json::parse(config.canonical);
  out["gamma"] = gamma_json(config.gamma, gamma);
  out["seed_ledger"] = {{"rule", "derive_seed(root, {bit_cast<u64>(n), replicate})"}, {"seeds", seeds}};
  out["checks"] = check_pass;
  out["pass"] = summary.pass;
  out["rows"] = summary.rows;
  out["warnings"] = log.warnings();
  out["created"] = now_utc();
  {
    std::ofstream js(summary.json, std::ios::binary | std::ios::trunc);
    if (!js) throw Error(ErrorKind::file, "cannot write " + summary.json.string());
    js << out.dump(2) << "\n";
  }
  return summary;
}

}  // namespace geocume
