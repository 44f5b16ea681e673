#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geocume {

enum class ErrorKind {
  size,           // input exceeds an enumeration or memory guard
  argument,       // malformed or inconsistent argument
  missing_entry,  // incomplete moment table
  degenerate,     // duplicate points, tied marks
  kernel,         // kernel fails PSD / contraction requirements
  domain,         // parameter outside its mathematical domain
  sample_size,    // too few replicates for the requested estimator
  variance,       // zero variance where a limit theorem needs it positive
  divergence,     // integral does not converge for the given exponent
  stale_cache,    // cache entry written under a different digest
  config,         // invalid experiment configuration
  file,           // missing or unreadable file
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::size: return "size";
    case ErrorKind::argument: return "argument";
    case ErrorKind::missing_entry: return "missing-entry";
    case ErrorKind::degenerate: return "degenerate-input";
    case ErrorKind::kernel: return "kernel";
    case ErrorKind::domain: return "domain";
    case ErrorKind::sample_size: return "sample-size";
    case ErrorKind::variance: return "variance";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::stale_cache: return "stale-cache";
    case ErrorKind::config: return "config";
    case ErrorKind::file: return "file";
  }
  return "unknown";
}

}  // namespace geocume
