#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace geocume {

struct VerifyCase {
  std::string suite;
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  /// JSON description of the first failing case, empty when all pass.
  std::string first_failure;

  bool pass() const { return failures == 0; }
};

struct VerifyReport {
  std::vector<VerifyCase> cases;

  bool pass() const;
};

inline constexpr const char* kVerifySuites[] = {"combinatorics", "matrix", "sigeom", "all"};

/// Runs the deterministic identity and bound audits of one suite with fixed seeds.
/// Throws an argument error for an unknown suite name.
VerifyReport cmd_verify(const std::string& suite);

}  // namespace geocume
