#pragma once

#include "cpext/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cpext {

struct SuiteConfig {
  uint64_t seed = 20240901;
  int count_cap = 1 << 30;  // per-property cap on instance counts; 0 runs nothing
  int max_block = 4;        // largest algebra block size
  int max_hdim = 6;         // largest Hilbert-space dimension
  Tolerances tol;
};

struct PropertyResult {
  std::string name;
  int ran = 0;
  int failed = 0;
  std::string detail;  // first failure, empty when clean

  bool pass() const { return failed == 0; }
};

/// Module-level invariants and properties (seeded, deterministic).
std::vector<PropertyResult> run_module_properties(const SuiteConfig& cfg);

/// The acceptance criteria, in order. Counts are fixed by the criteria and
/// only reduced by cfg.count_cap.
std::vector<PropertyResult> run_acceptance_criteria(const SuiteConfig& cfg);

}  // namespace cpext
