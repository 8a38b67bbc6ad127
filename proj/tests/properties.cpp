// Module-level invariants and properties, one pass/fail line each.

#include "cpext/suite.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

int main(int argc, char** argv) {
  cpext::SuiteConfig cfg;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::strcmp(argv[i], "--seed") == 0) cfg.seed = std::strtoull(argv[i + 1], nullptr, 10);
    if (std::strcmp(argv[i], "--count") == 0) cfg.count_cap = std::atoi(argv[i + 1]);
  }

  bool all_pass = true;
  for (const cpext::PropertyResult& r : cpext::run_module_properties(cfg)) {
    const bool pass = r.pass();
    all_pass = all_pass && pass;
    std::printf("%s  %-42s (%d/%d)%s%s\n", pass ? "PASS" : "FAIL", r.name.c_str(),
                r.ran - r.failed, r.ran, r.detail.empty() ? "" : "  -- ", r.detail.c_str());
  }
  return all_pass ? 0 : 1;
}
