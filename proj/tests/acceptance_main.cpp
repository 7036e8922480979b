#include <cstdio>

#include "revqe/verify.hpp"

int main() {
  const std::vector<revqe::CheckResult> results = revqe::run_acceptance();
  int failures = 0;
  for (const auto& r : results) {
    std::printf("%s  %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    if (!r.passed) ++failures;
  }
  std::printf("%zu checks, %d failed\n", results.size(), failures);
  return failures == 0 ? 0 : 1;
}
