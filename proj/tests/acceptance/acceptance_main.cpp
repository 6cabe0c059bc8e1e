// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: fbmvar_acceptance [A1 ... A10] [--json <file>]

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fbmvar/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace fbmvar::acceptance;
  std::vector<std::string> ids;
  std::string json_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--json" && i + 1 < argc) {
      json_path = argv[++i];
    } else if (is_criterion(arg)) {
      ids.push_back(arg);
    } else {
      std::cerr << "unknown argument: " << arg << '\n';
      return 2;
    }
  }
  if (ids.empty()) ids = criterion_ids();

  const SuiteConfig config;
  fbmvar::Json all = fbmvar::Json::array();
  int failed = 0;
  for (const auto& id : ids) {
    const CriterionResult result = run_criterion(id, config);
    std::cout << result.summary() << std::endl;
    for (const auto& a : result.attempts) {
      for (const auto& c : a.report.checks) {
        std::printf("    seed %llu  %-34s %-12.6g %-2s %-10.6g %s\n",
                    static_cast<unsigned long long>(a.seed), c.name.c_str(), c.value,
                    c.relation.c_str(), c.threshold, c.pass ? "ok" : "FAILED");
      }
    }
    if (!result.passed) ++failed;
    all.push_back(result.to_json());
  }
  std::cout << (ids.size() - failed) << '/' << ids.size() << " criteria passed" << std::endl;
  if (!json_path.empty()) std::ofstream(json_path) << all.dump(2) << '\n';
  return failed == 0 ? 0 : 1;
}
