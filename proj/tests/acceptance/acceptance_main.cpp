// One PASS/FAIL line per acceptance criterion at the default desk scale.
// Optional arguments select criteria by number.
#include <cstdlib>
#include <iostream>

#include "fpa/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= fpa::AcceptanceSuite::kCriteria; ++i) ids.push_back(i);

  fpa::AcceptanceSuite suite(fpa::parse_config(""));
  int failed = 0;
  suite.run_all(ids, [&](const fpa::CriterionResult& r) {
    std::cout << fpa::format_result(r) << std::endl;
    failed += !r.passed;
  });
  std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
