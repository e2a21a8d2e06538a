// Runs every acceptance criterion at full budget and prints one line each.
// Usage: acceptance [out-dir]

#include <iostream>

#include "oht/acceptance.hpp"

int main(int argc, char** argv) {
  oht::acceptance::SuiteOptions opt;
  opt.out_dir = argc > 1 ? argv[1] : "acceptance-out";
  bool all = true;
  oht::acceptance::run_suite(opt, [&](const oht::acceptance::CheckResult& r) {
    std::cout << oht::acceptance::format_line(r) << std::endl;
    all = all && r.passed;
  });
  std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
  return all ? 0 : 1;
}
