// Full-size acceptance run: one PASS/FAIL line per criterion on stdout,
// progress on stderr. Exit status 0 only when every criterion passes.

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>

#include "modwalk/cli/verify.hpp"

int main(int argc, char** argv) {
  modwalk::cli::VerifyOptions o;
  o.suite = modwalk::cli::Suite::Full;
  o.log = &std::cerr;
  if (const char* w = std::getenv("MODWALK_WORKERS")) o.workers = std::max(1, std::atoi(w));
  for (int i = 1; i < argc; ++i) o.only.emplace_back(argv[i]);
  const auto results = modwalk::cli::run_verify(o);
  modwalk::cli::print_results(results, std::cout);
  return modwalk::cli::verify_exit_code(results);
}
