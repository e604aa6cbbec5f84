// Runs the acceptance suite and prints one PASS/FAIL line per criterion.
// Usage: acceptance [--verbose] [--threads N] [key ...]

#include "bench/acceptance.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <cstring>
#include <exception>

int main(int argc, char** argv) {
  dircast::bench::AcceptanceOptions opts;
  bool verbose = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--verbose") == 0) {
      verbose = true;
    } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      opts.threads = static_cast<unsigned>(std::strtoul(argv[++i], nullptr, 10));
    } else {
      opts.only.emplace_back(argv[i]);
    }
  }
  opts.on_result = [&](const dircast::bench::CriterionResult& r) {
    fmt::print("{} {:>2} {:<20} {} ({:.1f}s)\n", r.passed ? "PASS" : "FAIL", r.id, r.key, r.title, r.seconds);
    if (verbose || !r.passed) {
      for (const auto& d : r.details) fmt::print("        {}\n", d);
    }
    std::fflush(stdout);
  };
  try {
    auto results = dircast::bench::run_acceptance(opts);
    std::size_t passed = 0;
    for (const auto& r : results) passed += r.passed;
    fmt::print("{}/{} criteria passed\n", passed, results.size());
    return passed == results.size() ? 0 : 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "acceptance: {}\n", e.what());
    return 2;
  }
}
