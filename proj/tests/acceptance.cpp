// Acceptance runner: one PASS/FAIL line per criterion, exit 0 iff all pass.
//
//   acceptance [--only 1,4,...] [--seed N]

#include "layerpot/errors.hpp"
#include "layerpot/experiments.hpp"
#include "layerpot/io.hpp"

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

using namespace layerpot;

namespace {

// Wall-clock budgets in seconds; 0 means none.
double budget_for(int c) {
  switch (c) {
    case 1: return 1;
    case 2: return 1;
    case 3: return 30;
    case 4: return 300;
    case 5: return 600;
    case 6: return 60;
    case 7: return 120;
    case 8: return 60;
    default: return 0;
  }
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  std::uint64_t seed = 7;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      for (double v : io::parse_list(argv[++i])) only.insert(static_cast<int>(v));
    } else if (a == "--seed" && i + 1 < argc) {
      seed = std::stoull(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only 1,2,...] [--seed N]\n";
      return 2;
    }
  }

  std::map<std::string, exp::ReportBundle> cache;
  auto run = [&](const std::string& name) -> const exp::ReportBundle& {
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    exp::ExperimentConfig cfg;
    cfg.experiment = name;
    cfg.seed = seed;
    return cache.emplace(name, exp::run_experiment(cfg)).first->second;
  };

  int failed = 0;
  for (int c = 1; c <= 10; ++c) {
    if (!only.empty() && !only.count(c)) continue;
    const std::string name = exp::experiment_for_criterion(c);
    Outcome out;
    std::ostringstream d;
    try {
      const auto& r = run(name);
      int n = 0;
      for (const auto& ch : r.checks) {
        if (ch.criterion != c) continue;
        ++n;
        if (!ch.pass) {
          out.pass = false;
          d << "; failed: " << ch.name << " (measured " << io::format_double(ch.measured) << ", threshold "
            << io::format_double(ch.threshold) << ")";
        }
      }
      if (n == 0) {
        out.pass = false;
        d << "; no checks reported";
      }
      const double b = budget_for(c);
      if (b > 0 && r.runtime_s > b) {
        out.pass = false;
        d << "; runtime " << r.runtime_s << " s over budget " << b << " s";
      }
      if (c == 10) {
        // Determinism: a second run must reproduce the summary byte for byte.
        exp::ExperimentConfig cfg;
        cfg.experiment = name;
        cfg.seed = seed;
        if (exp::run_experiment(cfg).summary_json != r.summary_json) {
          out.pass = false;
          d << "; summary differs between two runs";
        } else {
          d << "; deterministic";
        }
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s, %d checks, %.2f s", name.c_str(), n, r.runtime_s);
      out.detail = buf + d.str();
    } catch (const Error& e) {
      out.pass = false;
      out.detail = name + ": " + e.what();
    }
    if (!out.pass) ++failed;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << c << ": " << out.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
