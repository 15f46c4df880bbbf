// Acceptance sheet: one PASS/FAIL line per criterion under the reconstruction
// preset. With --seeds it instead checks that the verdicts of the selected
// criteria do not change across seeds.
#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "validation.hpp"

using namespace thzrel::cli;

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::uint64_t seed = 1;
  unsigned seeds = 0;
  std::vector<std::string> sets;
  app.add_option("--only", only, "criterion ids")->delimiter(',');
  app.add_option("--seed", seed, "simulation and sampling seed");
  app.add_option("--seeds", seeds, "verdict stability across seeds seed .. seed+N-1");
  app.add_option("--set", sets, "config override key=value");
  CLI11_PARSE(app, argc, argv);

  if (seeds == 0) {
    sets.push_back("sim.seed=" + std::to_string(seed));
    const auto results = run_validation(load_config(std::nullopt, std::nullopt, sets), only);
    bool all = true;
    for (const auto& r : results) {
      std::cout << (r.pass ? "[PASS] " : "[FAIL] ");
      print_result(std::cout, r);
      all = all && r.pass;
    }
    std::cout << results.size() << " criteria, " << (all ? "all passed" : "some failed") << '\n';
    return all ? 0 : 1;
  }

  std::vector<bool> reference;
  bool stable = true;
  for (unsigned i = 0; i < seeds; ++i) {
    auto s = sets;
    s.push_back("sim.seed=" + std::to_string(seed + i));
    const auto results = run_validation(load_config(std::nullopt, std::nullopt, s), only);
    std::vector<bool> verdicts;
    std::cout << "seed " << seed + i << ':';
    for (const auto& r : results) {
      verdicts.push_back(r.pass);
      std::cout << " c" << r.id << '=' << (r.pass ? "PASS" : "FAIL");
      for (const auto& [k, v] : r.measured) {
        if (k == "l1" || k == "ks" || k == "mean_rel_error" || k == "variance_rel_error") {
          std::cout << '(' << k << '=' << v << ')';
        }
      }
    }
    std::cout << '\n';
    if (i == 0) reference = verdicts;
    stable = stable && verdicts == reference;
  }
  std::cout << (stable ? "verdicts identical across seeds" : "verdicts CHANGED across seeds") << '\n';
  return stable ? 0 : 1;
}
