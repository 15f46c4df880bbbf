#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"
#include "thzrel/error.hpp"
#include "validation.hpp"

namespace fs = std::filesystem;
using namespace thzrel;
using namespace thzrel::cli;

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> grid_points;
  std::optional<std::size_t> replications;
  std::vector<std::string> assignments;
  // simulate
  std::optional<std::string> mode;
  bool records = false;
  // validate
  std::vector<int> only;
};

std::ofstream open_output(const ExperimentConfig& cfg, const std::string& name) {
  const fs::path dir = cfg.raw("output.dir");
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw ConfigError("cannot write " + (dir / name).string());
  return out;
}

std::string path_of(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.raw("output.dir")) / name).string();
}

int cmd_txpdf(const ExperimentConfig& cfg) {
  const Scenario s = scenario_from(cfg);
  const SimConfig sim = sim_config_from(cfg, s);
  const TxPdfResult r = run_txpdf(s, sim, cfg.count("txpdf.points"),
                                  cfg.number("txpdf.tail_sigmas"), cfg.count("txpdf.samples"));
  std::ostringstream summary;
  summary << "l1_distance = " << r.l1;
  auto out = open_output(cfg, "txpdf.csv");
  write_header(out, provenance(cfg, "txpdf",
                               {summary.str(), "analytic_mass = " + std::to_string(r.analytic_mass),
                                "gaussian_mass = " + std::to_string(r.gaussian_mass)}));
  write_txpdf_csv(out, r);
  std::cout << "wrote " << path_of(cfg, "txpdf.csv") << '\n'
            << summary.str() << " (" << r.samples << " simulated packets)\n";
  return 0;
}

int cmd_sweep_bandwidth(const ExperimentConfig& cfg) {
  const Scenario s = scenario_from(cfg);
  const auto bandwidths =
      linspace(cfg.number("sweep_bandwidth.min_hz"), cfg.number("sweep_bandwidth.max_hz"),
               cfg.count("sweep_bandwidth.points"));
  const auto rows = sweep_bandwidth(s, bandwidths);
  const auto h = bandwidth_headline(rows, s.target);

  std::vector<std::string> extra;
  auto ghz = [](std::optional<double> v) {
    return v ? std::to_string(*v / 1e9) + " GHz" : std::string("not reached");
  };
  extra.push_back("first bandwidth with reliability >= target at largest delta: " +
                  ghz(h.first_target_hz));
  extra.push_back("first bandwidth with mean Q2 delay < mean Q1 delay: " + ghz(h.q2_below_q1_hz));
  auto out = open_output(cfg, "sweep_bandwidth.csv");
  write_header(out, provenance(cfg, "sweep-bandwidth", extra));
  write_bandwidth_csv(out, rows, s.deltas_s);
  std::cout << "wrote " << path_of(cfg, "sweep_bandwidth.csv") << '\n';
  for (const auto& e : extra) std::cout << e << '\n';
  if (h.rate_at_first_bps) {
    std::cout << "link rate at that bandwidth: " << *h.rate_at_first_bps / 1e9 << " Gbps\n";
  }
  return 0;
}

int cmd_sweep_region(const ExperimentConfig& cfg) {
  const Scenario s = scenario_from(cfg);
  const auto omegas = linspace(cfg.number("sweep_region.omega_min_m"),
                               cfg.number("sweep_region.omega_max_m"),
                               cfg.count("sweep_region.points"));
  const auto d0s = cfg.numbers("sweep_region.link_distances_m");
  const double delta = cfg.number("sweep_region.delta_s");
  const auto rows = sweep_region(s, omegas, d0s, delta);

  std::vector<std::string> extra;
  for (double d0 : d0s) {
    std::ostringstream os;
    os << "steepest slope at d0 = " << d0 << " m: " << steepest_drop(rows, d0) << " per m";
    extra.push_back(os.str());
  }
  auto out = open_output(cfg, "sweep_region.csv");
  write_header(out, provenance(cfg, "sweep-region", extra));
  write_region_csv(out, rows, delta);
  std::cout << "wrote " << path_of(cfg, "sweep_region.csv") << '\n';
  for (const auto& e : extra) std::cout << e << '\n';
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, bool write_records) {
  const Scenario s = scenario_from(cfg);
  const SimConfig sim = sim_config_from(cfg, s);
  const auto runs = run_replications(sim, cfg.count("sim.replications"));

  SimSummary merged;
  for (const auto& r : runs) merged.merge(r.summary);

  std::vector<std::string> extra{"interference_mode = " + to_string(sim.mode)};
  try {
    const DelayAnalysis a = s.analyze();
    for (double d : s.deltas_s) {
      std::ostringstream os;
      os << std::setprecision(10) << "analytic reliability at " << d << " s = " << a.reliability(d);
      extra.push_back(os.str());
    }
    extra.push_back("analytic mean_e2e_s = " + std::to_string(a.mean_e2e_s));
  } catch (const StabilityError& e) {
    extra.push_back(std::string("analytic model: ") + e.what());
  }

  {
    auto out = open_output(cfg, "sim_summary.txt");
    write_header(out, provenance(cfg, "simulate", extra));
    write_summary(out, merged);
  }
  {
    auto out = open_output(cfg, "sim_replications.csv");
    write_header(out, provenance(cfg, "simulate"));
    out << "seed,requests,mean_q1_delay_s,mean_q2_delay_s,mean_e2e_s";
    for (double d : s.deltas_s) out << ",reliability_" << d * 1e3 << "ms";
    out << '\n' << std::setprecision(12);
    for (const auto& r : runs) {
      out << r.seed << ',' << r.summary.count << ',' << r.summary.mean_q1_delay_s() << ','
          << r.summary.mean_q2_delay_s() << ',' << r.summary.mean_e2e_s();
      for (std::size_t k = 0; k < s.deltas_s.size(); ++k) out << ',' << r.summary.reliability(k);
      out << '\n';
    }
  }
  if (write_records && !runs.empty()) {
    auto out = open_output(cfg, "sim_records.csv");
    write_header(out, provenance(cfg, "simulate", {"records of seed " +
                                                   std::to_string(runs.front().seed)}));
    write_records_csv(out, runs.front().records);
  }
  write_summary(std::cout, merged);
  for (const auto& e : extra) std::cout << e << '\n';
  return 0;
}

int cmd_validate(const ExperimentConfig& cfg, const std::vector<int>& only) {
  const auto results = run_validation(cfg, only, &std::cout);
  auto out = open_output(cfg, "validation.txt");
  write_header(out, provenance(cfg, "validate"));
  bool all = true;
  for (const auto& r : results) {
    print_result(out, r);
    all = all && r.pass;
  }
  std::cout << (all ? "all criteria passed" : "some criteria FAILED") << '\n';
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay and reliability of VR traffic over a THz small-cell downlink"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;

  app.add_option("--config", f.config, "config file (INI style)")->check(CLI::ExistingFile);
  app.add_option("--preset", f.preset, "reconstruction (default) | none");
  app.add_option("--seed", f.seed, "base seed");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--grid-points", f.grid_points,
                 "txpdf: grid points; other commands: points per delta_max");
  app.add_option("--replications", f.replications, "independent simulation replications");
  app.add_option("--set", f.assignments, "override any key, e.g. --set channel.bandwidth_hz=12e9");

  auto* txpdf = app.add_subcommand("txpdf", "transmission delay pdf, analytic vs simulated");
  auto* sweep_bw = app.add_subcommand("sweep-bandwidth", "reliability and mean delays versus W");
  auto* sweep_region = app.add_subcommand("sweep-region", "reliability versus Omega per d0");
  auto* simulate = app.add_subcommand("simulate", "discrete-event simulation of the tandem");
  simulate->add_option("--mode", f.mode, "gaussian | exact_geometry | frozen_geometry");
  simulate->add_flag("--records", f.records, "also write per-request records");
  auto* validate = app.add_subcommand("validate", "run the acceptance criteria");
  validate->add_option("--only", f.only, "criterion ids to run")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::vector<std::string> assignments = f.assignments;
    if (f.seed) assignments.push_back("sim.seed=" + std::to_string(*f.seed));
    if (f.out) assignments.push_back("output.dir=" + *f.out);
    if (f.replications) assignments.push_back("sim.replications=" + std::to_string(*f.replications));
    if (f.mode) assignments.push_back("sim.mode=" + *f.mode);
    if (f.grid_points) {
      const std::string key = txpdf->parsed() ? "txpdf.points" : "grid.points_per_delta";
      assignments.push_back(key + "=" + std::to_string(*f.grid_points));
    }
    std::optional<fs::path> file;
    if (f.config) file = *f.config;
    const ExperimentConfig cfg = load_config(file, f.preset, assignments);

    if (txpdf->parsed()) return cmd_txpdf(cfg);
    if (sweep_bw->parsed()) return cmd_sweep_bandwidth(cfg);
    if (sweep_region->parsed()) return cmd_sweep_region(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg, f.records);
    if (validate->parsed()) return cmd_validate(cfg, f.only);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const StabilityError& e) {
    std::cerr << "unstable configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
