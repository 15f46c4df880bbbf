#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "thzrel/channel.hpp"
#include "thzrel/delay.hpp"
#include "thzrel/geometry.hpp"
#include "thzrel/simulator.hpp"

namespace thzrel::cli {

/// Everything an analytic run needs, resolved and validated from a config.
struct Scenario {
  ChannelParams channel;
  DeploymentParams deployment;
  double sigma_scale = 1.0;
  double arrival_rate = 0.0;
  double processing_rate = 0.0;
  std::optional<double> q2_arrival_rate;
  GridOptions grid;
  std::vector<double> deltas_s;
  double target = 0.99999;

  InterferenceStats stats() const;
  DelayAnalysis analyze() const;
};

/// Throws ConfigError for missing keys and for values the models reject.
Scenario scenario_from(const ExperimentConfig& cfg);
SimConfig sim_config_from(const ExperimentConfig& cfg, const Scenario& s);

std::vector<double> linspace(double lo, double hi, std::size_t points);

struct TxPdfResult {
  TabulatedDist analytic;
  TabulatedDist simulated;
  double l1 = 0.0;
  double analytic_mass = 0.0;  // trapezoid mass on the grid
  double gaussian_mass = 0.0;  // P(I > -N0)
  std::size_t samples = 0;
};

TxPdfResult run_txpdf(const Scenario& s, const SimConfig& sim, std::size_t points,
                      double tail_sigmas, std::size_t samples);

struct BandwidthRow {
  double bandwidth_hz = 0.0;
  bool stable = false;
  double rate_at_mean_bps = 0.0;  // capacity at the mean interference
  double utilization = 0.0;
  std::vector<double> reliability;  // one per delta; 0 when unstable
  double mean_q1_delay_s = 0.0;
  double mean_q2_delay_s = 0.0;
  double mean_e2e_s = 0.0;
};

std::vector<BandwidthRow> sweep_bandwidth(const Scenario& s, const std::vector<double>& bandwidths,
                                          unsigned threads = 0);

struct BandwidthHeadline {
  std::optional<double> first_target_hz;   // first W with reliability(max delta) >= target
  std::optional<double> rate_at_first_bps;
  std::optional<double> q2_below_q1_hz;    // first W with mean Q2 delay < mean Q1 delay
};

BandwidthHeadline bandwidth_headline(const std::vector<BandwidthRow>& rows, double target);

struct RegionRow {
  double link_distance_m = 0.0;
  double omega_m = 0.0;
  double mean_w = 0.0;
  double stddev_w = 0.0;
  bool stable = false;
  double reliability = 0.0;
  double slope_per_m = 0.0;  // d reliability / d Omega, central difference
};

/// Rejects any Omega <= hard_core_m with a ConfigError before computing.
std::vector<RegionRow> sweep_region(const Scenario& s, const std::vector<double>& omegas,
                                    const std::vector<double>& link_distances, double delta_s,
                                    unsigned threads = 0);

/// Steepest (most negative) slope of one d0 curve.
double steepest_drop(const std::vector<RegionRow>& rows, double link_distance_m);

/// '#'-prefixed provenance lines: command, resolved keys and derived values.
std::vector<std::string> provenance(const ExperimentConfig& cfg, const std::string& command,
                                    const std::vector<std::string>& extra = {});

void write_header(std::ostream& out, const std::vector<std::string>& lines);
void write_txpdf_csv(std::ostream& out, const TxPdfResult& r);
void write_bandwidth_csv(std::ostream& out, const std::vector<BandwidthRow>& rows,
                         const std::vector<double>& deltas_s);
void write_region_csv(std::ostream& out, const std::vector<RegionRow>& rows, double delta_s);

}  // namespace thzrel::cli
