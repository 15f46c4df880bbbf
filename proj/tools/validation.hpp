#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"

namespace thzrel::cli {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<std::pair<std::string, double>> measured;
  std::string note;
  double seconds = 0.0;
};

/// One "criterion=<id> status=PASS|FAIL key=value ..." line.
void print_result(std::ostream& out, const CriterionResult& r);

/// Runs the acceptance criteria (all when `only` is empty) against the
/// resolved config. Each result is printed to `live` as soon as it is known.
std::vector<CriterionResult> run_validation(const ExperimentConfig& cfg,
                                            const std::vector<int>& only = {},
                                            std::ostream* live = nullptr);

// Building blocks, exposed so tests can feed them tampered inputs.

using TxPdf = std::function<double(double, const ChannelParams&, const InterferenceStats&)>;

/// |trapezoid mass of `pdf` on `grid` - P(I > -N0)|.
double normalization_error(const Scenario& s, const Grid& grid, const TxPdf& pdf);

/// Largest relative gap between zeta and a central difference of upsilon
/// over `points` delays spanning the transmission delay support.
double max_zeta_relative_error(const Scenario& s, std::size_t points);

/// Max abs gap between the queueing series driven by an exponential service
/// density and the closed-form M/M/1 waiting CDF 1 - rho exp(-(mu - lambda) t).
double exponential_series_error(double arrival_rate, double service_rate, const GridOptions& grid);

struct GeometryCheck {
  std::size_t deployments = 0;
  std::size_t hard_core_violations = 0;  // deployments with a pair closer than r
  double mean_w = 0.0;
  double variance_w2 = 0.0;
  double mean_ratio = 0.0;      // empirical / closed form
  double variance_ratio = 0.0;
  double campbell_mean_ratio = 0.0;  // empirical / Poisson-in-annulus moments
  double campbell_variance_ratio = 0.0;
};

GeometryCheck check_geometry(const DeploymentParams& params, double tx_power_w,
                             double aperture_m2, std::size_t deployments, std::uint64_t seed);

/// Smallest pairwise distance of a deployment (infinity for < 2 points).
double min_pairwise_distance(const Deployment& d);

}  // namespace thzrel::cli
