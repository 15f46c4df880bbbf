#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "thzrel/random.hpp"

namespace thzrel {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct DeploymentParams {
  double intensity_per_m2 = 0.01;        // eta, retained intensity
  double hard_core_m = 5.0;              // r
  double interference_radius_m = 140.0;  // Omega
  double area_side_m = 20.0;             // square [0, side]^2

  /// eta, r, side > 0 and Omega > r.
  void validate() const;
  Point center() const { return {area_side_m / 2.0, area_side_m / 2.0}; }
};

/// A realized SBS layout. Every pairwise distance is >= params.hard_core_m and
/// every point lies inside the square.
struct Deployment {
  std::vector<Point> positions;
  DeploymentParams params;
};

/// Mean and variance of the Gaussian interference approximation.
struct InterferenceStats {
  double mean_w = 0.0;
  double variance_w2 = 0.0;

  double stddev_w() const;
};

/// Intensity of the parent Poisson process whose Matern type-II thinning
/// retains `retained_intensity`: -ln(1 - eta pi r^2) / (pi r^2).
/// Throws DomainError if eta pi r^2 >= 1.
double parent_intensity(double retained_intensity, double hard_core_m);

/// Matern type-II hard-core sample on the square. Parents are drawn on the
/// square grown by r on every side so that points near the edge see the same
/// competition as interior points; only retained points inside the square are
/// returned. Deterministic in `seed`.
Deployment sample_mhcpp(const DeploymentParams& params, std::uint64_t seed);

/// Same, drawing from a caller-owned engine.
Deployment sample_mhcpp(const DeploymentParams& params, Engine& engine);

/// The same process on a square wide enough to hold the whole interference
/// disk around its center (side max(area_side, 2 Omega)).
DeploymentParams interference_window(const DeploymentParams& params);

/// Distances from `user` to every deployed SBS with r <= d <= Omega. The
/// serving SBS is conditioned on and is never part of the deployment.
std::vector<double> interferer_distances(const Deployment& deployment, Point user);

/// sum p A0 d_i^-2, the combined (attenuated + absorption-noise) interference.
double exact_interference(std::span<const double> distances_m, double tx_power_w,
                          double aperture_m2);

/// Closed-form mean and variance of the combined interference:
///   mean     = p A0 (ln Omega - ln r) / (Omega^2 - r^2) * (pi Omega^2 eta / 2)
///   variance = (p A0)^2 (pi Omega^2 eta / 2) / (2 r^2 Omega^2)
InterferenceStats interference_stats(const DeploymentParams& params, double tx_power_w,
                                     double aperture_m2);

/// Streams Normal(mean, variance) draws clipped at zero.
class GaussianInterferenceSampler {
 public:
  GaussianInterferenceSampler(const InterferenceStats& stats, std::uint64_t seed,
                              std::uint64_t stream = 0);

  double operator()();
  /// Unclipped draw, for moment checks.
  double raw();

 private:
  Engine engine_;
  std::normal_distribution<double> normal_;
};

/// One clipped draw, deterministic in `seed`.
double sample_interference_gaussian(const InterferenceStats& stats, std::uint64_t seed);

/// CSV with header "x_m,y_m", one SBS per row.
void write_deployment_csv(std::ostream& out, const Deployment& deployment);

}  // namespace thzrel
