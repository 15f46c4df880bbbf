#pragma once

#include <functional>
#include <optional>

#include "thzrel/channel.hpp"
#include "thzrel/geometry.hpp"
#include "thzrel/numerics.hpp"

namespace thzrel {

/// Rates of the two-queue tandem: Q1 (M/M/1, image processing) feeding
/// Q2 (M/G/1, THz transmission).
struct QueueParams {
  double arrival_rate = 0.0;     // lambda1, requests/s
  double processing_rate = 0.0;  // mu1, requests/s
  double q2_arrival_rate = 0.0;  // lambda2
  double q2_service_rate = 0.0;  // mu2 = 1 / E[alpha]
  double utilization = 0.0;      // rho = lambda2 / mu2
  int truncation_order = 0;      // Gamma
  double eps_tail = 1e-9;
};

/// Smallest Gamma with rho^(Gamma+1) / (1 - rho) < eps_tail.
int truncation_order(double rho, double eps_tail);

/// Validates stability (mu1 > lambda1, 0 < rho < 1) and derives rho and Gamma.
/// Throws StabilityError.
QueueParams make_queue_params(double lambda1, double mu1, double lambda2, double mu2,
                              double eps_tail = 1e-9);

/// M/M/1 sojourn density (mu1 - lambda1) exp(-(mu1 - lambda1) t).
double mm1_waiting_pdf(const QueueParams& q, double t);

// Transmission delay of an L-bit packet. With u = ln 2 * L / (W alpha):
//   upsilon(alpha) = p_rx / (2^{L/(W alpha)} - 1) - N0
// is the combined interference at which the packet takes exactly alpha seconds,
// and zeta = d upsilon / d alpha. Both are evaluated through expm1 so that
// large u collapses to the -N0 asymptote instead of overflowing.

double upsilon(double alpha_s, const ChannelParams& ch);
double zeta(double alpha_s, const ChannelParams& ch);

/// Density of the transmission delay obtained by pushing the Gaussian
/// interference through alpha = L / capacity(I):
///   zeta(alpha) / (sqrt(2 pi) sigma) * exp(-(upsilon(alpha) - mu)^2 / (2 sigma^2)).
double tx_delay_pdf(double alpha_s, const ChannelParams& ch, const InterferenceStats& stats);

/// L / capacity(ch, I): the inverse of upsilon.
double tx_delay(const ChannelParams& ch, double combined_interference_w);

/// P(Normal(mu, sigma^2) > -N0): the mass tx_delay_pdf carries over (0, inf).
double tx_delay_mass(const ChannelParams& ch, const InterferenceStats& stats);

/// Mass of tx_delay_pdf beyond alpha, i.e. P(I > upsilon(alpha)).
double tx_delay_tail(double alpha_s, const ChannelParams& ch, const InterferenceStats& stats);

/// Grid on [0, tx_delay(mu + tail_sigmas * sigma)] for plotting and checking
/// the transmission delay on its own.
Grid tx_delay_grid(const ChannelParams& ch, const InterferenceStats& stats, std::size_t size,
                   double tail_sigmas = 8.0);

/// tx_delay_pdf sampled on `grid` (0 at t = 0).
TabulatedDist tabulate_tx_delay(const Grid& grid, const ChannelParams& ch,
                                const InterferenceStats& stats);

/// 1 / E[alpha] from the tabulated density, where E[alpha] is the mean of the
/// density restricted to (0, inf) and normalised by its mass. Throws GridError
/// if more than eps_tail of the mass lies past the grid end.
double mean_service_rate_q2(const TabulatedDist& tx_pdf, const ChannelParams& ch,
                            const InterferenceStats& stats, double eps_tail = 1e-9);

/// Same on a dense grid spanning the support of the density.
double mean_service_rate_q2(const ChannelParams& ch, const InterferenceStats& stats);

/// Residual service time CDF R(t) = integral_0^t mu2 (1 - F(x)) dx, with F the
/// (normalised) service-time CDF of `service_pdf`, scaled so that R ends at
/// exactly 1. The grid must hold the whole service distribution.
TabulatedDist residual_cdf(const TabulatedDist& service_pdf, double mu2);

/// Waiting-time CDF of the M/G/1 queue as the truncated series
///   (1 - rho) * sum_{n=0}^{Gamma} rho^n R^{(n)}(t).
/// Evaluated by binary doubling over the number of terms.
TabulatedDist q2_queueing_cdf(const QueueParams& q, const TabulatedDist& residual);

/// Grid and tolerance knobs of the end-to-end pipeline.
struct GridOptions {
  double delta_max_s = 0.03;          // largest threshold of interest
  std::size_t points_per_delta = 1u << 14;  // step = delta_max / points_per_delta
  double horizon_mean_multiple = 8.0;  // horizon >= multiple * mean E2E delay
  double coverage_tol = 1e-3;         // allowed E2E mass beyond the horizon
  std::size_t max_points = 1u << 22;
  double eps_tail = 1e-9;
};

/// Every intermediate distribution of the end-to-end computation on one grid.
struct DelayAnalysis {
  Grid grid;
  QueueParams queue;
  InterferenceStats stats;
  TabulatedDist q1_sojourn_pdf;  // psi_1
  TabulatedDist tx_pdf;          // psi_T
  TabulatedDist residual;        // R
  TabulatedDist q2_wait_cdf;     // Psi_Q2
  TabulatedDist q2_total_cdf;    // Psi_2 = Psi_Q2 * psi_T
  TabulatedDist e2e;             // Phi = psi_1 * Psi_2
  double gaussian_mass = 0.0;    // P(I > -N0), the ceiling of Phi
  double lost_mass = 0.0;        // 1 - gaussian_mass
  double mean_tx_delay_s = 0.0;
  double mean_q1_delay_s = 0.0;
  double mean_q2_wait_s = 0.0;
  double mean_q2_delay_s = 0.0;  // wait + transmission
  double mean_e2e_s = 0.0;

  double reliability(double delta_s) const;
};

/// Grid with step delta_max / points_per_delta long enough to cover
/// horizon_mean_multiple times the mean E2E delay (Pollaczek-Khinchine estimate).
Grid e2e_grid(const QueueParams& q, const ChannelParams& ch, const InterferenceStats& stats,
              const GridOptions& options);

/// Full pipeline. lambda2 defaults to lambda1 (the steady-state Q1 departure rate).
/// Throws StabilityError / GridError.
DelayAnalysis analyze_delay(const ChannelParams& ch, const InterferenceStats& stats,
                            double lambda1, double mu1, std::optional<double> lambda2 = {},
                            const GridOptions& options = {});

/// Phi(t) = psi_1 * (Psi_Q2 * psi_T) on `grid`.
TabulatedDist e2e_cdf(const QueueParams& q, const ChannelParams& ch,
                      const InterferenceStats& stats, const Grid& grid);

/// Phi(delta) with linear interpolation; 0 for delta <= 0.
double reliability(const TabulatedDist& e2e, double delta_s);

}  // namespace thzrel
