#pragma once

#include <span>

namespace thzrel {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s (exact, SI)
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K (exact, SI)

/// Physical-layer constants and the tagged-link geometry. All powers are
/// linear watts.
struct ChannelParams {
  double frequency_hz = 1e12;
  double absorption_per_m = 0.0016;  // K(f), 1 % water vapour at 1 THz
  double temperature_k = 300.0;
  double tx_power_w = 1.0;  // identical for every SBS
  double bandwidth_hz = 10e9;
  double link_distance_m = 1.0;  // d0
  double packet_bits = 10e6;     // L

  /// Throws DomainError when any invariant (f, T, p, W, d0, L > 0; K >= 0) fails.
  void validate() const;
};

/// (4 pi f d / c)^2
double free_space_loss(double frequency_hz, double distance_m);

/// Beer-Lambert transmittance exp(-K d).
double transmittance(double absorption_per_m, double distance_m);

/// Effective aperture term A0 = c^2 / (16 pi^2 f^2), in m^2.
double aperture_area(double frequency_hz);

/// p_tx * A0 * d^-2 * exp(-K d)
double received_power(const ChannelParams& params, double p_tx, double distance_m);

/// k_B T W plus the molecular absorption noise of the tagged link,
/// p A0 d0^-2 (1 - exp(-K d0)).
double noise_floor(const ChannelParams& params);

/// Received power over noise floor plus combined interference sum(p A0 d_i^-2).
/// Throws DomainError if the denominator is not positive.
double sinr(const ChannelParams& params, double combined_interference_w);

/// Shannon capacity W log2(1 + SINR), bit/s.
double capacity(const ChannelParams& params, double combined_interference_w);

/// sum p A0 d_i^-2 exp(-K d_i): what actually reaches the receiver from the interferers.
double attenuated_interference(const ChannelParams& params, std::span<const double> distances_m);

/// sum p A0 d_i^-2 (1 - exp(-K d_i)): absorption noise re-radiated along interfering paths.
double interferer_absorption_noise(const ChannelParams& params,
                                   std::span<const double> distances_m);

}  // namespace thzrel
