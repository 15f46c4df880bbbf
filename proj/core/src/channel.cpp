#include "thzrel/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "thzrel/error.hpp"

namespace thzrel {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    throw DomainError(std::string(name) + " must be > 0, got " + std::to_string(value));
  }
}

void require_non_negative(double value, const char* name) {
  if (!(value >= 0.0)) {
    throw DomainError(std::string(name) + " must be >= 0, got " + std::to_string(value));
  }
}

}  // namespace

void ChannelParams::validate() const {
  require_positive(frequency_hz, "frequency_hz");
  require_non_negative(absorption_per_m, "absorption_per_m");
  require_positive(temperature_k, "temperature_k");
  require_non_negative(tx_power_w, "tx_power_w");
  require_positive(bandwidth_hz, "bandwidth_hz");
  require_positive(link_distance_m, "link_distance_m");
  require_positive(packet_bits, "packet_bits");
}

double free_space_loss(double frequency_hz, double distance_m) {
  require_positive(frequency_hz, "frequency_hz");
  require_positive(distance_m, "distance_m");
  const double x = 4.0 * std::numbers::pi * frequency_hz * distance_m / kSpeedOfLight;
  return x * x;
}

double transmittance(double absorption_per_m, double distance_m) {
  require_non_negative(absorption_per_m, "absorption_per_m");
  require_non_negative(distance_m, "distance_m");
  return std::exp(-absorption_per_m * distance_m);
}

double aperture_area(double frequency_hz) {
  require_positive(frequency_hz, "frequency_hz");
  const double x = kSpeedOfLight / (4.0 * std::numbers::pi * frequency_hz);
  return x * x;
}

double received_power(const ChannelParams& params, double p_tx, double distance_m) {
  require_positive(distance_m, "distance_m");
  require_non_negative(p_tx, "p_tx");
  return p_tx * aperture_area(params.frequency_hz) / (distance_m * distance_m) *
         transmittance(params.absorption_per_m, distance_m);
}

double noise_floor(const ChannelParams& params) {
  params.validate();
  const double d0 = params.link_distance_m;
  const double thermal = kBoltzmann * params.temperature_k * params.bandwidth_hz;
  // -expm1(-x) == 1 - exp(-x) without cancellation for small K d0
  const double self_absorption = params.tx_power_w * aperture_area(params.frequency_hz) /
                                 (d0 * d0) * -std::expm1(-params.absorption_per_m * d0);
  return thermal + self_absorption;
}

double sinr(const ChannelParams& params, double combined_interference_w) {
  const double denominator = noise_floor(params) + combined_interference_w;
  if (!(denominator > 0.0)) {
    throw DomainError("noise floor plus interference must be > 0 (clip Gaussian samples)");
  }
  return received_power(params, params.tx_power_w, params.link_distance_m) / denominator;
}

double capacity(const ChannelParams& params, double combined_interference_w) {
  return params.bandwidth_hz * std::log2(1.0 + sinr(params, combined_interference_w));
}

double attenuated_interference(const ChannelParams& params, std::span<const double> distances_m) {
  double sum = 0.0;
  for (const double d : distances_m) sum += received_power(params, params.tx_power_w, d);
  return sum;
}

double interferer_absorption_noise(const ChannelParams& params,
                                   std::span<const double> distances_m) {
  const double a0 = aperture_area(params.frequency_hz);
  double sum = 0.0;
  for (const double d : distances_m) {
    require_positive(d, "distance_m");
    sum += params.tx_power_w * a0 / (d * d) * -std::expm1(-params.absorption_per_m * d);
  }
  return sum;
}

}  // namespace thzrel
