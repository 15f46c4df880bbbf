#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thzrel/channel.hpp"
#include "thzrel/geometry.hpp"
#include "thzrel/numerics.hpp"

namespace thzrel {

/// How the interference seen by each transmission is produced.
enum class InterferenceMode {
  gaussian,         // clipped Normal(mean, variance) per packet
  exact_geometry,   // fresh deployment per packet, exact sum over interferers
  frozen_geometry,  // one deployment per run, reused for every packet
};

std::string to_string(InterferenceMode mode);
/// Throws DomainError on an unknown name.
InterferenceMode parse_interference_mode(const std::string& name);

struct SimConfig {
  std::size_t n_requests = 110'000;  // including warmup
  std::size_t warmup = 10'000;       // initial requests left out of the statistics
  std::uint64_t seed = 1;
  InterferenceMode mode = InterferenceMode::gaussian;
  ChannelParams channel;
  DeploymentParams deployment;
  double arrival_rate = 0.0;     // lambda1
  double processing_rate = 0.0;  // mu1
  /// Gaussian-mode moments; derived from `deployment` when absent.
  std::optional<InterferenceStats> stats;
  std::size_t queue_cap = 1'000'000;  // divergence guard on either queue length
  std::vector<double> deltas_s{0.01, 0.02, 0.03};
  bool keep_records = true;

  /// n_requests > warmup, rates positive, mu1 > lambda1, params valid.
  void validate() const;
  InterferenceStats resolved_stats() const;
};

/// One request's passage through the tandem. Times in seconds.
struct RequestRecord {
  std::uint64_t id = 0;
  double arrival_s = 0.0;
  double q1_wait_s = 0.0;
  double q1_service_s = 0.0;
  double q2_wait_s = 0.0;
  double q2_service_s = 0.0;
  double interference_w = 0.0;
  double e2e_s = 0.0;  // Q2 departure minus arrival

  double q1_departure_s() const { return arrival_s + q1_wait_s + q1_service_s; }
};

/// Sufficient statistics of a run. merge() is associative and commutative up
/// to floating-point rounding of the sums.
struct SimSummary {
  std::size_t count = 0;
  double sum_q1_wait_s = 0.0;
  double sum_q1_service_s = 0.0;
  double sum_q2_wait_s = 0.0;
  double sum_q2_service_s = 0.0;
  double sum_e2e_s = 0.0;
  std::vector<double> deltas_s;
  std::vector<std::size_t> within_delta;  // requests with e2e <= deltas_s[i]

  void add(const RequestRecord& r);
  /// Throws DomainError if the delta lists differ.
  SimSummary& merge(const SimSummary& other);

  double mean_q1_delay_s() const;  // wait + service
  double mean_q2_delay_s() const;
  double mean_q2_wait_s() const;
  double mean_e2e_s() const;
  double reliability(std::size_t i) const;
};

struct SimResult {
  std::uint64_t seed = 0;
  std::vector<RequestRecord> records;  // post-warmup only
  SimSummary summary;
  double pilot_mean_service_s = 0.0;
  std::size_t max_q1_length = 0;
  std::size_t max_q2_length = 0;
};

/// Event-driven simulation of Poisson arrivals through an M/M/1 FCFS queue
/// and an FCFS transmission queue whose service time is L / capacity(I).
/// Events are ordered by (time, sequence number); every random input has its
/// own stream so runs are bit-identical for a given config. Throws
/// StabilityError if a pilot estimate of the Q2 load is >= 1 or a queue
/// grows past queue_cap.
SimResult run_tandem(const SimConfig& cfg);

/// `replications` independent runs with seeds cfg.seed + i, executed on the
/// worker pool and returned in seed order.
std::vector<SimResult> run_replications(const SimConfig& cfg, std::size_t replications,
                                        unsigned threads = 0);

/// Per-packet transmission delays with no queueing, for comparing against
/// the transmission delay density.
std::vector<double> sample_tx_delays(const SimConfig& cfg, std::size_t n);

struct EmpiricalDist {
  TabulatedDist pdf;  // histogram with bins centred on the grid points
  TabulatedDist cdf;  // fraction of samples <= t_i
};

/// Histogram and ECDF of `samples` on `grid`. Samples past the last bin are
/// counted in the denominator only. Throws DomainError on empty input.
EmpiricalDist empirical_dist(std::span<const double> samples, const Grid& grid);

std::vector<double> e2e_delays(std::span<const RequestRecord> records);

void write_records_csv(std::ostream& out, std::span<const RequestRecord> records);
/// key=value lines.
void write_summary(std::ostream& out, const SimSummary& summary);

}  // namespace thzrel
