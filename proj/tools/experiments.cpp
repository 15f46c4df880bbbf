#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "thzrel/error.hpp"
#include "thzrel/parallel.hpp"

namespace thzrel::cli {
namespace {

std::string fmt(double v, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

InterferenceStats Scenario::stats() const {
  InterferenceStats st =
      interference_stats(deployment, channel.tx_power_w, aperture_area(channel.frequency_hz));
  st.variance_w2 *= sigma_scale * sigma_scale;
  return st;
}

DelayAnalysis Scenario::analyze() const {
  return analyze_delay(channel, stats(), arrival_rate, processing_rate, q2_arrival_rate, grid);
}

Scenario scenario_from(const ExperimentConfig& cfg) {
  Scenario s;
  s.channel.frequency_hz = cfg.number("channel.frequency_hz");
  s.channel.absorption_per_m = cfg.number("channel.absorption_per_m");
  s.channel.temperature_k = cfg.number("channel.temperature_k");
  s.channel.tx_power_w = cfg.number("channel.tx_power_w");
  s.channel.packet_bits = cfg.number("channel.packet_bits");
  s.channel.bandwidth_hz = cfg.number("channel.bandwidth_hz");
  s.channel.link_distance_m = cfg.number("channel.link_distance_m");
  s.deployment.area_side_m = cfg.number("deployment.area_side_m");
  s.deployment.intensity_per_m2 = cfg.number("deployment.intensity_per_m2");
  s.deployment.hard_core_m = cfg.number("deployment.hard_core_m");
  s.deployment.interference_radius_m = cfg.number("deployment.interference_radius_m");
  s.sigma_scale = cfg.number("interference.sigma_scale");
  s.arrival_rate = cfg.number("queue.arrival_rate");
  s.processing_rate = cfg.number("queue.processing_rate");
  const std::string q2_rate = cfg.raw("queue.q2_arrival_rate");
  if (q2_rate == "mu1") {
    s.q2_arrival_rate = s.processing_rate;
  } else if (q2_rate != "auto") {
    s.q2_arrival_rate = cfg.number("queue.q2_arrival_rate");
  }
  s.grid.eps_tail = cfg.number("queue.eps_tail");
  s.grid.delta_max_s = cfg.number("grid.delta_max_s");
  s.grid.points_per_delta = cfg.count("grid.points_per_delta");
  s.grid.horizon_mean_multiple = cfg.number("grid.horizon_mean_multiple");
  s.grid.coverage_tol = cfg.number("grid.coverage_tol");
  s.grid.max_points = cfg.count("grid.max_points");
  s.deltas_s = cfg.numbers("reliability.deltas_s");
  s.target = cfg.number("reliability.target");

  try {
    s.channel.validate();
    s.deployment.validate();
    parent_intensity(s.deployment.intensity_per_m2, s.deployment.hard_core_m);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(s.sigma_scale > 0.0)) throw ConfigError("interference.sigma_scale must be > 0");
  if (!(s.arrival_rate > 0.0)) throw ConfigError("queue.arrival_rate must be > 0");
  if (!(s.processing_rate > 0.0)) throw ConfigError("queue.processing_rate must be > 0");
  if (s.grid.points_per_delta < 16) throw ConfigError("grid.points_per_delta must be >= 16");
  for (double d : s.deltas_s) {
    if (!(d > 0.0)) throw ConfigError("reliability.deltas_s entries must be > 0");
    if (d > s.grid.delta_max_s) {
      throw ConfigError("reliability.deltas_s entry " + fmt(d) + " exceeds grid.delta_max_s");
    }
  }
  return s;
}

SimConfig sim_config_from(const ExperimentConfig& cfg, const Scenario& s) {
  SimConfig sim;
  sim.warmup = cfg.count("sim.warmup");
  sim.n_requests = cfg.count("sim.requests") + sim.warmup;
  sim.seed = cfg.seed("sim.seed");
  try {
    sim.mode = parse_interference_mode(cfg.raw("sim.mode"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("sim.mode: ") + e.what());
  }
  sim.queue_cap = cfg.count("sim.queue_cap");
  sim.channel = s.channel;
  sim.deployment = s.deployment;
  sim.arrival_rate = s.arrival_rate;
  sim.processing_rate = s.processing_rate;
  sim.stats = s.stats();
  sim.deltas_s = s.deltas_s;
  if (sim.n_requests <= sim.warmup) throw ConfigError("sim.requests must be > 0");
  return sim;
}

std::vector<double> linspace(double lo, double hi, std::size_t points) {
  if (points == 0) throw ConfigError("sweep needs at least one point");
  if (points == 1) return {lo};
  if (!(hi > lo)) throw ConfigError("sweep range is degenerate: max must exceed min");
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return out;
}

TxPdfResult run_txpdf(const Scenario& s, const SimConfig& sim, std::size_t points,
                      double tail_sigmas, std::size_t samples) {
  const InterferenceStats st = s.stats();
  const Grid grid = tx_delay_grid(s.channel, st, points, tail_sigmas);
  TabulatedDist analytic = tabulate_tx_delay(grid, s.channel, st);
  const auto delays = sample_tx_delays(sim, samples);
  TabulatedDist simulated = empirical_dist(delays, grid).pdf;
  analytic.name = "analytic_pdf";
  simulated.name = "simulated_pdf";
  TxPdfResult r{.analytic = analytic,
                .simulated = simulated,
                .l1 = l1_distance(analytic, simulated),
                .analytic_mass = analytic.mass(),
                .gaussian_mass = tx_delay_mass(s.channel, st),
                .samples = samples};
  return r;
}

std::vector<BandwidthRow> sweep_bandwidth(const Scenario& s, const std::vector<double>& bandwidths,
                                          unsigned threads) {
  return parallel_map(
      bandwidths.size(),
      [&](std::size_t i) {
        Scenario point = s;
        point.channel.bandwidth_hz = bandwidths[i];
        BandwidthRow row;
        row.bandwidth_hz = bandwidths[i];
        const InterferenceStats st = point.stats();
        row.rate_at_mean_bps = capacity(point.channel, st.mean_w);
        row.reliability.assign(s.deltas_s.size(), 0.0);
        row.mean_q1_delay_s = 1.0 / (s.processing_rate - s.arrival_rate);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        try {
          const DelayAnalysis a = point.analyze();
          row.stable = true;
          row.utilization = a.queue.utilization;
          for (std::size_t k = 0; k < s.deltas_s.size(); ++k) {
            row.reliability[k] = a.reliability(s.deltas_s[k]);
          }
          row.mean_q1_delay_s = a.mean_q1_delay_s;
          row.mean_q2_delay_s = a.mean_q2_delay_s;
          row.mean_e2e_s = a.mean_e2e_s;
        } catch (const StabilityError&) {
          row.stable = false;
          row.utilization = s.q2_arrival_rate.value_or(s.arrival_rate) /
                            mean_service_rate_q2(point.channel, st);
          row.mean_q2_delay_s = nan;
          row.mean_e2e_s = nan;
        }
        return row;
      },
      threads);
}

BandwidthHeadline bandwidth_headline(const std::vector<BandwidthRow>& rows, double target) {
  BandwidthHeadline h;
  for (const auto& row : rows) {
    if (!row.stable) continue;
    if (!h.first_target_hz && !row.reliability.empty() && row.reliability.back() >= target) {
      h.first_target_hz = row.bandwidth_hz;
      h.rate_at_first_bps = row.rate_at_mean_bps;
    }
    if (!h.q2_below_q1_hz && row.mean_q2_delay_s < row.mean_q1_delay_s) {
      h.q2_below_q1_hz = row.bandwidth_hz;
    }
  }
  return h;
}

std::vector<RegionRow> sweep_region(const Scenario& s, const std::vector<double>& omegas,
                                    const std::vector<double>& link_distances, double delta_s,
                                    unsigned threads) {
  for (double omega : omegas) {
    if (!(omega > s.deployment.hard_core_m)) {
      throw ConfigError("sweep_region: Omega = " + fmt(omega) +
                        " m is not larger than deployment.hard_core_m = " +
                        fmt(s.deployment.hard_core_m) + " m");
    }
  }
  if (link_distances.empty()) throw ConfigError("sweep_region.link_distances_m is empty");
  if (!(delta_s > 0.0 && delta_s <= s.grid.delta_max_s)) {
    throw ConfigError("sweep_region.delta_s must lie in (0, grid.delta_max_s]");
  }

  const std::size_t n_omega = omegas.size();
  auto rows = parallel_map(
      n_omega * link_distances.size(),
      [&](std::size_t i) {
        Scenario point = s;
        point.channel.link_distance_m = link_distances[i / n_omega];
        point.deployment.interference_radius_m = omegas[i % n_omega];
        point.channel.validate();
        const InterferenceStats st = point.stats();
        RegionRow row{.link_distance_m = point.channel.link_distance_m,
                      .omega_m = omegas[i % n_omega],
                      .mean_w = st.mean_w,
                      .stddev_w = st.stddev_w()};
        try {
          row.reliability = point.analyze().reliability(delta_s);
          row.stable = true;
        } catch (const StabilityError&) {
          row.stable = false;
          row.reliability = 0.0;
        }
        return row;
      },
      threads);

  for (std::size_t c = 0; c < link_distances.size(); ++c) {
    RegionRow* curve = rows.data() + c * n_omega;
    for (std::size_t j = 0; j < n_omega; ++j) {
      if (n_omega < 2) break;
      const std::size_t lo = j == 0 ? 0 : j - 1;
      const std::size_t hi = j + 1 == n_omega ? j : j + 1;
      curve[j].slope_per_m =
          (curve[hi].reliability - curve[lo].reliability) / (curve[hi].omega_m - curve[lo].omega_m);
    }
  }
  return rows;
}

double steepest_drop(const std::vector<RegionRow>& rows, double link_distance_m) {
  double steepest = 0.0;
  for (const auto& r : rows) {
    if (r.link_distance_m == link_distance_m) steepest = std::min(steepest, r.slope_per_m);
  }
  return steepest;
}

std::vector<std::string> provenance(const ExperimentConfig& cfg, const std::string& command,
                                    const std::vector<std::string>& extra) {
  std::vector<std::string> lines{"thzrel " + command};
  for (auto& l : cfg.provenance()) lines.push_back(std::move(l));
  try {
    const Scenario s = scenario_from(cfg);
    const InterferenceStats st = s.stats();
    lines.push_back("derived aperture_m2 = " + fmt(aperture_area(s.channel.frequency_hz)));
    lines.push_back("derived noise_floor_w = " + fmt(noise_floor(s.channel)));
    lines.push_back("derived interference_mean_w = " + fmt(st.mean_w));
    lines.push_back("derived interference_stddev_w = " + fmt(st.stddev_w()));
    lines.push_back("derived parent_intensity_per_m2 = " +
                    fmt(parent_intensity(s.deployment.intensity_per_m2, s.deployment.hard_core_m)));
  } catch (const std::exception&) {
  }
  for (const auto& l : extra) lines.push_back(l);
  return lines;
}

void write_header(std::ostream& out, const std::vector<std::string>& lines) {
  for (const auto& l : lines) out << "# " << l << '\n';
}

void write_txpdf_csv(std::ostream& out, const TxPdfResult& r) {
  out << "alpha_s,analytic_pdf,simulated_pdf\n" << std::setprecision(10);
  for (std::size_t i = 0; i < r.analytic.grid.size; ++i) {
    out << r.analytic.grid.at(i) << ',' << r.analytic.values[i] << ',' << r.simulated.values[i]
        << '\n';
  }
}

void write_bandwidth_csv(std::ostream& out, const std::vector<BandwidthRow>& rows,
                         const std::vector<double>& deltas_s) {
  out << "bandwidth_hz,stable,rate_at_mean_bps,utilization";
  for (double d : deltas_s) out << ",reliability_" << fmt(d * 1e3, 6) << "ms";
  out << ",mean_q1_delay_s,mean_q2_delay_s,mean_e2e_s\n" << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.bandwidth_hz << ',' << (r.stable ? 1 : 0) << ',' << r.rate_at_mean_bps << ','
        << r.utilization;
    for (double v : r.reliability) out << ',' << v;
    out << ',' << r.mean_q1_delay_s << ',' << r.mean_q2_delay_s << ',' << r.mean_e2e_s << '\n';
  }
}

void write_region_csv(std::ostream& out, const std::vector<RegionRow>& rows, double delta_s) {
  out << "link_distance_m,omega_m,interference_mean_w,interference_stddev_w,stable,reliability_"
      << fmt(delta_s * 1e3, 6) << "ms,slope_per_m\n"
      << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.link_distance_m << ',' << r.omega_m << ',' << r.mean_w << ',' << r.stddev_w << ','
        << (r.stable ? 1 : 0) << ',' << r.reliability << ',' << r.slope_per_m << '\n';
  }
}

}  // namespace thzrel::cli
