#include "thzrel/delay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "thzrel/error.hpp"

namespace thzrel {
namespace {

// P(X > x) for X ~ Normal(mean, sd^2)
double normal_sf(double x, double mean, double sd) {
  return 0.5 * std::erfc((x - mean) / (sd * std::numbers::sqrt2));
}

double exponent_u(double alpha_s, const ChannelParams& ch) {
  if (!(alpha_s > 0.0)) throw DomainError("transmission delay alpha must be > 0");
  return std::numbers::ln2 * ch.packet_bits / (ch.bandwidth_hz * alpha_s);
}

double tagged_received_power(const ChannelParams& ch) {
  return received_power(ch, ch.tx_power_w, ch.link_distance_m);
}

void require_spread(const InterferenceStats& stats) {
  if (!(stats.variance_w2 > 0.0)) throw DomainError("interference variance must be > 0");
}

struct ServiceMoments {
  double mean;
  double second;
};

ServiceMoments dense_service_moments(const ChannelParams& ch, const InterferenceStats& stats) {
  const TabulatedDist pdf = tabulate_tx_delay(tx_delay_grid(ch, stats, 1u << 15, 12.0), ch, stats);
  const Grid& g = pdf.grid;
  std::vector<double> m1(g.size);
  std::vector<double> m2(g.size);
  for (std::size_t i = 0; i < g.size; ++i) {
    m1[i] = g.at(i) * pdf.values[i];
    m2[i] = g.at(i) * m1[i];
  }
  const double mass = quadrature(pdf.values, g.step);
  return {quadrature(m1, g.step) / mass, quadrature(m2, g.step) / mass};
}

}  // namespace

int truncation_order(double rho, double eps_tail) {
  if (!(rho > 0.0 && rho < 1.0)) throw StabilityError("utilization must lie in (0, 1)");
  if (!(eps_tail > 0.0 && eps_tail < 1.0)) throw DomainError("eps_tail must lie in (0, 1)");
  // rho^(G+1) / (1 - rho) < eps  <=>  G + 1 > ln(eps (1 - rho)) / ln(rho)
  const double bound = std::log(eps_tail * (1.0 - rho)) / std::log(rho);
  int gamma = std::max(0, static_cast<int>(std::floor(bound)));
  while (std::pow(rho, gamma + 1) / (1.0 - rho) >= eps_tail) ++gamma;
  return gamma;
}

QueueParams make_queue_params(double lambda1, double mu1, double lambda2, double mu2,
                              double eps_tail) {
  if (!(lambda1 > 0.0)) throw DomainError("arrival rate must be > 0");
  if (!(mu1 > lambda1)) {
    throw StabilityError("Q1 unstable: processing rate " + std::to_string(mu1) +
                         " <= arrival rate " + std::to_string(lambda1));
  }
  if (!(lambda2 > 0.0) || !(mu2 > 0.0)) throw DomainError("Q2 rates must be > 0");
  const double rho = lambda2 / mu2;
  if (!(rho < 1.0)) {
    throw StabilityError("Q2 unstable: utilization " + std::to_string(rho) + " >= 1");
  }
  return {.arrival_rate = lambda1,
          .processing_rate = mu1,
          .q2_arrival_rate = lambda2,
          .q2_service_rate = mu2,
          .utilization = rho,
          .truncation_order = truncation_order(rho, eps_tail),
          .eps_tail = eps_tail};
}

double mm1_waiting_pdf(const QueueParams& q, double t) {
  if (t < 0.0) throw DomainError("time must be >= 0");
  const double gap = q.processing_rate - q.arrival_rate;
  return gap * std::exp(-gap * t);
}

double upsilon(double alpha_s, const ChannelParams& ch) {
  const double u = exponent_u(alpha_s, ch);
  return tagged_received_power(ch) / std::expm1(u) - noise_floor(ch);
}

double zeta(double alpha_s, const ChannelParams& ch) {
  // ln2 p_rx L 2^x / (W alpha^2 (2^x - 1)^2) rewritten with e^-u so it cannot overflow
  const double u = exponent_u(alpha_s, ch);
  const double denom = -std::expm1(-u);
  return tagged_received_power(ch) * u * std::exp(-u) / (alpha_s * denom * denom);
}

double tx_delay_pdf(double alpha_s, const ChannelParams& ch, const InterferenceStats& stats) {
  require_spread(stats);
  const double sd = stats.stddev_w();
  const double z = (upsilon(alpha_s, ch) - stats.mean_w) / sd;
  const double slope = zeta(alpha_s, ch);
  if (slope == 0.0) return 0.0;
  return slope / (std::sqrt(2.0 * std::numbers::pi) * sd) * std::exp(-0.5 * z * z);
}

double tx_delay(const ChannelParams& ch, double combined_interference_w) {
  return ch.packet_bits / capacity(ch, combined_interference_w);
}

double tx_delay_mass(const ChannelParams& ch, const InterferenceStats& stats) {
  require_spread(stats);
  return normal_sf(-noise_floor(ch), stats.mean_w, stats.stddev_w());
}

double tx_delay_tail(double alpha_s, const ChannelParams& ch, const InterferenceStats& stats) {
  require_spread(stats);
  return normal_sf(upsilon(alpha_s, ch), stats.mean_w, stats.stddev_w());
}

Grid tx_delay_grid(const ChannelParams& ch, const InterferenceStats& stats, std::size_t size,
                   double tail_sigmas) {
  require_spread(stats);
  const double hi = tx_delay(ch, stats.mean_w + tail_sigmas * stats.stddev_w());
  return Grid(hi / static_cast<double>(size - 1), size);
}

TabulatedDist tabulate_tx_delay(const Grid& grid, const ChannelParams& ch,
                                const InterferenceStats& stats) {
  std::vector<double> v(grid.size, 0.0);
  for (std::size_t i = 1; i < grid.size; ++i) v[i] = tx_delay_pdf(grid.at(i), ch, stats);
  return {grid, DistKind::pdf, std::move(v), "psi_T"};
}

double mean_service_rate_q2(const TabulatedDist& tx_pdf, const ChannelParams& ch,
                            const InterferenceStats& stats, double eps_tail) {
  if (tx_pdf.kind != DistKind::pdf) throw GridError("mean_service_rate_q2 expects a pdf");
  const double tail = tx_delay_tail(tx_pdf.grid.horizon(), ch, stats);
  if (tail > eps_tail) {
    throw GridError("transmission delay mass past grid end (" + std::to_string(tail) +
                    ") exceeds eps_tail; E[alpha] not resolved");
  }
  std::vector<double> moment(tx_pdf.grid.size);
  for (std::size_t i = 0; i < moment.size(); ++i) moment[i] = tx_pdf.grid.at(i) * tx_pdf.values[i];
  return quadrature(tx_pdf.values, tx_pdf.grid.step) / quadrature(moment, tx_pdf.grid.step);
}

double mean_service_rate_q2(const ChannelParams& ch, const InterferenceStats& stats) {
  return 1.0 / dense_service_moments(ch, stats).mean;
}

TabulatedDist residual_cdf(const TabulatedDist& service_pdf, double mu2) {
  if (service_pdf.kind != DistKind::pdf) throw GridError("residual_cdf expects a service pdf");
  if (!(mu2 > 0.0)) throw DomainError("mu2 must be > 0");
  const double h = service_pdf.grid.step;
  const std::vector<double> service_cdf = cumulative_integral(service_pdf.values, h);
  const double mass = service_cdf.back();
  if (!(mass > 0.0)) throw GridError("service density has no mass on the grid");
  std::vector<double> density(service_cdf.size());
  for (std::size_t i = 0; i < density.size(); ++i) {
    density[i] = mu2 * (1.0 - service_cdf[i] / mass);
  }
  // R(inf) = mu2 E[alpha] = 1; rescale away the O(h^2) drift of the nested
  // quadrature, which is largest when the service density jumps at t = 0
  std::vector<double> r = cumulative_integral(density, h);
  const double end = r.back();
  if (!(end > 0.0)) throw GridError("residual distribution has no mass on the grid");
  for (double& v : r) v /= end;
  return {service_pdf.grid, DistKind::cdf, std::move(r), "R"};
}

TabulatedDist q2_queueing_cdf(const QueueParams& q, const TabulatedDist& residual) {
  if (residual.kind != DistKind::cdf) throw GridError("q2_queueing_cdf expects the residual cdf");
  const double rho = q.utilization;
  if (!(rho > 0.0 && rho < 1.0)) throw StabilityError("Q2 utilization must lie in (0, 1)");

  // sum_{n=0}^{Gamma} (rho R)^{(n)} by binary doubling over the number of
  // terms: with S = sum_{n<m} P_n and P = P_m,
  //   m -> 2m:   S += P * S,  P = P * P
  //   m -> m+1:  S += P,      P = P * rho R
  // which needs O(log Gamma) convolutions instead of Gamma.
  const Grid& grid = residual.grid;
  TabulatedDist step_term = residual;
  for (double& v : step_term.values) v *= rho;
  TabulatedDist sum(grid, DistKind::cdf, std::vector<double>(grid.size, 0.0));
  TabulatedDist power = unit_step(grid);
  const auto terms = static_cast<unsigned long long>(q.truncation_order) + 1;
  auto vanished = [](const TabulatedDist& d) {
    return *std::max_element(d.values.begin(), d.values.end()) < 1e-300;
  };
  unsigned long long length = 0;
  for (int bit = 63; bit >= 0; --bit) {
    if (length > 0) {
      const TabulatedDist extra = convolve(power, sum);
      for (std::size_t i = 0; i < grid.size; ++i) sum.values[i] += extra.values[i];
      power = convolve(power, power);
      length *= 2;
    }
    if ((terms >> bit) & 1ull) {
      for (std::size_t i = 0; i < grid.size; ++i) sum.values[i] += power.values[i];
      power = convolve(power, step_term);
      ++length;
    }
    if (length > 0 && vanished(power)) break;  // every later term is zero on the grid
  }
  for (double& v : sum.values) v *= 1.0 - rho;
  sum.name = "Psi_Q2";
  return sum;
}

double DelayAnalysis::reliability(double delta_s) const { return thzrel::reliability(e2e, delta_s); }

Grid e2e_grid(const QueueParams& q, const ChannelParams& ch, const InterferenceStats& stats,
              const GridOptions& options) {
  if (!(options.delta_max_s > 0.0)) throw DomainError("delta_max must be > 0");
  const ServiceMoments m = dense_service_moments(ch, stats);
  const double rho = q.q2_arrival_rate * m.mean;
  const double pk_wait = rho < 1.0 ? q.q2_arrival_rate * m.second / (2.0 * (1.0 - rho)) : 0.0;
  const double mean_e2e = 1.0 / (q.processing_rate - q.arrival_rate) + m.mean + pk_wait;
  const double step = options.delta_max_s / static_cast<double>(options.points_per_delta);
  const double horizon =
      std::max({2.0 * options.delta_max_s, options.horizon_mean_multiple * mean_e2e,
                tx_delay(ch, stats.mean_w + 8.0 * stats.stddev_w())});
  const auto size = static_cast<std::size_t>(std::ceil(horizon / step)) + 1;
  if (size > options.max_points) {
    throw GridError("E2E grid needs " + std::to_string(size) + " points (max " +
                    std::to_string(options.max_points) + ")");
  }
  return Grid(step, size);
}

namespace {

struct Pipeline {
  TabulatedDist q1;
  TabulatedDist tx;
  TabulatedDist residual;
  TabulatedDist q2_wait;
  TabulatedDist q2_total;
  TabulatedDist e2e;
};

TabulatedDist tabulate_q1(const QueueParams& q, const Grid& grid) {
  // The trapezoid rule overstates the mass of a sampled exponential by
  // (x/2) coth(x/2) with x = rate * step; divide it out so Phi cannot exceed 1.
  const double x = (q.processing_rate - q.arrival_rate) * grid.step;
  const double excess = x < 1e-8 ? 1.0 : 0.5 * x / std::tanh(0.5 * x);
  std::vector<double> v(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) v[i] = mm1_waiting_pdf(q, grid.at(i)) / excess;
  return {grid, DistKind::pdf, std::move(v), "psi_1"};
}

Pipeline run_pipeline(const QueueParams& q, const TabulatedDist& tx) {
  TabulatedDist q1 = tabulate_q1(q, tx.grid);
  TabulatedDist residual = residual_cdf(tx, q.q2_service_rate);
  TabulatedDist q2_wait = q2_queueing_cdf(q, residual);
  TabulatedDist q2_total = convolve(tx, q2_wait);
  q2_total.name = "Psi_2";
  TabulatedDist e2e = convolve(q1, q2_total);
  e2e.name = "Phi";
  return {std::move(q1), tx, std::move(residual), std::move(q2_wait), std::move(q2_total),
          std::move(e2e)};
}

}  // namespace

DelayAnalysis analyze_delay(const ChannelParams& ch, const InterferenceStats& stats,
                            double lambda1, double mu1, std::optional<double> lambda2,
                            const GridOptions& options) {
  ch.validate();
  require_spread(stats);
  const double arrivals2 = lambda2.value_or(lambda1);

  const QueueParams sizing = make_queue_params(lambda1, mu1, arrivals2,
                                               mean_service_rate_q2(ch, stats), options.eps_tail);
  const Grid grid = e2e_grid(sizing, ch, stats, options);
  TabulatedDist tx = tabulate_tx_delay(grid, ch, stats);
  const double mu2 = mean_service_rate_q2(tx, ch, stats, options.eps_tail);
  const QueueParams q = make_queue_params(lambda1, mu1, arrivals2, mu2, options.eps_tail);

  Pipeline p = run_pipeline(q, tx);

  const double gaussian_mass = tx_delay_mass(ch, stats);
  if (p.e2e.values.back() < gaussian_mass - options.coverage_tol) {
    throw GridError("E2E grid horizon " + std::to_string(grid.horizon()) +
                    " s leaves mass " + std::to_string(gaussian_mass - p.e2e.values.back()) +
                    " uncovered");
  }

  std::vector<double> survival(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) survival[i] = 1.0 - p.q2_wait.values[i];
  const double mean_wait = quadrature(survival, grid.step);
  const double mean_q1 = 1.0 / (mu1 - lambda1);

  return DelayAnalysis{.grid = grid,
                       .queue = q,
                       .stats = stats,
                       .q1_sojourn_pdf = std::move(p.q1),
                       .tx_pdf = std::move(p.tx),
                       .residual = std::move(p.residual),
                       .q2_wait_cdf = std::move(p.q2_wait),
                       .q2_total_cdf = std::move(p.q2_total),
                       .e2e = std::move(p.e2e),
                       .gaussian_mass = gaussian_mass,
                       .lost_mass = 1.0 - gaussian_mass,
                       .mean_tx_delay_s = 1.0 / mu2,
                       .mean_q1_delay_s = mean_q1,
                       .mean_q2_wait_s = mean_wait,
                       .mean_q2_delay_s = mean_wait + 1.0 / mu2,
                       .mean_e2e_s = mean_q1 + mean_wait + 1.0 / mu2};
}

TabulatedDist e2e_cdf(const QueueParams& q, const ChannelParams& ch,
                      const InterferenceStats& stats, const Grid& grid) {
  return run_pipeline(q, tabulate_tx_delay(grid, ch, stats)).e2e;
}

double reliability(const TabulatedDist& e2e, double delta_s) {
  if (e2e.kind != DistKind::cdf) throw GridError("reliability expects the E2E cdf");
  if (delta_s <= 0.0) return 0.0;
  return e2e.at(delta_s);
}

}  // namespace thzrel
