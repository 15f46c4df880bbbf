#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "thzrel/delay.hpp"
#include "thzrel/error.hpp"

using namespace thzrel;

namespace {

ChannelParams preset_channel(double bandwidth_hz = 10e9) {
  ChannelParams ch;
  ch.bandwidth_hz = bandwidth_hz;
  ch.link_distance_m = 1.92;
  return ch;
}

InterferenceStats preset_stats() {
  return interference_stats(DeploymentParams{}, 1.0, aperture_area(1e12));
}

TabulatedDist exp_pdf(const Grid& g, double rate) {
  std::vector<double> v(g.size);
  for (std::size_t i = 0; i < g.size; ++i) v[i] = rate * std::exp(-rate * g.at(i));
  return {g, DistKind::pdf, v};
}

}  // namespace

TEST_CASE("M/M/1 sojourn density") {
  const QueueParams q = make_queue_params(600.0, 1000.0, 600.0, 2000.0);
  CHECK(mm1_waiting_pdf(q, 0.0) == 400.0);
  const Grid g(1e-5, 20'001);
  std::vector<double> v(g.size);
  std::vector<double> tv(g.size);
  for (std::size_t i = 0; i < g.size; ++i) {
    v[i] = mm1_waiting_pdf(q, g.at(i));
    tv[i] = g.at(i) * v[i];
  }
  CHECK(quadrature(v, g.step) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(quadrature(tv, g.step) == doctest::Approx(1.0 / 400.0).epsilon(1e-5));
}

TEST_CASE("queue parameters") {
  CHECK_THROWS_AS(make_queue_params(10.0, 5.0, 10.0, 100.0), StabilityError);
  CHECK_THROWS_AS(make_queue_params(10.0, 20.0, 10.0, 10.0), StabilityError);
  const QueueParams q = make_queue_params(10.0, 20.0, 10.0, 40.0);
  CHECK(q.utilization == 0.25);
  for (double rho : {0.1, 0.5, 0.9, 0.99}) {
    const int g = truncation_order(rho, 1e-9);
    CHECK(std::pow(rho, g + 1) / (1.0 - rho) < 1e-9);
    CHECK(std::pow(rho, g) / (1.0 - rho) >= 1e-9);
  }
}

TEST_CASE("upsilon inverts the transmission delay") {
  const ChannelParams ch = preset_channel();
  const double p_rx = received_power(ch, ch.tx_power_w, ch.link_distance_m);
  const double alpha0 = ch.packet_bits / (ch.bandwidth_hz * std::log2(1.0 + p_rx / noise_floor(ch)));
  CHECK(std::abs(upsilon(alpha0, ch)) < 1e-9 * p_rx);
  CHECK(tx_delay(ch, 0.0) == doctest::Approx(alpha0).epsilon(1e-12));

  double previous = -INFINITY;
  for (double alpha = 0.2 * alpha0; alpha < 50.0 * alpha0; alpha *= 1.1) {
    const double u = upsilon(alpha, ch);
    CHECK(u > previous);
    previous = u;
    if (u > 0.0) {
      CHECK(capacity(ch, u) * alpha == doctest::Approx(ch.packet_bits).epsilon(1e-9));
    }
  }
  CHECK(upsilon(1e3 * alpha0, ch) > 100.0 * p_rx);
  CHECK_THROWS_AS(upsilon(0.0, ch), DomainError);
}

TEST_CASE("zeta is the derivative of upsilon") {
  const ChannelParams ch = preset_channel();
  const double alpha0 = tx_delay(ch, 0.0);
  double previous = zeta(0.5 * alpha0, ch);
  for (double alpha = 0.5 * alpha0; alpha < 20.0 * alpha0; alpha *= 1.01) {
    const double h = alpha * 1e-6;
    const double fd = (upsilon(alpha + h, ch) - upsilon(alpha - h, ch)) / (2.0 * h);
    const double z = zeta(alpha, ch);
    CHECK(z > 0.0);
    CHECK(std::abs(z - fd) / fd < 1e-5);
    CHECK(z / previous == doctest::Approx(1.0).epsilon(0.1));  // continuous on the grid
    previous = z;
  }
}

TEST_CASE("transmission delay density mass") {
  const ChannelParams ch = preset_channel();
  const InterferenceStats st = preset_stats();
  const auto pdf = tabulate_tx_delay(tx_delay_grid(ch, st, 4001), ch, st);
  CHECK(pdf.mass() == doctest::Approx(tx_delay_mass(ch, st)).epsilon(1e-6));

  // a spread that puts a sixth of the Gaussian below -N0
  const InterferenceStats wide{.mean_w = 0.0, .variance_w2 = std::pow(noise_floor(ch), 2)};
  CHECK(tx_delay_mass(ch, wide) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  const auto wpdf = tabulate_tx_delay(tx_delay_grid(ch, wide, 20'001, 10.0), ch, wide);
  CHECK(wpdf.mass() == doctest::Approx(0.8413447460685429).epsilon(1e-4));
}

TEST_CASE("narrow interference puts the mode at tx_delay(mean)") {
  const ChannelParams ch = preset_channel();
  const InterferenceStats st{.mean_w = 3e-11, .variance_w2 = std::pow(3e-14, 2)};
  const double centre = tx_delay(ch, st.mean_w);
  const double lo = tx_delay(ch, st.mean_w - 5.0 * st.stddev_w());
  const double hi = tx_delay(ch, st.mean_w + 5.0 * st.stddev_w());
  const std::size_t n = 2001;
  const double step = (hi - lo) / (n - 1);
  double best = 0.0;
  double arg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = lo + step * i;
    const double v = tx_delay_pdf(a, ch, st);
    if (v > best) best = v, arg = a;
  }
  CHECK(std::abs(arg - centre) <= step);
}

TEST_CASE("mean service rate") {
  const ChannelParams ch = preset_channel();
  const InterferenceStats narrow{.mean_w = 3e-11, .variance_w2 = std::pow(3e-16, 2)};
  CHECK(mean_service_rate_q2(ch, narrow) ==
        doctest::Approx(capacity(ch, 3e-11) / ch.packet_bits).epsilon(1e-6));

  double previous = INFINITY;
  for (double mean : {1e-11, 2e-11, 4e-11, 8e-11}) {
    const double mu2 = mean_service_rate_q2(ch, {.mean_w = mean, .variance_w2 = 1e-22});
    CHECK(mu2 < previous);
    previous = mu2;
  }

  // a grid that stops short of the tail is refused
  const InterferenceStats st = preset_stats();
  const auto short_pdf = tabulate_tx_delay(tx_delay_grid(ch, st, 401, 1.0), ch, st);
  CHECK_THROWS_AS(mean_service_rate_q2(short_pdf, ch, st), GridError);
}

TEST_CASE("residual service time") {
  const Grid g(1e-5, 100'001);
  const double mu = 2000.0;
  const auto service = exp_pdf(g, mu);
  std::vector<double> tv(g.size);
  for (std::size_t i = 0; i < g.size; ++i) tv[i] = g.at(i) * service.values[i];
  // the rate consistent with the tabulated density, as the pipeline uses it
  const double mu_grid = service.mass() / quadrature(tv, g.step);
  const auto R = residual_cdf(service, mu_grid);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size; ++i) {
    err = std::max(err, std::abs(R.values[i] - (1.0 - std::exp(-mu * g.at(i)))));
  }
  CHECK(err < 1e-4);
  CHECK(R.values.back() == doctest::Approx(1.0).epsilon(1e-6));

  // deterministic service at s0: uniform residual
  const Grid d(1e-4, 2001);
  std::vector<double> spike(d.size, 0.0);
  spike[1000] = 1.0 / d.step;
  const double s0 = d.at(1000);
  const auto Rd = residual_cdf(TabulatedDist(d, DistKind::pdf, spike), 1.0 / s0);
  for (std::size_t i = 0; i < d.size; i += 50) {
    CHECK(Rd.values[i] == doctest::Approx(std::min(d.at(i) / s0, 1.0)).epsilon(2e-3));
  }
}

TEST_CASE("queueing series") {
  const Grid g(2e-6, 60'001);
  const double lambda = 1350.0;
  const double mu2 = 1650.0;
  const QueueParams q = make_queue_params(lambda, 2000.0, lambda, mu2);
  const auto W = q2_queueing_cdf(q, residual_cdf(exp_pdf(g, mu2), mu2));

  SUBCASE("empty system probability at t = 0") {
    CHECK(W.values[0] == doctest::Approx(1.0 - q.utilization).epsilon(1e-12));
  }
  SUBCASE("matches the M/M/1 waiting time") {
    double err = 0.0;
    for (std::size_t i = 0; i < g.size; ++i) {
      err = std::max(err, std::abs(W.values[i] -
                                   (1.0 - q.utilization * std::exp(-(mu2 - lambda) * g.at(i)))));
    }
    CHECK(err < 1e-3);
  }
  SUBCASE("doubling equals the term-by-term sum") {
    const Grid small(2e-5, 2001);
    const auto R = residual_cdf(exp_pdf(small, mu2), mu2);
    const QueueParams q2 = make_queue_params(lambda, 2000.0, lambda, mu2, 1e-4);
    const auto fast = q2_queueing_cdf(q2, R);
    std::vector<double> slow(small.size, 0.0);
    double w = 1.0 - q2.utilization;
    for (int n = 0; n <= q2.truncation_order; ++n, w *= q2.utilization) {
      const auto term = nfold(R, n);
      for (std::size_t i = 0; i < small.size; ++i) slow[i] += w * term.values[i];
    }
    for (std::size_t i = 0; i < small.size; ++i) CHECK(fast.values[i] == doctest::Approx(slow[i]).epsilon(1e-9));
  }
  SUBCASE("light load is a step at zero") {
    const QueueParams light = make_queue_params(1e-3, 2000.0, 1e-3, mu2);
    const auto Wl = q2_queueing_cdf(light, residual_cdf(exp_pdf(g, mu2), mu2));
    CHECK(Wl.values[0] > 1.0 - 1e-6);
  }
}

TEST_CASE("end-to-end delay distribution") {
  const ChannelParams ch = preset_channel();
  const InterferenceStats st = preset_stats();
  const DelayAnalysis a = analyze_delay(ch, st, 1350.0, 2000.0);

  CHECK(std::abs(a.e2e.values[0]) < 1e-12);
  for (std::size_t i = 1; i < a.e2e.values.size(); ++i) {
    CHECK_MESSAGE(a.e2e.values[i] >= a.e2e.values[i - 1] - 1e-12, "index " << i);
    if (a.e2e.values[i] < a.e2e.values[i - 1] - 1e-12) break;
  }
  CHECK(a.e2e.values.back() <= 1.0);
  CHECK(a.e2e.values.back() == doctest::Approx(a.gaussian_mass).epsilon(1e-6));
  CHECK(a.reliability(0.0) == 0.0);
  CHECK(a.reliability(1e9) == a.e2e.values.back());

  // the Pollaczek-Khinchine mean wait from the tabulated service moments
  std::vector<double> m1(a.grid.size);
  std::vector<double> m2(a.grid.size);
  for (std::size_t i = 0; i < a.grid.size; ++i) {
    m1[i] = a.grid.at(i) * a.tx_pdf.values[i];
    m2[i] = a.grid.at(i) * m1[i];
  }
  const double mass = a.tx_pdf.mass();
  const double second = quadrature(m2, a.grid.step) / mass;
  const double rho = a.queue.utilization;
  const double pk = a.queue.q2_arrival_rate * second / (2.0 * (1.0 - rho));
  CHECK(a.mean_q2_wait_s == doctest::Approx(pk).epsilon(2e-3));
  CHECK(a.mean_tx_delay_s == doctest::Approx(quadrature(m1, a.grid.step) / mass).epsilon(1e-9));
}

TEST_CASE("reliability target under the reconstructed parameters") {
  const DelayAnalysis a = analyze_delay(preset_channel(), preset_stats(), 1350.0, 2000.0);
  CHECK(a.reliability(0.03) >= 0.99999);
  CHECK(a.reliability(0.01) < a.reliability(0.02));
}

TEST_CASE("pipeline errors") {
  const ChannelParams ch = preset_channel(5e9);
  CHECK_THROWS_AS(analyze_delay(ch, preset_stats(), 1350.0, 2000.0), StabilityError);
  GridOptions tiny;
  tiny.max_points = 1000;
  CHECK_THROWS_AS(analyze_delay(preset_channel(), preset_stats(), 1350.0, 2000.0, {}, tiny),
                  GridError);
  CHECK_THROWS_AS(reliability(exp_pdf(Grid(1e-3, 100), 1.0), 0.01), GridError);
}
