#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "thzrel/delay.hpp"
#include "thzrel/error.hpp"
#include "thzrel/parallel.hpp"
#include "thzrel/simulator.hpp"

using namespace thzrel;

namespace {

SimConfig preset(std::size_t requests = 20'000) {
  SimConfig c;
  c.channel.bandwidth_hz = 12e9;
  c.channel.link_distance_m = 1.92;
  c.arrival_rate = 1350.0;
  c.processing_rate = 2000.0;
  c.warmup = requests / 10;
  c.n_requests = requests + c.warmup;
  c.seed = 11;
  return c;
}

double ks_vs_exponential(std::vector<double> x, double rate) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * x[i]);
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return d;
}

}  // namespace

TEST_CASE("config validation") {
  SimConfig c = preset();
  c.warmup = c.n_requests;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = preset();
  c.processing_rate = c.arrival_rate;
  CHECK_THROWS_AS(run_tandem(c), StabilityError);
  CHECK(parse_interference_mode("exact_geometry") == InterferenceMode::exact_geometry);
  CHECK_THROWS_AS(parse_interference_mode("fading"), DomainError);
}

TEST_CASE("records obey the accounting identities") {
  SimConfig c = preset();
  c.warmup = 0;
  const SimResult r = run_tandem(c);
  REQUIRE(r.records.size() == c.n_requests);
  CHECK(r.summary.count == c.n_requests);
  for (const auto& rec : r.records) {
    const double sum = rec.q1_wait_s + rec.q1_service_s + rec.q2_wait_s + rec.q2_service_s;
    CHECK(rec.e2e_s == doctest::Approx(sum).epsilon(1e-9));
    CHECK(rec.q1_wait_s >= 0.0);
    CHECK(rec.q2_wait_s >= 0.0);
    CHECK(rec.q2_service_s == doctest::Approx(tx_delay(c.channel, rec.interference_w)));
  }
}

TEST_CASE("waits follow the Lindley recursion") {
  SimConfig c = preset(5000);
  c.warmup = 0;
  const auto rec = run_tandem(c).records;
  double w1 = 0.0;
  double w2 = 0.0;
  for (std::size_t n = 1; n < rec.size(); ++n) {
    w1 = std::max(0.0, w1 + rec[n - 1].q1_service_s - (rec[n].arrival_s - rec[n - 1].arrival_s));
    CHECK(rec[n].q1_wait_s == doctest::Approx(w1).epsilon(1e-9).scale(1e-3));
    const double gap = rec[n].q1_departure_s() - rec[n - 1].q1_departure_s();
    w2 = std::max(0.0, w2 + rec[n - 1].q2_service_s - gap);
    CHECK(rec[n].q2_wait_s == doctest::Approx(w2).epsilon(1e-9).scale(1e-3));
  }
}

TEST_CASE("light load has no queueing") {
  SimConfig c = preset(2000);
  c.arrival_rate = 1e-3;
  const SimResult r = run_tandem(c);
  for (const auto& rec : r.records) {
    CHECK(rec.q1_wait_s == 0.0);
    CHECK(rec.q2_wait_s == 0.0);
  }
}

TEST_CASE("Q1 sojourn matches the M/M/1 law") {
  const SimResult r = run_tandem(preset(100'000));
  std::vector<double> sojourn;
  for (const auto& rec : r.records) sojourn.push_back(rec.q1_wait_s + rec.q1_service_s);
  CHECK(ks_vs_exponential(sojourn, 2000.0 - 1350.0) < 0.01);
}

TEST_CASE("Q1 departures form a Poisson stream") {
  const SimResult r = run_tandem(preset(100'000));
  std::vector<double> gaps;
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    gaps.push_back(r.records[i].q1_departure_s() - r.records[i - 1].q1_departure_s());
  }
  CHECK(ks_vs_exponential(gaps, 1350.0) < 0.01);
}

TEST_CASE("empirical reliability agrees with the analysis") {
  const SimConfig c = preset(100'000);
  const SimResult r = run_tandem(c);
  const DelayAnalysis a =
      analyze_delay(c.channel, c.resolved_stats(), c.arrival_rate, c.processing_rate);
  for (std::size_t k = 0; k < c.deltas_s.size(); ++k) {
    CHECK(std::abs(r.summary.reliability(k) - a.reliability(c.deltas_s[k])) < 0.005);
  }
  CHECK(r.summary.mean_q1_delay_s() == doctest::Approx(a.mean_q1_delay_s).epsilon(0.05));
  CHECK(r.summary.mean_q2_delay_s() == doctest::Approx(a.mean_q2_delay_s).epsilon(0.05));
}

TEST_CASE("reproducibility") {
  const SimConfig c = preset(3000);
  const SimResult a = run_tandem(c);
  const SimResult b = run_tandem(c);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].e2e_s == b.records[i].e2e_s);
  SimConfig other = c;
  other.seed += 1;
  CHECK(run_tandem(other).records.front().e2e_s != a.records.front().e2e_s);
}

TEST_CASE("replications and merging") {
  SimConfig c = preset(3000);
  c.keep_records = false;
  const auto runs = run_replications(c, 4, 2);
  REQUIRE(runs.size() == 4);
  for (std::size_t i = 0; i < runs.size(); ++i) CHECK(runs[i].seed == c.seed + i);
  SimConfig third = c;
  third.seed = c.seed + 2;
  CHECK(run_tandem(third).summary.sum_e2e_s == runs[2].summary.sum_e2e_s);

  SimSummary left = runs[0].summary;
  left.merge(runs[1].summary).merge(runs[2].summary);
  SimSummary right = runs[2].summary;
  SimSummary inner = runs[1].summary;
  right.merge(inner.merge(runs[0].summary));
  CHECK(left.count == right.count);
  CHECK(left.within_delta == right.within_delta);
  CHECK(left.sum_e2e_s == doctest::Approx(right.sum_e2e_s).epsilon(1e-12));

  SimSummary odd = runs[0].summary;
  odd.deltas_s = {0.5};
  CHECK_THROWS_AS(odd.merge(runs[1].summary), DomainError);
}

TEST_CASE("stability guards") {
  SimConfig c = preset(5000);
  c.channel.bandwidth_hz = 5e9;  // transmission queue overloaded
  CHECK_THROWS_AS(run_tandem(c), StabilityError);

  c = preset(50'000);
  c.queue_cap = 3;
  CHECK_THROWS_AS(run_tandem(c), StabilityError);
}

TEST_CASE("geometry-driven interference") {
  SimConfig c = preset(300);
  c.arrival_rate = 50.0;
  c.deployment.interference_radius_m = 30.0;
  c.mode = InterferenceMode::exact_geometry;
  const SimResult a = run_tandem(c);
  CHECK(a.records.size() == 300);
  CHECK(run_tandem(c).records.back().e2e_s == a.records.back().e2e_s);

  c.mode = InterferenceMode::frozen_geometry;
  const SimResult f = run_tandem(c);
  for (const auto& rec : f.records) CHECK(rec.interference_w == f.records[0].interference_w);
}

TEST_CASE("empirical distribution") {
  const Grid g(0.01, 1001);
  CHECK_THROWS_AS(empirical_dist(std::vector<double>{}, g), DomainError);

  const std::vector<double> same(100, 0.5);
  const auto point = empirical_dist(same, g);
  CHECK(std::count_if(point.pdf.values.begin(), point.pdf.values.end(),
                      [](double v) { return v > 0.0; }) == 1);
  CHECK(point.pdf.mass() == doctest::Approx(1.0));

  std::mt19937_64 rng(4);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(100'000);
  for (auto& v : x) v = e(rng);
  const auto d = empirical_dist(x, g);
  for (std::size_t i = 1; i < g.size; ++i) CHECK(d.cdf.values[i] >= d.cdf.values[i - 1]);
  std::vector<double> exact(g.size);
  for (std::size_t i = 0; i < g.size; ++i) exact[i] = 1.0 - std::exp(-g.at(i));
  CHECK(ks_distance(d.cdf, TabulatedDist(g, DistKind::cdf, exact)) < 0.01);

  const Grid wide(0.1, 400);
  CHECK(empirical_dist(x, wide).cdf.values.back() == 1.0);
}

TEST_CASE("output writers") {
  SimConfig c = preset(100);
  c.warmup = 0;
  const SimResult r = run_tandem(c);
  std::ostringstream rec;
  write_records_csv(rec, r.records);
  const std::string text = rec.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(r.records.size() + 1));
  std::ostringstream sum;
  write_summary(sum, r.summary);
  CHECK(sum.str().find("requests=" + std::to_string(r.records.size()) + "\n") != std::string::npos);
}

TEST_CASE("parallel_map keeps index order and propagates errors") {
  const auto v = parallel_map(100, [](std::size_t i) { return i * i; }, 4);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == i * i);
  CHECK_THROWS_AS(parallel_map(10, [](std::size_t i) -> int {
                    if (i == 7) throw DomainError("boom");
                    return 0;
                  }, 3),
                  DomainError);
}
