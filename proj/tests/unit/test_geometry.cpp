#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "thzrel/channel.hpp"
#include "thzrel/error.hpp"
#include "thzrel/geometry.hpp"

using namespace thzrel;

namespace {
double min_gap(const Deployment& d) {
  double best = INFINITY;
  for (std::size_t i = 0; i < d.positions.size(); ++i)
    for (std::size_t j = i + 1; j < d.positions.size(); ++j)
      best = std::min(best, distance(d.positions[i], d.positions[j]));
  return best;
}
}  // namespace

TEST_CASE("hard-core invariant and containment") {
  DeploymentParams p;
  p.intensity_per_m2 = 0.02;
  p.hard_core_m = 3.0;
  p.area_side_m = 60.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Deployment d = sample_mhcpp(p, seed);
    CHECK(min_gap(d) >= p.hard_core_m);
    for (Point q : d.positions) {
      CHECK(q.x >= 0.0);
      CHECK(q.y <= p.area_side_m);
    }
  }
}

TEST_CASE("hard core wider than the square keeps at most one point") {
  DeploymentParams p;
  p.area_side_m = 2.0;
  p.hard_core_m = 3.0;
  p.intensity_per_m2 = 0.03;
  p.interference_radius_m = 10.0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) CHECK(sample_mhcpp(p, seed).positions.size() <= 1);
}

TEST_CASE("retained intensity matches the request") {
  DeploymentParams p;
  p.hard_core_m = 1.0;
  p.intensity_per_m2 = 0.09;  // eta pi r^2 ~ 0.28
  p.area_side_m = 20.0;
  double points = 0.0;
  const int runs = 10'000;
  for (int s = 0; s < runs; ++s) points += static_cast<double>(sample_mhcpp(p, s).positions.size());
  const double eta_hat = points / (runs * p.area_side_m * p.area_side_m);
  CHECK(std::abs(eta_hat / p.intensity_per_m2 - 1.0) < 0.05);
}

TEST_CASE("sampling is deterministic in the seed") {
  DeploymentParams p;
  const Deployment a = sample_mhcpp(p, 42);
  const Deployment b = sample_mhcpp(p, 42);
  REQUIRE(a.positions.size() == b.positions.size());
  for (std::size_t i = 0; i < a.positions.size(); ++i) {
    CHECK(a.positions[i].x == b.positions[i].x);
    CHECK(a.positions[i].y == b.positions[i].y);
  }
}

TEST_CASE("parent intensity") {
  CHECK(parent_intensity(0.01, 5.0) ==
        doctest::Approx(-std::log(1.0 - 0.01 * std::numbers::pi * 25.0) / (std::numbers::pi * 25.0)));
  CHECK_THROWS_AS(parent_intensity(1.0 / (std::numbers::pi * 25.0), 5.0), DomainError);
}

TEST_CASE("interferer distances") {
  DeploymentParams p;
  p.hard_core_m = 1.0;
  p.interference_radius_m = 5.0;
  Deployment empty{.positions = {}, .params = p};
  CHECK(interferer_distances(empty, {0, 0}).empty());

  Deployment d{.positions = {{3, 0}, {6, 0}, {0, 0.5}, {0, 5}}, .params = p};
  const auto got = interferer_distances(d, {0, 0});
  REQUIRE(got.size() == 2);
  CHECK(got[0] == 3.0);
  CHECK(got[1] == 5.0);
  for (double x : got) CHECK(x <= p.interference_radius_m);
}

TEST_CASE("exact interference") {
  const double a0 = aperture_area(1e12);
  CHECK(exact_interference(std::vector<double>{}, 1.0, a0) == 0.0);
  CHECK(exact_interference(std::vector<double>{1.0}, 1.0, a0) ==
        doctest::Approx(5.691433657143450e-10).epsilon(1e-13));
  CHECK(exact_interference(std::vector<double>{2.5, 2.5}, 1.0, a0) ==
        2.0 * exact_interference(std::vector<double>{2.5}, 1.0, a0));
}

TEST_CASE("closed-form interference moments") {
  const double a0 = aperture_area(1e12);
  DeploymentParams p;
  p.hard_core_m = 1.0;
  p.interference_radius_m = 5.0;
  p.intensity_per_m2 = 0.05;
  const auto st = interference_stats(p, 1.0, a0);
  CHECK(st.mean_w == doctest::Approx(7.494014923869713e-11).epsilon(1e-12));
  CHECK(st.variance_w2 == doctest::Approx(1.272047243883043e-20).epsilon(1e-12));

  p.intensity_per_m2 = 1e-12;
  const auto none = interference_stats(p, 1.0, a0);
  CHECK(none.mean_w < 1e-20);
  CHECK(none.variance_w2 < 1e-30);
}

TEST_CASE("sampled interference against closed form and Campbell moments") {
  // The closed-form mean undercounts a Poisson field on the annulus by
  // 4 (Omega^2 - r^2) / Omega^2; the sampled mean follows Campbell.
  const double a0 = aperture_area(1e12);
  DeploymentParams p;
  p.hard_core_m = 2.0;
  p.interference_radius_m = 20.0;
  p.intensity_per_m2 = 0.01;
  const DeploymentParams w = interference_window(p);
  Engine e = make_engine(3, 1);
  double sum = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const Deployment d = sample_mhcpp(w, e);
    sum += exact_interference(interferer_distances(d, w.center()), 1.0, a0);
  }
  const double mean = sum / n;
  const double campbell = 2.0 * std::numbers::pi * p.intensity_per_m2 * a0 *
                          std::log(p.interference_radius_m / p.hard_core_m);
  CHECK(mean / campbell == doctest::Approx(1.0).epsilon(0.03));
  const double factor = 4.0 * (400.0 - 4.0) / 400.0;
  CHECK(mean / interference_stats(p, 1.0, a0).mean_w == doctest::Approx(factor).epsilon(0.03));
}

TEST_CASE("gaussian interference sampler") {
  InterferenceStats st{.mean_w = 1.0, .variance_w2 = 0.01};
  GaussianInterferenceSampler g(st, 5);
  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) sum += g.raw();
  CHECK(std::abs(sum / n - 1.0) < 3.0 * 0.1 / 1e3);

  GaussianInterferenceSampler tight({.mean_w = 2.0, .variance_w2 = 1e-30}, 1);
  CHECK(tight() == doctest::Approx(2.0).epsilon(1e-12));

  GaussianInterferenceSampler centred({.mean_w = 0.0, .variance_w2 = 1.0}, 2);
  for (int i = 0; i < 10'000; ++i) CHECK(centred() >= 0.0);
}

TEST_CASE("deployment csv") {
  Deployment d{.positions = {{1, 2}}, .params = {}};
  std::ostringstream os;
  write_deployment_csv(os, d);
  CHECK(os.str().rfind("x_m,y_m\n", 0) == 0);
}
