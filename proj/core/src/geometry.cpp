#include "thzrel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "thzrel/error.hpp"

namespace thzrel {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void DeploymentParams::validate() const {
  if (!(intensity_per_m2 > 0.0)) throw DomainError("intensity_per_m2 must be > 0");
  if (!(hard_core_m > 0.0)) throw DomainError("hard_core_m must be > 0");
  if (!(area_side_m > 0.0)) throw DomainError("area_side_m must be > 0");
  if (!(interference_radius_m > hard_core_m)) {
    throw DomainError("interference_radius_m (" + std::to_string(interference_radius_m) +
                      ") must exceed hard_core_m (" + std::to_string(hard_core_m) + ")");
  }
}

double InterferenceStats::stddev_w() const { return std::sqrt(variance_w2); }

double parent_intensity(double retained_intensity, double hard_core_m) {
  const double disc = std::numbers::pi * hard_core_m * hard_core_m;
  const double fill = retained_intensity * disc;
  if (!(fill < 1.0)) {
    throw DomainError("eta pi r^2 = " + std::to_string(fill) +
                      " >= 1: retained intensity infeasible for Matern type II");
  }
  return -std::log1p(-fill) / disc;
}

namespace {

struct Candidate {
  Point position;
  double mark;
};

// Buckets candidates into square cells of side r so that every neighbour
// within r of a point lies in its own or one of the 8 adjacent cells.
class CellIndex {
 public:
  CellIndex(std::span<const Candidate> candidates, double origin, double extent, double cell)
      : origin_(origin), cell_(cell) {
    cols_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(extent / cell)));
    start_.assign(cols_ * cols_ + 1, 0);
    for (const auto& c : candidates) ++start_[key(c.position) + 1];
    for (std::size_t i = 1; i < start_.size(); ++i) start_[i] += start_[i - 1];
    items_.resize(candidates.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      items_[fill[key(candidates[i].position)]++] = i;
    }
  }

  template <typename Fn>
  void for_each_near(Point p, Fn&& fn) const {
    const auto [cx, cy] = coords(p);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        const long x = cx + dx;
        const long y = cy + dy;
        if (x < 0 || y < 0 || x >= static_cast<long>(cols_) || y >= static_cast<long>(cols_)) {
          continue;
        }
        const std::size_t k = static_cast<std::size_t>(y) * cols_ + static_cast<std::size_t>(x);
        for (std::size_t j = start_[k]; j < start_[k + 1]; ++j) fn(items_[j]);
      }
    }
  }

 private:
  std::pair<long, long> coords(Point p) const {
    const auto clamp = [this](double v) {
      const long c = static_cast<long>(std::floor((v - origin_) / cell_));
      return std::clamp<long>(c, 0, static_cast<long>(cols_) - 1);
    };
    return {clamp(p.x), clamp(p.y)};
  }
  std::size_t key(Point p) const {
    const auto [x, y] = coords(p);
    return static_cast<std::size_t>(y) * cols_ + static_cast<std::size_t>(x);
  }

  double origin_;
  double cell_;
  std::size_t cols_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
};

}  // namespace

Deployment sample_mhcpp(const DeploymentParams& params, Engine& engine) {
  params.validate();
  const double r = params.hard_core_m;
  const double parent = parent_intensity(params.intensity_per_m2, r);
  const double lo = -r;
  const double extent = params.area_side_m + 2.0 * r;

  std::poisson_distribution<std::size_t> count(parent * extent * extent);
  std::uniform_real_distribution<double> coord(lo, lo + extent);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Candidate> candidates(count(engine));
  for (auto& c : candidates) {
    c.position.x = coord(engine);
    c.position.y = coord(engine);
    c.mark = unit(engine);
  }

  const CellIndex index(candidates, lo, extent, r);
  Deployment out{.positions = {}, .params = params};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Point p = candidates[i].position;
    if (p.x < 0.0 || p.y < 0.0 || p.x > params.area_side_m || p.y > params.area_side_m) continue;
    bool retained = true;
    index.for_each_near(p, [&](std::size_t j) {
      if (j != i && candidates[j].mark < candidates[i].mark &&
          distance(candidates[j].position, p) < r) {
        retained = false;
      }
    });
    if (retained) out.positions.push_back(p);
  }
  return out;
}

Deployment sample_mhcpp(const DeploymentParams& params, std::uint64_t seed) {
  Engine engine = make_engine(seed, 0x6d68);
  return sample_mhcpp(params, engine);
}

DeploymentParams interference_window(const DeploymentParams& params) {
  DeploymentParams out = params;
  out.area_side_m = std::max(params.area_side_m, 2.0 * params.interference_radius_m);
  return out;
}

std::vector<double> interferer_distances(const Deployment& deployment, Point user) {
  const double r = deployment.params.hard_core_m;
  const double omega = deployment.params.interference_radius_m;
  std::vector<double> out;
  for (const Point p : deployment.positions) {
    const double d = distance(p, user);
    if (d >= r && d <= omega) out.push_back(d);
  }
  return out;
}

double exact_interference(std::span<const double> distances_m, double tx_power_w,
                          double aperture_m2) {
  double sum = 0.0;
  for (const double d : distances_m) {
    if (!(d > 0.0)) throw DomainError("interferer at zero distance");
    sum += tx_power_w * aperture_m2 / (d * d);
  }
  return sum;
}

InterferenceStats interference_stats(const DeploymentParams& params, double tx_power_w,
                                     double aperture_m2) {
  const double r = params.hard_core_m;
  const double omega = params.interference_radius_m;
  if (!(omega > r)) throw DomainError("interference_radius_m must exceed hard_core_m");
  const double pa = tx_power_w * aperture_m2;
  const double count_term = std::numbers::pi * omega * omega * params.intensity_per_m2 / 2.0;
  InterferenceStats stats;
  stats.mean_w = pa * (std::log(omega) - std::log(r)) / (omega * omega - r * r) * count_term;
  stats.variance_w2 = pa * pa * count_term / (2.0 * r * r * omega * omega);
  return stats;
}

GaussianInterferenceSampler::GaussianInterferenceSampler(const InterferenceStats& stats,
                                                         std::uint64_t seed, std::uint64_t stream)
    : engine_(make_engine(seed, stream)), normal_(stats.mean_w, stats.stddev_w()) {}

double GaussianInterferenceSampler::operator()() { return std::max(0.0, normal_(engine_)); }

double GaussianInterferenceSampler::raw() { return normal_(engine_); }

double sample_interference_gaussian(const InterferenceStats& stats, std::uint64_t seed) {
  GaussianInterferenceSampler sampler(stats, seed);
  return sampler();
}

void write_deployment_csv(std::ostream& out, const Deployment& deployment) {
  out << "x_m,y_m\n";
  out.precision(17);
  for (const Point p : deployment.positions) out << p.x << ',' << p.y << '\n';
}

}  // namespace thzrel
