#include "thzrel/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <queue>

#include "thzrel/delay.hpp"
#include "thzrel/error.hpp"
#include "thzrel/parallel.hpp"
#include "thzrel/random.hpp"

namespace thzrel {
namespace {

// Stream ids, one per random input.
constexpr std::uint64_t kArrivalStream = 1;
constexpr std::uint64_t kProcessingStream = 2;
constexpr std::uint64_t kInterferenceStream = 3;
constexpr std::uint64_t kPilotStream = 4;

class InterferenceSource {
 public:
  InterferenceSource(const SimConfig& cfg, std::uint64_t stream)
      : mode_(cfg.mode),
        window_(interference_window(cfg.deployment)),
        tx_power_w_(cfg.channel.tx_power_w),
        aperture_m2_(aperture_area(cfg.channel.frequency_hz)),
        engine_(make_engine(cfg.seed, stream)) {
    if (mode_ == InterferenceMode::gaussian) {
      gaussian_.emplace(cfg.resolved_stats(), cfg.seed, stream);
    } else if (mode_ == InterferenceMode::frozen_geometry) {
      frozen_w_ = draw_geometry();
    }
  }

  double operator()() {
    switch (mode_) {
      case InterferenceMode::gaussian:
        return (*gaussian_)();
      case InterferenceMode::exact_geometry:
        return draw_geometry();
      case InterferenceMode::frozen_geometry:
        return frozen_w_;
    }
    return 0.0;
  }

 private:
  double draw_geometry() {
    const Deployment dep = sample_mhcpp(window_, engine_);
    const auto d = interferer_distances(dep, window_.center());
    return exact_interference(d, tx_power_w_, aperture_m2_);
  }

  InterferenceMode mode_;
  DeploymentParams window_;
  double tx_power_w_;
  double aperture_m2_;
  Engine engine_;
  std::optional<GaussianInterferenceSampler> gaussian_;
  double frozen_w_ = 0.0;
};

enum class EventKind : std::uint8_t { arrival, q1_done, q2_done };

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  std::uint64_t id;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

double pilot_mean_service(const SimConfig& cfg) {
  const std::size_t n = cfg.mode == InterferenceMode::gaussian ? 4096 : 256;
  const auto delays = sample_tx_delays(
      [&] {
        SimConfig c = cfg;
        c.seed = cfg.seed ^ 0x9e37'79b9'7f4a'7c15ull;
        return c;
      }(),
      n);
  double sum = 0.0;
  for (double a : delays) sum += a;
  return sum / static_cast<double>(n);
}

}  // namespace

std::string to_string(InterferenceMode mode) {
  switch (mode) {
    case InterferenceMode::gaussian:
      return "gaussian";
    case InterferenceMode::exact_geometry:
      return "exact_geometry";
    case InterferenceMode::frozen_geometry:
      return "frozen_geometry";
  }
  return "?";
}

InterferenceMode parse_interference_mode(const std::string& name) {
  if (name == "gaussian") return InterferenceMode::gaussian;
  if (name == "exact_geometry") return InterferenceMode::exact_geometry;
  if (name == "frozen_geometry") return InterferenceMode::frozen_geometry;
  throw DomainError("unknown interference mode '" + name +
                    "' (gaussian | exact_geometry | frozen_geometry)");
}

void SimConfig::validate() const {
  if (!(n_requests > warmup)) throw DomainError("n_requests must exceed warmup");
  if (!(arrival_rate > 0.0)) throw DomainError("arrival rate must be > 0");
  if (!(processing_rate > arrival_rate)) {
    throw StabilityError("Q1 unstable: processing rate must exceed arrival rate");
  }
  if (queue_cap == 0) throw DomainError("queue_cap must be > 0");
  channel.validate();
  deployment.validate();
  for (double d : deltas_s) {
    if (!(d >= 0.0)) throw DomainError("delay thresholds must be >= 0");
  }
}

InterferenceStats SimConfig::resolved_stats() const {
  if (stats) return *stats;
  return interference_stats(deployment, channel.tx_power_w, aperture_area(channel.frequency_hz));
}

void SimSummary::add(const RequestRecord& r) {
  if (within_delta.size() != deltas_s.size()) within_delta.assign(deltas_s.size(), 0);
  ++count;
  sum_q1_wait_s += r.q1_wait_s;
  sum_q1_service_s += r.q1_service_s;
  sum_q2_wait_s += r.q2_wait_s;
  sum_q2_service_s += r.q2_service_s;
  sum_e2e_s += r.e2e_s;
  for (std::size_t i = 0; i < deltas_s.size(); ++i) {
    if (r.e2e_s <= deltas_s[i]) ++within_delta[i];
  }
}

SimSummary& SimSummary::merge(const SimSummary& other) {
  if (other.count == 0) return *this;
  if (count == 0) return *this = other;
  if (deltas_s != other.deltas_s) throw DomainError("cannot merge summaries with different deltas");
  count += other.count;
  sum_q1_wait_s += other.sum_q1_wait_s;
  sum_q1_service_s += other.sum_q1_service_s;
  sum_q2_wait_s += other.sum_q2_wait_s;
  sum_q2_service_s += other.sum_q2_service_s;
  sum_e2e_s += other.sum_e2e_s;
  for (std::size_t i = 0; i < within_delta.size(); ++i) within_delta[i] += other.within_delta[i];
  return *this;
}

namespace {
double per_request(double sum, std::size_t count) {
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}
}  // namespace

double SimSummary::mean_q1_delay_s() const {
  return per_request(sum_q1_wait_s + sum_q1_service_s, count);
}
double SimSummary::mean_q2_delay_s() const {
  return per_request(sum_q2_wait_s + sum_q2_service_s, count);
}
double SimSummary::mean_q2_wait_s() const { return per_request(sum_q2_wait_s, count); }
double SimSummary::mean_e2e_s() const { return per_request(sum_e2e_s, count); }
double SimSummary::reliability(std::size_t i) const {
  return count == 0 ? 0.0 : static_cast<double>(within_delta.at(i)) / static_cast<double>(count);
}

std::vector<double> sample_tx_delays(const SimConfig& cfg, std::size_t n) {
  cfg.channel.validate();
  InterferenceSource interference(cfg, kInterferenceStream);
  std::vector<double> out(n);
  for (auto& a : out) a = tx_delay(cfg.channel, interference());
  return out;
}

SimResult run_tandem(const SimConfig& cfg) {
  cfg.validate();
  SimResult result;
  result.seed = cfg.seed;

  result.pilot_mean_service_s = pilot_mean_service(cfg);
  const double load = cfg.arrival_rate * result.pilot_mean_service_s;
  if (!(load < 1.0)) {
    throw StabilityError("Q2 unstable: pilot utilization " + std::to_string(load) + " >= 1");
  }

  Engine arrivals = make_engine(cfg.seed, kArrivalStream);
  Engine processing = make_engine(cfg.seed, kProcessingStream);
  std::exponential_distribution<double> gap(cfg.arrival_rate);
  std::exponential_distribution<double> work(cfg.processing_rate);
  InterferenceSource interference(cfg, kInterferenceStream);

  const std::size_t n = cfg.n_requests;
  std::vector<RequestRecord> rec(n);
  std::vector<double> q2_entry(n, 0.0);
  std::priority_queue<Event, std::vector<Event>, Later> events;
  std::uint64_t seq = 0;
  auto schedule = [&](double t, EventKind k, std::uint64_t id) { events.push({t, seq++, k, id}); };

  std::deque<std::uint64_t> q1_line;
  std::deque<std::uint64_t> q2_line;
  bool q1_busy = false;
  bool q2_busy = false;

  auto start_q1 = [&](std::uint64_t id, double now) {
    q1_busy = true;
    rec[id].q1_wait_s = now - rec[id].arrival_s;
    rec[id].q1_service_s = work(processing);
    schedule(now + rec[id].q1_service_s, EventKind::q1_done, id);
  };
  auto start_q2 = [&](std::uint64_t id, double now) {
    q2_busy = true;
    rec[id].q2_wait_s = now - q2_entry[id];
    rec[id].interference_w = interference();
    rec[id].q2_service_s = tx_delay(cfg.channel, rec[id].interference_w);
    schedule(now + rec[id].q2_service_s, EventKind::q2_done, id);
  };
  auto guard = [&](const std::deque<std::uint64_t>& line, const char* which) {
    if (line.size() > cfg.queue_cap) {
      throw StabilityError(std::string(which) + " length exceeded queue_cap " +
                           std::to_string(cfg.queue_cap) + "; system diverging");
    }
  };

  schedule(gap(arrivals), EventKind::arrival, 0);
  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    const double now = ev.time;
    switch (ev.kind) {
      case EventKind::arrival:
        rec[ev.id].id = ev.id;
        rec[ev.id].arrival_s = now;
        if (ev.id + 1 < n) schedule(now + gap(arrivals), EventKind::arrival, ev.id + 1);
        if (q1_busy) {
          q1_line.push_back(ev.id);
          guard(q1_line, "Q1");
          result.max_q1_length = std::max(result.max_q1_length, q1_line.size());
        } else {
          start_q1(ev.id, now);
        }
        break;
      case EventKind::q1_done:
        q1_busy = false;
        q2_entry[ev.id] = now;
        if (q2_busy) {
          q2_line.push_back(ev.id);
          guard(q2_line, "Q2");
          result.max_q2_length = std::max(result.max_q2_length, q2_line.size());
        } else {
          start_q2(ev.id, now);
        }
        if (!q1_line.empty()) {
          const auto next = q1_line.front();
          q1_line.pop_front();
          start_q1(next, now);
        }
        break;
      case EventKind::q2_done:
        q2_busy = false;
        rec[ev.id].e2e_s = now - rec[ev.id].arrival_s;
        if (!q2_line.empty()) {
          const auto next = q2_line.front();
          q2_line.pop_front();
          start_q2(next, now);
        }
        break;
    }
  }

  result.summary.deltas_s = cfg.deltas_s;
  result.summary.within_delta.assign(cfg.deltas_s.size(), 0);
  for (std::size_t i = cfg.warmup; i < n; ++i) result.summary.add(rec[i]);
  if (cfg.keep_records) {
    result.records.assign(rec.begin() + static_cast<std::ptrdiff_t>(cfg.warmup), rec.end());
  }
  return result;
}

std::vector<SimResult> run_replications(const SimConfig& cfg, std::size_t replications,
                                        unsigned threads) {
  return parallel_map(
      replications,
      [&cfg](std::size_t i) {
        SimConfig c = cfg;
        c.seed = cfg.seed + i;
        return run_tandem(c);
      },
      threads);
}

EmpiricalDist empirical_dist(std::span<const double> samples, const Grid& grid) {
  if (samples.empty()) throw DomainError("empirical_dist needs at least one sample");
  const double h = grid.step;
  std::vector<double> counts(grid.size, 0.0);
  std::vector<double> at_or_below(grid.size, 0.0);
  for (double x : samples) {
    if (x < 0.0) throw DomainError("empirical_dist expects non-negative samples");
    const double pos = x / h;
    const double bin = std::floor(pos + 0.5);
    if (bin < static_cast<double>(grid.size)) {
      // the last bin is the half cell [T - h/2, T]
      if (bin < static_cast<double>(grid.size - 1) || pos <= bin) {
        counts[static_cast<std::size_t>(bin)] += 1.0;
      }
    }
    // index of the first grid point >= x
    const double first = std::ceil(pos);
    if (first < static_cast<double>(grid.size)) at_or_below[static_cast<std::size_t>(first)] += 1.0;
  }
  const double total = static_cast<double>(samples.size());
  std::vector<double> pdf(grid.size);
  std::vector<double> cdf(grid.size);
  double running = 0.0;
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double width = (i == 0 || i + 1 == grid.size) ? 0.5 * h : h;
    pdf[i] = counts[i] / (total * width);
    running += at_or_below[i];
    cdf[i] = running / total;
  }
  return {TabulatedDist(grid, DistKind::pdf, std::move(pdf), "histogram"),
          TabulatedDist(grid, DistKind::cdf, std::move(cdf), "ecdf")};
}

std::vector<double> e2e_delays(std::span<const RequestRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.e2e_s);
  return out;
}

void write_records_csv(std::ostream& out, std::span<const RequestRecord> records) {
  out << "id,arrival_s,q1_wait_s,q1_service_s,q2_wait_s,q2_service_s,interference_w,e2e_s\n";
  const auto old = out.precision(12);
  for (const auto& r : records) {
    out << r.id << ',' << r.arrival_s << ',' << r.q1_wait_s << ',' << r.q1_service_s << ','
        << r.q2_wait_s << ',' << r.q2_service_s << ',' << r.interference_w << ',' << r.e2e_s
        << '\n';
  }
  out.precision(old);
}

void write_summary(std::ostream& out, const SimSummary& s) {
  const auto old = out.precision(10);
  out << "requests=" << s.count << '\n'
      << "mean_q1_delay_s=" << s.mean_q1_delay_s() << '\n'
      << "mean_q2_wait_s=" << s.mean_q2_wait_s() << '\n'
      << "mean_q2_delay_s=" << s.mean_q2_delay_s() << '\n'
      << "mean_e2e_s=" << s.mean_e2e_s() << '\n';
  for (std::size_t i = 0; i < s.deltas_s.size(); ++i) {
    out << "reliability_at_" << s.deltas_s[i] << "s=" << s.reliability(i) << '\n';
  }
  out.precision(old);
}

}  // namespace thzrel
