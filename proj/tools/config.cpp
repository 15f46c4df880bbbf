#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace thzrel::cli {
namespace {

#include "reconstruction_preset.inc"

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

const KeySpec* find_key(const std::string& name) {
  const auto& keys = known_keys();
  const auto it = std::find_if(keys.begin(), keys.end(),
                               [&](const KeySpec& k) { return k.name == name; });
  return it == keys.end() ? nullptr : &*it;
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

std::string to_string(Origin origin) {
  switch (origin) {
    case Origin::stated:
      return "stated";
    case Origin::artifact:
      return "default";
    case Origin::preset:
      return "reconstruction";
    case Origin::file:
      return "config";
    case Origin::flag:
      return "command line";
  }
  return "?";
}

const std::vector<KeySpec>& known_keys() {
  static const std::vector<KeySpec> keys = {
      {"preset", "reconstruction", Origin::artifact, "reconstruction | none"},
      {"channel.frequency_hz", "1e12", Origin::stated, "carrier frequency"},
      {"channel.absorption_per_m", "0.0016", Origin::stated, "molecular absorption coefficient K"},
      {"channel.temperature_k", "300", Origin::stated, "system temperature"},
      {"channel.tx_power_w", "1", Origin::stated, "SBS transmit power"},
      {"channel.packet_bits", "10e6", Origin::stated, "VR packet size L"},
      {"channel.bandwidth_hz", std::nullopt, Origin::stated, "bandwidth W"},
      {"channel.link_distance_m", std::nullopt, Origin::stated, "tagged link distance d0"},
      {"deployment.area_side_m", "20", Origin::stated, "side of the square area"},
      {"deployment.intensity_per_m2", std::nullopt, Origin::stated, "SBS intensity eta"},
      {"deployment.hard_core_m", std::nullopt, Origin::stated, "hard-core distance r"},
      {"deployment.interference_radius_m", std::nullopt, Origin::stated,
       "region of non-negligible interference Omega"},
      {"interference.sigma_scale", "1", Origin::artifact,
       "multiplier on the interference standard deviation"},
      {"queue.arrival_rate", "0.1", Origin::stated, "request arrival rate lambda1"},
      {"queue.processing_rate", std::nullopt, Origin::stated, "processing rate mu1"},
      {"queue.q2_arrival_rate", "auto", Origin::artifact,
       "transmission-queue arrival rate; auto = arrival_rate, mu1 = processing_rate"},
      {"queue.eps_tail", "1e-9", Origin::artifact, "series truncation tolerance"},
      {"reliability.deltas_s", "0.01, 0.02, 0.03", Origin::artifact, "delay thresholds"},
      {"reliability.target", "0.99999", Origin::stated, "reliability target"},
      {"grid.delta_max_s", "0.03", Origin::artifact, "largest threshold resolved"},
      {"grid.points_per_delta", "16384", Origin::artifact, "grid points per delta_max"},
      {"grid.horizon_mean_multiple", "8", Origin::artifact, "horizon / mean E2E delay"},
      {"grid.coverage_tol", "1e-3", Origin::artifact, "E2E mass allowed past the horizon"},
      {"grid.max_points", "4194304", Origin::artifact, "grid size limit"},
      {"txpdf.points", "201", Origin::artifact, "grid points of the transmission delay plot"},
      {"txpdf.tail_sigmas", "8", Origin::artifact, "grid end in interference sigmas"},
      {"txpdf.samples", "100000", Origin::artifact, "simulated packets"},
      {"sim.requests", "100000", Origin::artifact, "measured requests per replication"},
      {"sim.warmup", "10000", Origin::artifact, "discarded initial requests"},
      {"sim.seed", "1", Origin::artifact, "base seed"},
      {"sim.mode", "gaussian", Origin::artifact, "gaussian | exact_geometry | frozen_geometry"},
      {"sim.queue_cap", "1000000", Origin::artifact, "divergence guard"},
      {"sim.replications", "1", Origin::artifact, "independent replications"},
      {"sweep_bandwidth.min_hz", std::nullopt, Origin::stated, "first bandwidth"},
      {"sweep_bandwidth.max_hz", std::nullopt, Origin::stated, "last bandwidth"},
      {"sweep_bandwidth.points", std::nullopt, Origin::stated, "number of bandwidths"},
      {"sweep_region.omega_min_m", std::nullopt, Origin::stated, "first Omega"},
      {"sweep_region.omega_max_m", std::nullopt, Origin::stated, "last Omega"},
      {"sweep_region.points", std::nullopt, Origin::stated, "number of Omegas"},
      {"sweep_region.link_distances_m", std::nullopt, Origin::stated, "d0 values, one curve each"},
      {"sweep_region.delta_s", std::nullopt, Origin::stated, "threshold of the region sweep"},
      {"output.dir", "out", Origin::artifact, "output directory"},
  };
  return keys;
}

const std::string& reconstruction_preset() {
  static const std::string text = kReconstructionPreset;
  return text;
}

ExperimentConfig::ExperimentConfig() {
  for (const auto& k : known_keys()) {
    if (k.value) values_[k.name] = {*k.value, k.origin};
  }
}

void ExperimentConfig::merge_text(const std::string& text, const std::string& source,
                                  Origin origin) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    const auto comment = line.find_first_of("#;");
    const std::string body = trim(std::string_view(line).substr(0, comment));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) {
        throw ConfigError(where + "malformed section header '" + body + "'");
      }
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + body + "'");
    std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    try {
      set(key, value, origin);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void ExperimentConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  merge_text(buf.str(), path.string(), Origin::file);
}

void ExperimentConfig::set(const std::string& assignment, Origin origin) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(std::string_view(assignment).substr(0, eq)),
      trim(std::string_view(assignment).substr(eq + 1)), origin);
}

void ExperimentConfig::set(const std::string& key, const std::string& value, Origin origin) {
  if (!find_key(key)) throw ConfigError("unknown key '" + key + "'");
  if (value.empty()) throw ConfigError("key '" + key + "' has an empty value");
  values_[key] = {value, origin};
}

bool ExperimentConfig::has(const std::string& key) const { return values_.contains(key); }

const std::string& ExperimentConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    const KeySpec* spec = find_key(key);
    throw ConfigError("missing required key '" + key + "'" +
                      (spec ? " (" + spec->help + ")" : std::string()) +
                      "; set it in the config or use the reconstruction preset");
  }
  return it->second.value;
}

Origin ExperimentConfig::origin(const std::string& key) const {
  raw(key);
  return values_.at(key).origin;
}

double ExperimentConfig::number(const std::string& key) const {
  return parse_number(key, raw(key));
}

std::size_t ExperimentConfig::count(const std::string& key) const {
  const double v = number(key);
  if (v < 0.0 || v != std::floor(v) || v > 1e15) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + raw(key) + "'");
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t ExperimentConfig::seed(const std::string& key) const {
  const std::string& text = raw(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  std::stringstream in(raw(key));
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number(key, trim(item)));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<std::string> ExperimentConfig::provenance() const {
  std::vector<std::string> out;
  for (const auto& [key, entry] : values_) {
    out.push_back(key + " = " + entry.value + "  (" + to_string(entry.origin) + ")");
  }
  return out;
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const std::optional<std::string>& preset,
                             const std::vector<std::string>& assignments) {
  ExperimentConfig file_only;
  if (file) file_only.merge_file(*file);
  const std::string chosen = preset.value_or(file_only.raw("preset"));

  ExperimentConfig cfg;
  if (chosen == "reconstruction") {
    cfg.merge_text(reconstruction_preset(), "<reconstruction preset>", Origin::preset);
  } else if (chosen != "none") {
    throw ConfigError("unknown preset '" + chosen + "' (reconstruction | none)");
  }
  if (file) cfg.merge_file(*file);
  cfg.set("preset", chosen, preset ? Origin::flag : file_only.origin("preset"));
  for (const auto& a : assignments) cfg.set(a, Origin::flag);
  return cfg;
}

}  // namespace thzrel::cli
