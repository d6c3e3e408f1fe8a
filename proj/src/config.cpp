#include "qbcsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbcsim/errors.hpp"

namespace qbc {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigGuard("config: key '" + key + "' has non-numeric value '" + value + "'");
  }
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigGuard("config: key '" + key + "' has non-integer value '" + value + "'");
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigGuard("config: " + message);
}

}  // namespace

GuessRule parse_guess_rule(const std::string& name) {
  if (name == "coinflip") return GuessRule::CoinFlip;
  if (name == "maxlikelihood") return GuessRule::MaxLikelihood;
  throw ConfigGuard("config: unknown guess_rule '" + name +
                    "' (expected coinflip or maxlikelihood)");
}

std::string guess_rule_name(GuessRule rule) {
  return rule == GuessRule::CoinFlip ? "coinflip" : "maxlikelihood";
}

void ProtocolConfig::finalize() {
  require(wavelength > 0.0, "wavelength must be positive");
  require(slit_width > 0.0, "slit_width must be positive");
  require(slit_separation > slit_width, "slit_separation must exceed slit_width");
  require(screen_distance > 0.0, "screen_distance must be positive");
  require(sigma0 > 0.0, "sigma0 must be positive");
  require(edge_softness >= 0.0, "edge_softness must be nonnegative");
  require(mass > 0.0, "mass must be positive");
  require(tau > 0.0, "tau must be positive");
  require(grid_points >= 2 && (grid_points & (grid_points - 1)) == 0,
          "grid_points must be a power of two >= 2");
  require(trials >= 1, "trials must be >= 1");
  require(epsilon_v > 0.0 && epsilon_v < 0.5, "epsilon_v must lie in (0, 0.5)");
  require(both_prob >= 0.0 && both_prob <= 1.0, "both_prob must lie in [0,1]");
  require(alpha_override < 0.0 || alpha_override <= 1.0,
          "alpha_override must be negative (off) or in [0,1]");
  require(announce_fraction > 0.0 && announce_fraction <= 1.0,
          "announce_fraction must lie in (0,1]");
  require(t1_guard_divisor >= 1.0, "t1_guard_divisor must be >= 1");

  if (grid_halfwidth == 0.0) grid_halfwidth = 64.0 * envelope_halfwidth();
  require(grid_halfwidth > 0.0, "grid_halfwidth must be positive");

  // An aperture sampled by only a handful of grid points produces a
  // percent-level-wrong diffraction pattern with spurious fine ripples; the
  // domain must be refined until each slit spans a safe number of bins.
  const double dx = 2.0 * grid_halfwidth / static_cast<double>(grid_points);
  if (slit_width / dx < 8.0)
    throw ConfigGuard(
        "config: each slit must span at least 8 grid points (slit_width / dx = " +
        fmt17(slit_width / dx) + "); increase grid_points or shrink grid_halfwidth");

  if (t1 == 0.0) t1 = t0 + flight_time();
  if (commit_end == 0.0) commit_end = tau;
  if (unveil_time == 0.0) unveil_time = commit_end;
  if (measure_time == 0.0) measure_time = tau;

  require(t0 > 0.0, "t0 must be positive");
  require(t1 > t0, "t1 must exceed t0");
  require(commit_end > t1, "commit_end must exceed t1");
  require(unveil_time >= commit_end, "unveil_time must be >= commit_end");
  if (t1 > tau / t1_guard_divisor)
    throw ConfigGuard("config: flight guard tripped, t1 = " + fmt17(t1) +
                      " exceeds tau / " + fmt17(t1_guard_divisor) +
                      " (decay must be negligible during honest flight)");
}

Grid ProtocolConfig::make_grid() const {
  return Grid(-grid_halfwidth, grid_halfwidth, static_cast<std::size_t>(grid_points));
}

PacketParams ProtocolConfig::make_packet() const {
  return PacketParams{sigma0, 0.0, 0.0, mass};
}

ApertureMask ProtocolConfig::make_mask(SlitOpen open) const {
  return ApertureMask{slit_width, slit_separation, open, edge_softness};
}

std::string ProtocolConfig::canonical_string() const {
  std::ostringstream out;
  out << "wavelength=" << fmt17(wavelength) << ";slit_width=" << fmt17(slit_width)
      << ";slit_separation=" << fmt17(slit_separation)
      << ";screen_distance=" << fmt17(screen_distance) << ";sigma0=" << fmt17(sigma0)
      << ";edge_softness=" << fmt17(edge_softness) << ";mass=" << fmt17(mass)
      << ";tau=" << fmt17(tau) << ";grid_points=" << grid_points
      << ";grid_halfwidth=" << fmt17(grid_halfwidth) << ";trials=" << trials
      << ";t0=" << fmt17(t0) << ";t1=" << fmt17(t1)
      << ";commit_end=" << fmt17(commit_end) << ";unveil_time=" << fmt17(unveil_time)
      << ";t1_guard_divisor=" << fmt17(t1_guard_divisor)
      << ";epsilon_v=" << fmt17(epsilon_v) << ";both_prob=" << fmt17(both_prob)
      << ";alpha_override=" << fmt17(alpha_override)
      << ";guess_rule=" << guess_rule_name(guess_rule)
      << ";measure_time=" << fmt17(measure_time)
      << ";announce_fraction=" << fmt17(announce_fraction);
  return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ProtocolConfig::hash() const { return fnv1a64(canonical_string()); }

ProtocolConfig parse_config_text(const std::string& text) {
  ProtocolConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigGuard("config: line " + std::to_string(lineno) +
                        " is not of the form key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigGuard("config: line " + std::to_string(lineno) +
                        " has an empty key or value");

    if (key == "wavelength") cfg.wavelength = parse_double(key, value);
    else if (key == "slit_width") cfg.slit_width = parse_double(key, value);
    else if (key == "slit_separation") cfg.slit_separation = parse_double(key, value);
    else if (key == "screen_distance") cfg.screen_distance = parse_double(key, value);
    else if (key == "sigma0") cfg.sigma0 = parse_double(key, value);
    else if (key == "edge_softness") cfg.edge_softness = parse_double(key, value);
    else if (key == "mass") cfg.mass = parse_double(key, value);
    else if (key == "tau") cfg.tau = parse_double(key, value);
    else if (key == "grid_points") cfg.grid_points = parse_count(key, value);
    else if (key == "grid_halfwidth") cfg.grid_halfwidth = parse_double(key, value);
    else if (key == "trials") cfg.trials = parse_count(key, value);
    else if (key == "t0") cfg.t0 = parse_double(key, value);
    else if (key == "t1") cfg.t1 = parse_double(key, value);
    else if (key == "commit_end") cfg.commit_end = parse_double(key, value);
    else if (key == "unveil_time") cfg.unveil_time = parse_double(key, value);
    else if (key == "t1_guard_divisor") cfg.t1_guard_divisor = parse_double(key, value);
    else if (key == "epsilon_v") cfg.epsilon_v = parse_double(key, value);
    else if (key == "both_prob") cfg.both_prob = parse_double(key, value);
    else if (key == "alpha_override") cfg.alpha_override = parse_double(key, value);
    else if (key == "guess_rule") cfg.guess_rule = parse_guess_rule(value);
    else if (key == "measure_time") cfg.measure_time = parse_double(key, value);
    else if (key == "announce_fraction") cfg.announce_fraction = parse_double(key, value);
    else
      throw ConfigGuard("config: unknown key '" + key + "' on line " +
                        std::to_string(lineno));
  }
  cfg.finalize();
  return cfg;
}

ProtocolConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigGuard("config: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace qbc
