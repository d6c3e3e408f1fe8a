#pragma once

#include <cstdint>
#include <string>

#include "qbcsim/constants.hpp"
#include "qbcsim/engine.hpp"

namespace qbc {

enum class GuessRule { CoinFlip, MaxLikelihood };

GuessRule parse_guess_rule(const std::string& name);
std::string guess_rule_name(GuessRule rule);

// Every knob of a run: apparatus geometry, packet shape, grid, protocol
// times and counts, verifier significance, and adversary parameters. Loaded
// from a flat `key = value` file; unset derived fields (marked "0 = auto")
// are filled in by finalize() from the physics.
struct ProtocolConfig {
  // Apparatus and beam.
  double wavelength = 1.845e-9;       // de Broglie wavelength, m
  double slit_width = 2.2e-5;         // a, m
  double slit_separation = 1.0e-4;    // d, m
  double screen_distance = 5.0;       // L, m
  double sigma0 = 5.0e-5;             // transverse packet sd at the slits, m
  double edge_softness = 0.0;         // aperture edge rolloff, m
  double mass = constants::neutron_mass;
  double tau = constants::neutron_lifetime;

  // Discretization. The auto halfwidth is generous because hard slit edges
  // populate wavenumbers up to the grid Nyquist, and those components move
  // far during the flight; the domain must contain them or they wrap around
  // the periodic boundary and ripple the screen pattern.
  std::uint64_t grid_points = 131072;
  double grid_halfwidth = 0.0;        // m; 0 = auto (64x far-field envelope)

  // Protocol schedule and size.
  std::uint64_t trials = 200;         // N
  double t0 = 0.01;                   // slit arrival, s
  double t1 = 0.0;                    // screen arrival, s; 0 = auto (t0 + flight)
  double commit_end = 0.0;            // s; 0 = auto (tau)
  double unveil_time = 0.0;           // T, s; 0 = auto (commit_end)
  double t1_guard_divisor = 100.0;    // enforce t1 <= tau / divisor

  // Verifier.
  double epsilon_v = 0.001;

  // Trial distribution: P(both open); each single-slit case gets half the
  // remainder.
  double both_prob = 0.5;
  // Negative = transmission emerges from the aperture geometry; otherwise
  // this value replaces the per-trial transmission probability.
  double alpha_override = -1.0;

  // Adversary knobs.
  GuessRule guess_rule = GuessRule::MaxLikelihood;
  double measure_time = 0.0;          // delayed-measurement T_m, s; 0 = auto (tau)
  double announce_fraction = 1.0;

  // Derived kinematics.
  double momentum() const { return constants::de_broglie_momentum(wavelength); }
  double velocity() const { return momentum() / mass; }
  double flight_time() const { return screen_distance / velocity(); }
  double fringe_spacing() const { return wavelength * screen_distance / slit_separation; }
  double envelope_halfwidth() const { return wavelength * screen_distance / slit_width; }

  // Fill auto fields and validate invariants; throws ConfigGuard.
  void finalize();

  Grid make_grid() const;
  PacketParams make_packet() const;
  ApertureMask make_mask(SlitOpen open) const;

  // Stable textual form of every physics- and protocol-relevant field, and
  // its FNV-1a hash; used to key calibration caches and run directories.
  std::string canonical_string() const;
  std::uint64_t hash() const;
};

std::uint64_t fnv1a64(const std::string& text);

// Flat config file: one `key = value` per line, `#` comments, unknown keys
// rejected. Returns a finalized config.
ProtocolConfig parse_config_text(const std::string& text);
ProtocolConfig load_config_file(const std::string& path);

}  // namespace qbc
