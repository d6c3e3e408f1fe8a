#pragma once

#include <numbers>

namespace qbc::constants {

// SI values. hbar and the neutron mass follow CODATA; the lifetime is the
// PDG value the protocol's timing is built around.
inline constexpr double hbar = 1.0545718e-34;                // J s
inline constexpr double neutron_mass = 1.67492749804e-27;    // kg
inline constexpr double neutron_lifetime = 885.7;            // s
inline constexpr double planck_h = 2.0 * std::numbers::pi * hbar;

// de Broglie momentum for a matter wave of the given wavelength.
inline constexpr double de_broglie_momentum(double wavelength_m) {
  return planck_h / wavelength_m;
}

}  // namespace qbc::constants
