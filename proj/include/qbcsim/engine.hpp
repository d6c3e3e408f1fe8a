#pragma once

#include <vector>

#include "qbcsim/constants.hpp"
#include "qbcsim/grid.hpp"
#include "qbcsim/rng.hpp"

namespace qbc {

// Initial transverse wave packet: Gaussian of position-space standard
// deviation sigma0 centered at x0, carrying transverse momentum p0. The
// packet is prepared at the slit plane; longitudinal motion is handled
// parametrically through flight times.
struct PacketParams {
  double sigma0 = 0.0;  // m
  double x0 = 0.0;      // m
  double p0 = 0.0;      // kg m/s
  double mass = 0.0;    // kg
};

enum class SlitOpen { Both, LeftOnly, RightOnly };

enum class Slit { Left, Right };

// Double-slit screen. Slit centers sit at -d/2 and +d/2; each open slit
// transmits over a width a, optionally with raised-cosine edges of
// half-width edge_softness (0 keeps textbook hard edges).
struct ApertureMask {
  double slit_width = 0.0;       // a, m
  double slit_separation = 0.0;  // d, center-to-center, m
  SlitOpen open = SlitOpen::Both;
  double edge_softness = 0.0;    // m
};

// Probability density on the screen, stored per grid point.
struct ScreenPattern {
  Grid grid;
  std::vector<double> intensity;
  double total_weight = 0.0;

  ScreenPattern() = default;
  explicit ScreenPattern(const Grid& g) : grid(g), intensity(g.n_points, 0.0) {}

  void recompute_weight();
  void normalize();
  // Probability mass of the bin containing x (nearest grid point).
  double bin_probability(double x) const;
  std::size_t bin_index(double x) const;
};

struct ApertureResult {
  ComplexField field;
  double transmitted_fraction = 0.0;
  bool all_blocked = false;
};

struct WhichSlitResult {
  Slit slit = Slit::Left;
  ComplexField collapsed;
};

// Transmission profile of the mask sampled on a grid; values in [0,1].
std::vector<double> mask_profile(const ApertureMask& mask, const Grid& grid);

ComplexField make_gaussian_packet(const PacketParams& params, const Grid& grid,
                                  double hbar = constants::hbar);

// Exact free-particle step: multiply each momentum component by
// exp(-i hbar k^2 dt / (2 mass)). dt = 0 returns the input unchanged.
ComplexField evolve_free(const ComplexField& field, double mass, double dt,
                         double hbar = constants::hbar);

// Multiply by the aperture profile. transmitted_fraction is the surviving
// norm^2, which realizes the per-trial transmission probability; the output
// field is renormalized unless everything was blocked.
ApertureResult apply_aperture(const ComplexField& field, const ApertureMask& mask);
ApertureResult apply_mask_profile(const ComplexField& field,
                                  const std::vector<double>& profile);

ScreenPattern intensity(const ComplexField& field);

// Closed-form far-field pattern used as an oracle for the numeric
// propagator. Both slits: cos^2(pi d x / (lambda L)) * sinc^2 envelope;
// one slit: the sinc^2 envelope centered on that slit's position.
ScreenPattern analytic_fraunhofer(const ApertureMask& mask, double wavelength,
                                  double L, const Grid& grid);
// Far-field validity guard L >> d^2 / lambda (taken as L >= 10 d^2/lambda).
bool fraunhofer_far_field_ok(const ApertureMask& mask, double wavelength, double L);

// Inverse-CDF draw from the pattern; returns the selected grid point.
double sample_position(const ScreenPattern& pattern, RandomStream& rng);

// Precomputed cumulative weights for repeated draws from one pattern.
// sample() consumes one uniform and selects the same grid point that
// sample_position would for that uniform, in O(log n).
class PatternSampler {
 public:
  PatternSampler() = default;
  explicit PatternSampler(const ScreenPattern& pattern);
  double sample(RandomStream& rng) const;
  bool empty() const { return cumulative_.empty(); }

 private:
  Grid grid_;
  std::vector<double> cumulative_;
};

// Projective which-slit measurement on the post-aperture field: Left with
// probability equal to the norm^2 left of the slit midplane, and the state
// collapses to that half, renormalized.
WhichSlitResult which_slit_measure(const ComplexField& field_at_slits,
                                   const ApertureMask& mask, RandomStream& rng);

}  // namespace qbc
