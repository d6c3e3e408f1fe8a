#pragma once

#include "qbcsim/config.hpp"
#include "qbcsim/engine.hpp"

namespace qbc {

// Everything about a configuration that does not depend on per-trial
// randomness: post-aperture states, their transmissions, the screen
// patterns at t1 for each slit setting, and the exact moments of the
// log bin-probability under honest sampling (used to standardize the
// verifier's likelihood statistic). Computed once, then sessions are pure
// sampling.
struct PatternSet {
  Grid grid;

  // Post-aperture states at the slit plane, renormalized.
  ComplexField field_both, field_left, field_right;

  // Transmission probabilities realized by the aperture geometry.
  double alpha_both = 0.0, alpha_left = 0.0, alpha_right = 0.0;

  // P(which-slit measurement yields Left | both slits open).
  double p_left_given_both = 0.5;

  // Normalized screen patterns at t1. screen_mix is the incoherent equal
  // mixture of the two single-slit patterns: what any which-slit-measured
  // source shows, fringeless. It is the alternative hypothesis for the
  // fringe likelihood-ratio check.
  ScreenPattern screen_both, screen_left, screen_right, screen_mix;

  // E[log p_bin] and Var[log p_bin] for a position drawn honestly from each
  // pattern.
  double mu_logp[3] = {0, 0, 0};
  double var_logp[3] = {0, 0, 0};

  // Fast inverse-CDF samplers over the screen patterns.
  PatternSampler sampler_both, sampler_left, sampler_right;

  // How far the fastest representable momentum component travels during the
  // flight. When this exceeds the room left between the envelope and the
  // grid edge, hard-edge diffraction tails wrap the periodic domain and
  // contaminate the pattern; wrap_ok records that the domain is wide enough.
  double max_displacement = 0.0;
  bool wrap_ok = true;

  const ScreenPattern& screen(SlitOpen open) const;
  const PatternSampler& sampler(SlitOpen open) const;
  const ComplexField& slit_field(SlitOpen open) const;
  double alpha_geometric(SlitOpen open) const;
  // Transmission actually used for trial sampling: the geometric value, or
  // the config override when set.
  double alpha_effective(SlitOpen open, const ProtocolConfig& cfg) const;
  double mu(SlitOpen open) const { return mu_logp[static_cast<int>(open)]; }
  double var(SlitOpen open) const { return var_logp[static_cast<int>(open)]; }
};

PatternSet compute_patterns(const ProtocolConfig& cfg);

// Log of the bin probability of x under the pattern, floored at -800 for
// bins carrying zero mass (log of the smallest double is about -744).
double log_bin_probability(const ScreenPattern& pattern, double x);

}  // namespace qbc
