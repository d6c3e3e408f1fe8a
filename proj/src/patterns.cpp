#include "qbcsim/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qbcsim/constants.hpp"
#include "qbcsim/errors.hpp"

namespace qbc {
namespace {

void logp_moments(const ScreenPattern& pattern, double& mu, double& var) {
  // Exact moments over the discrete bin distribution; zero-mass bins are
  // never sampled and contribute nothing.
  const double dx = pattern.grid.dx();
  double m1 = 0.0, m2 = 0.0;
  for (double v : pattern.intensity) {
    const double p = v * dx;
    if (p <= 0.0) continue;
    const double lp = std::log(p);
    m1 += p * lp;
    m2 += p * lp * lp;
  }
  mu = m1;
  var = std::max(0.0, m2 - m1 * m1);
}

}  // namespace

const ScreenPattern& PatternSet::screen(SlitOpen open) const {
  switch (open) {
    case SlitOpen::Both: return screen_both;
    case SlitOpen::LeftOnly: return screen_left;
    case SlitOpen::RightOnly: return screen_right;
  }
  throw StateMismatch("PatternSet: bad slit enum");
}

const PatternSampler& PatternSet::sampler(SlitOpen open) const {
  switch (open) {
    case SlitOpen::Both: return sampler_both;
    case SlitOpen::LeftOnly: return sampler_left;
    case SlitOpen::RightOnly: return sampler_right;
  }
  throw StateMismatch("PatternSet: bad slit enum");
}

const ComplexField& PatternSet::slit_field(SlitOpen open) const {
  switch (open) {
    case SlitOpen::Both: return field_both;
    case SlitOpen::LeftOnly: return field_left;
    case SlitOpen::RightOnly: return field_right;
  }
  throw StateMismatch("PatternSet: bad slit enum");
}

double PatternSet::alpha_geometric(SlitOpen open) const {
  switch (open) {
    case SlitOpen::Both: return alpha_both;
    case SlitOpen::LeftOnly: return alpha_left;
    case SlitOpen::RightOnly: return alpha_right;
  }
  throw StateMismatch("PatternSet: bad slit enum");
}

double PatternSet::alpha_effective(SlitOpen open, const ProtocolConfig& cfg) const {
  if (cfg.alpha_override >= 0.0) return cfg.alpha_override;
  return alpha_geometric(open);
}

PatternSet compute_patterns(const ProtocolConfig& cfg) {
  PatternSet set;
  set.grid = cfg.make_grid();
  const ComplexField packet = make_gaussian_packet(cfg.make_packet(), set.grid);
  const double dt = cfg.t1 - cfg.t0;

  const auto build = [&](SlitOpen open, ComplexField& slit_field, double& alpha,
                         ScreenPattern& screen, int idx) {
    const ApertureResult ap = apply_aperture(packet, cfg.make_mask(open));
    if (ap.all_blocked)
      throw DegeneratePattern("patterns: aperture blocks the entire packet");
    alpha = ap.transmitted_fraction;
    slit_field = ap.field;
    const ComplexField at_screen = evolve_free(ap.field, cfg.mass, dt);
    screen = intensity(at_screen);
    screen.normalize();
    logp_moments(screen, set.mu_logp[idx], set.var_logp[idx]);
  };

  build(SlitOpen::Both, set.field_both, set.alpha_both, set.screen_both,
        static_cast<int>(SlitOpen::Both));
  build(SlitOpen::LeftOnly, set.field_left, set.alpha_left, set.screen_left,
        static_cast<int>(SlitOpen::LeftOnly));
  build(SlitOpen::RightOnly, set.field_right, set.alpha_right, set.screen_right,
        static_cast<int>(SlitOpen::RightOnly));

  double left_w = 0.0, total_w = 0.0;
  for (std::size_t i = 0; i < set.field_both.size(); ++i) {
    const double p = std::norm(set.field_both.values[i]);
    total_w += p;
    if (set.grid.x(i) < 0.0) left_w += p;
  }
  set.p_left_given_both = left_w / total_w;

  set.sampler_both = PatternSampler(set.screen_both);
  set.sampler_left = PatternSampler(set.screen_left);
  set.sampler_right = PatternSampler(set.screen_right);

  set.screen_mix = ScreenPattern(set.grid);
  for (std::size_t i = 0; i < set.grid.n_points; ++i)
    set.screen_mix.intensity[i] =
        0.5 * (set.screen_left.intensity[i] + set.screen_right.intensity[i]);
  set.screen_mix.recompute_weight();

  // Hard slit edges carry momentum components all the way to the grid
  // Nyquist wavenumber; soft edges cut the spectrum near 1/softness. If the
  // fastest populated component can cross from the envelope to the boundary
  // within the flight, the periodic domain wraps it back into the pattern.
  double k_cut = std::numbers::pi / set.grid.dx();
  if (cfg.edge_softness > 0.0) k_cut = std::min(k_cut, 12.0 / cfg.edge_softness);
  set.max_displacement = constants::hbar * k_cut * dt / cfg.mass;
  set.wrap_ok = set.max_displacement + 8.0 * cfg.envelope_halfwidth() <=
                cfg.grid_halfwidth;
  return set;
}

double log_bin_probability(const ScreenPattern& pattern, double x) {
  const double p = pattern.bin_probability(x);
  if (p <= 0.0) return -800.0;
  return std::log(p);
}

}  // namespace qbc
