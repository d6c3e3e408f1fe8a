#include "qbcsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qbcsim/errors.hpp"
#include "qbcsim/fft.hpp"

namespace qbc {
namespace {

constexpr double pi = std::numbers::pi;

double sinc(double z) {
  if (std::abs(z) < 1e-12) return 1.0;
  return std::sin(z) / z;
}

// Raised-cosine transmission for one slit: 1 deep inside, 0 outside, with a
// half-cosine rolloff of total width 2*softness centered on each edge.
double slit_transmission(double x, double center, double half_width, double softness) {
  const double u = std::abs(x - center);
  if (softness <= 0.0) return u <= half_width ? 1.0 : 0.0;
  if (u <= half_width - softness) return 1.0;
  if (u >= half_width + softness) return 0.0;
  return 0.5 * (1.0 + std::cos(pi * (u - half_width + softness) / (2.0 * softness)));
}

void check_mask(const ApertureMask& mask) {
  if (!(mask.slit_width > 0.0)) throw InvalidParams("aperture: slit_width must be positive");
  if (!(mask.slit_separation > mask.slit_width))
    throw InvalidParams("aperture: slit_separation must exceed slit_width");
  if (mask.edge_softness < 0.0)
    throw InvalidParams("aperture: edge_softness must be nonnegative");
}

}  // namespace

void ScreenPattern::recompute_weight() {
  double acc = 0.0;
  for (double v : intensity) acc += v;
  total_weight = acc * grid.dx();
}

void ScreenPattern::normalize() {
  recompute_weight();
  if (!(total_weight > 0.0))
    throw DegeneratePattern("ScreenPattern: cannot normalize zero pattern");
  for (auto& v : intensity) v /= total_weight;
  total_weight = 1.0;
}

std::size_t ScreenPattern::bin_index(double x) const {
  const double raw = (x - grid.x_min) / grid.dx();
  auto i = static_cast<std::ptrdiff_t>(std::llround(raw));
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(grid.n_points) - 1);
  return static_cast<std::size_t>(i);
}

double ScreenPattern::bin_probability(double x) const {
  if (!(total_weight > 0.0)) throw DegeneratePattern("ScreenPattern: zero total weight");
  return intensity[bin_index(x)] * grid.dx() / total_weight;
}

std::vector<double> mask_profile(const ApertureMask& mask, const Grid& grid) {
  check_mask(mask);
  const double half = 0.5 * mask.slit_width;
  const double left_c = -0.5 * mask.slit_separation;
  const double right_c = +0.5 * mask.slit_separation;
  const bool left_open = mask.open != SlitOpen::RightOnly;
  const bool right_open = mask.open != SlitOpen::LeftOnly;
  std::vector<double> profile(grid.n_points, 0.0);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double x = grid.x(i);
    double t = 0.0;
    if (left_open) t = std::max(t, slit_transmission(x, left_c, half, mask.edge_softness));
    if (right_open) t = std::max(t, slit_transmission(x, right_c, half, mask.edge_softness));
    profile[i] = t;
  }
  return profile;
}

ComplexField make_gaussian_packet(const PacketParams& params, const Grid& grid,
                                  double hbar) {
  if (!(params.sigma0 > 0.0)) throw InvalidParams("packet: sigma0 must be positive");
  if (!(params.mass > 0.0)) throw InvalidParams("packet: mass must be positive");
  ComplexField field(grid);
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double u = grid.x(i) - params.x0;
    // |psi|^2 ~ exp(-u^2 / (2 sigma0^2)), so sigma0 is the position sd.
    const double envelope = std::exp(-u * u / (4.0 * params.sigma0 * params.sigma0));
    const double phase = params.p0 * u / hbar;
    field.values[i] = envelope * complexd{std::cos(phase), std::sin(phase)};
    peak = std::max(peak, envelope);
  }
  const double lo = std::abs(field.values.front());
  const double hi = std::abs(field.values.back());
  if (std::max(lo, hi) >= 1e-12 * peak)
    throw GridTooNarrow("packet: amplitude at grid boundary exceeds 1e-12 of peak");
  field.normalize();
  return field;
}

ComplexField evolve_free(const ComplexField& field, double mass, double dt,
                         double hbar) {
  if (!(mass > 0.0)) throw InvalidParams("evolve_free: mass must be positive");
  if (dt < 0.0) throw InvalidParams("evolve_free: dt must be nonnegative");
  if (dt == 0.0) return field;
  ComplexField out = field;
  fft_forward(out.values);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double k = out.grid.k(j);
    const double phase = -hbar * k * k * dt / (2.0 * mass);
    out.values[j] *= complexd{std::cos(phase), std::sin(phase)};
  }
  fft_inverse(out.values);
  return out;
}

ApertureResult apply_mask_profile(const ComplexField& field,
                                  const std::vector<double>& profile) {
  if (profile.size() != field.size())
    throw InvalidParams("apply_mask_profile: profile length mismatch");
  ApertureResult result;
  result.field = field;
  const double before = field.norm_squared();
  if (!(before > 0.0)) throw DegeneratePattern("apply_mask_profile: null input field");
  for (std::size_t i = 0; i < profile.size(); ++i) result.field.values[i] *= profile[i];
  const double after = result.field.norm_squared();
  result.transmitted_fraction = std::clamp(after / before, 0.0, 1.0);
  if (after > 0.0) {
    result.field.scale(1.0 / std::sqrt(after));
  } else {
    result.all_blocked = true;
  }
  return result;
}

ApertureResult apply_aperture(const ComplexField& field, const ApertureMask& mask) {
  return apply_mask_profile(field, mask_profile(mask, field.grid));
}

ScreenPattern intensity(const ComplexField& field) {
  ScreenPattern pattern(field.grid);
  for (std::size_t i = 0; i < field.size(); ++i)
    pattern.intensity[i] = std::norm(field.values[i]);
  pattern.recompute_weight();
  return pattern;
}

bool fraunhofer_far_field_ok(const ApertureMask& mask, double wavelength, double L) {
  return L >= 10.0 * mask.slit_separation * mask.slit_separation / wavelength;
}

ScreenPattern analytic_fraunhofer(const ApertureMask& mask, double wavelength,
                                  double L, const Grid& grid) {
  check_mask(mask);
  if (!(wavelength > 0.0) || !(L > 0.0))
    throw InvalidParams("fraunhofer: wavelength and L must be positive");
  const double lamL = wavelength * L;
  ScreenPattern pattern(grid);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double x = grid.x(i);
    double v = 0.0;
    switch (mask.open) {
      case SlitOpen::Both: {
        const double env = sinc(pi * mask.slit_width * x / lamL);
        const double fringe = std::cos(pi * mask.slit_separation * x / lamL);
        v = env * env * fringe * fringe;
        break;
      }
      case SlitOpen::LeftOnly: {
        const double u = x + 0.5 * mask.slit_separation;
        const double env = sinc(pi * mask.slit_width * u / lamL);
        v = env * env;
        break;
      }
      case SlitOpen::RightOnly: {
        const double u = x - 0.5 * mask.slit_separation;
        const double env = sinc(pi * mask.slit_width * u / lamL);
        v = env * env;
        break;
      }
    }
    pattern.intensity[i] = v;
  }
  pattern.normalize();
  return pattern;
}

double sample_position(const ScreenPattern& pattern, RandomStream& rng) {
  double total = 0.0;
  for (double v : pattern.intensity) total += v;
  if (!(total > 0.0)) throw DegeneratePattern("sample_position: zero pattern");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < pattern.intensity.size(); ++i) {
    acc += pattern.intensity[i];
    if (u < acc) return pattern.grid.x(i);
  }
  // Rounding can leave u == total; land on the last nonzero bin.
  for (std::size_t i = pattern.intensity.size(); i-- > 0;)
    if (pattern.intensity[i] > 0.0) return pattern.grid.x(i);
  throw DegeneratePattern("sample_position: zero pattern");
}

PatternSampler::PatternSampler(const ScreenPattern& pattern) : grid_(pattern.grid) {
  cumulative_.resize(pattern.intensity.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pattern.intensity.size(); ++i) {
    acc += pattern.intensity[i];
    cumulative_[i] = acc;
  }
  if (!(acc > 0.0)) throw DegeneratePattern("PatternSampler: zero pattern");
}

double PatternSampler::sample(RandomStream& rng) const {
  if (cumulative_.empty()) throw DegeneratePattern("PatternSampler: empty sampler");
  const double total = cumulative_.back();
  const double u = rng.uniform() * total;
  // First bin whose cumulative weight exceeds u: matches sample_position.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) {
    for (std::size_t i = cumulative_.size(); i-- > 0;) {
      const double prev = i == 0 ? 0.0 : cumulative_[i - 1];
      if (cumulative_[i] > prev) return grid_.x(i);
    }
    throw DegeneratePattern("PatternSampler: zero pattern");
  }
  return grid_.x(static_cast<std::size_t>(it - cumulative_.begin()));
}

WhichSlitResult which_slit_measure(const ComplexField& field_at_slits,
                                   const ApertureMask& mask, RandomStream& rng) {
  check_mask(mask);
  // The slit midplane is x = 0 by construction (slit centers at +-d/2).
  double left_w = 0.0, right_w = 0.0;
  for (std::size_t i = 0; i < field_at_slits.size(); ++i) {
    const double p = std::norm(field_at_slits.values[i]);
    if (field_at_slits.grid.x(i) < 0.0)
      left_w += p;
    else
      right_w += p;
  }
  const double total = left_w + right_w;
  if (!(total > 0.0))
    throw DegeneratePattern("which_slit_measure: no amplitude in either slit region");
  WhichSlitResult result;
  result.slit = rng.bernoulli(left_w / total) ? Slit::Left : Slit::Right;
  result.collapsed = field_at_slits;
  const bool keep_left = result.slit == Slit::Left;
  for (std::size_t i = 0; i < result.collapsed.size(); ++i) {
    const bool is_left = result.collapsed.grid.x(i) < 0.0;
    if (is_left != keep_left) result.collapsed.values[i] = complexd{0.0, 0.0};
  }
  result.collapsed.normalize();
  return result;
}

}  // namespace qbc
