#pragma once

#include <cstdint>
#include <vector>

#include "qbcsim/engine.hpp"

namespace qbc {

// Survival function of the chi-square distribution with k degrees of
// freedom, via the regularized upper incomplete gamma Q(k/2, x/2).
double chi_square_sf(double x, double k);

// Exact two-sided binomial test: sum of the probabilities of all outcomes
// whose pmf does not exceed that of the observed count (standard
// small-sample convention, ties included).
double binomial_two_sided(std::uint64_t successes, std::uint64_t n, double p0);

// Pearson goodness-of-fit with adjacent-bin merging so every merged bin has
// expected count >= min_expected. Returns p = 1 when fewer than two merged
// bins remain (nothing to test).
struct ChiSquareFit {
  double statistic = 0.0;
  std::uint64_t dof = 0;
  double p_value = 1.0;
  std::uint64_t merged_bins = 0;
};
ChiSquareFit chi_square_gof(const std::vector<double>& observed,
                            const std::vector<double>& expected,
                            double min_expected = 5.0);

// Michelson-style visibility inside [window_lo, window_hi]: the maximum of
// (hi - lo)/(hi + lo) over adjacent pairs of strict local extrema of the
// pattern. A window with no oscillation (flat, monotone, or single-peaked)
// scores 0.
double fringe_contrast(const ScreenPattern& pattern, double window_lo,
                       double window_hi);

// Standard deviation of position under the pattern's density.
double pattern_sd(const ScreenPattern& pattern);

// Mean spacing of the prominent fringe maxima (local maxima above
// min_height x the global peak); 0 when fewer than two qualify.
double measure_fringe_spacing(const ScreenPattern& pattern, double min_height = 0.3);

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);

// Empirical q-quantile of a sample (linear interpolation between order
// statistics); input need not be sorted.
double empirical_quantile(std::vector<double> xs, double q);

}  // namespace qbc
