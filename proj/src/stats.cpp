#include "qbcsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbcsim/errors.hpp"

namespace qbc {
namespace {

// Regularized lower incomplete gamma P(a,x) by power series, valid and fast
// for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by Lentz continued fraction,
// valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double log_binomial_pmf(std::uint64_t m, std::uint64_t n, double p0) {
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  return std::lgamma(dn + 1.0) - std::lgamma(dm + 1.0) - std::lgamma(dn - dm + 1.0) +
         dm * std::log(p0) + (dn - dm) * std::log1p(-p0);
}

}  // namespace

double chi_square_sf(double x, double k) {
  if (x < 0.0) throw InvalidParams("chi_square_sf: x must be nonnegative");
  if (!(k >= 1.0)) throw InvalidParams("chi_square_sf: k must be >= 1");
  if (x == 0.0) return 1.0;
  const double a = 0.5 * k;
  const double z = 0.5 * x;
  if (z < a + 1.0) return 1.0 - gamma_p_series(a, z);
  return gamma_q_cf(a, z);
}

double binomial_two_sided(std::uint64_t successes, std::uint64_t n, double p0) {
  if (successes > n) throw InvalidParams("binomial_two_sided: successes > n");
  if (!(p0 > 0.0 && p0 < 1.0)) throw InvalidParams("binomial_two_sided: p0 outside (0,1)");
  if (n == 0) return 1.0;
  const double log_obs = log_binomial_pmf(successes, n, p0);
  // Include every outcome at most as probable as the observed one, with a
  // relative tolerance so exact ties (e.g. the mirror outcome at p0=0.5)
  // are not lost to rounding.
  const double cutoff = log_obs + 1e-12 * std::abs(log_obs) + 1e-12;
  double p = 0.0;
  for (std::uint64_t m = 0; m <= n; ++m) {
    const double lp = log_binomial_pmf(m, n, p0);
    if (lp <= cutoff) p += std::exp(lp);
  }
  return std::min(p, 1.0);
}

ChiSquareFit chi_square_gof(const std::vector<double>& observed,
                            const std::vector<double>& expected,
                            double min_expected) {
  if (observed.size() != expected.size())
    throw InvalidParams("chi_square_gof: length mismatch");
  std::vector<double> obs_m, exp_m;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < 0.0) throw InvalidParams("chi_square_gof: negative expectation");
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= min_expected) {
      obs_m.push_back(o_acc);
      exp_m.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  // Fold any undersized tail into the final merged bin.
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (obs_m.empty()) {
      obs_m.push_back(o_acc);
      exp_m.push_back(e_acc);
    } else {
      obs_m.back() += o_acc;
      exp_m.back() += e_acc;
    }
  }
  ChiSquareFit fit;
  fit.merged_bins = obs_m.size();
  if (obs_m.size() < 2) return fit;
  double stat = 0.0;
  for (std::size_t i = 0; i < obs_m.size(); ++i) {
    const double d = obs_m[i] - exp_m[i];
    stat += d * d / exp_m[i];
  }
  fit.statistic = stat;
  fit.dof = obs_m.size() - 1;
  fit.p_value = chi_square_sf(stat, static_cast<double>(fit.dof));
  return fit;
}

double fringe_contrast(const ScreenPattern& pattern, double window_lo,
                       double window_hi) {
  if (!(window_hi > window_lo)) throw InvalidParams("fringe_contrast: empty window");
  const Grid& g = pattern.grid;
  std::vector<double> vals;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    if (x >= window_lo && x <= window_hi) vals.push_back(pattern.intensity[i]);
  }
  if (vals.size() < 3)
    throw DegeneratePattern("fringe_contrast: window covers fewer than 3 grid points");
  // Strict interior extrema; adjacent max/min pairs give local visibility.
  std::vector<double> extrema;
  for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
    const bool is_max = vals[i] > vals[i - 1] && vals[i] > vals[i + 1];
    const bool is_min = vals[i] < vals[i - 1] && vals[i] < vals[i + 1];
    if (is_max || is_min) extrema.push_back(vals[i]);
  }
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < extrema.size(); ++i) {
    const double hi = std::max(extrema[i], extrema[i + 1]);
    const double lo = std::min(extrema[i], extrema[i + 1]);
    if (hi + lo > 0.0) best = std::max(best, (hi - lo) / (hi + lo));
  }
  return best;
}

double pattern_sd(const ScreenPattern& pattern) {
  const double dx = pattern.grid.dx();
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < pattern.intensity.size(); ++i) {
    const double p = pattern.intensity[i] * dx;
    const double x = pattern.grid.x(i);
    w += p;
    m1 += p * x;
    m2 += p * x * x;
  }
  if (!(w > 0.0)) throw DegeneratePattern("pattern_sd: zero pattern");
  m1 /= w;
  m2 /= w;
  return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

double measure_fringe_spacing(const ScreenPattern& pattern, double min_height) {
  const auto& v = pattern.intensity;
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, x);
  if (!(peak > 0.0)) throw DegeneratePattern("measure_fringe_spacing: zero pattern");
  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] > v[i + 1] && v[i] >= min_height * peak)
      maxima.push_back(pattern.grid.x(i));
  }
  if (maxima.size() < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < maxima.size(); ++i) acc += maxima[i + 1] - maxima[i];
  return acc / static_cast<double>(maxima.size() - 1);
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw InvalidParams("mean: empty sample");
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw InvalidParams("sample_variance: need at least 2 points");
  const double mu = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(xs.size() - 1);
}

double empirical_quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw InvalidParams("empirical_quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw InvalidParams("empirical_quantile: q outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

}  // namespace qbc
